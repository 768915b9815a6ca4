import math
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newsflow.sentiment import (
    COMPOUND_SCALE,
    NEGATION_FACTOR,
    CorpusFormatError,
    DailySourceScores,
    Lexicon,
    LexiconFormatError,
    NewsItem,
    Source,
    aggregate_daily,
    load_lexicon,
    load_news,
    read_daily_scores_csv,
    score_text,
    source_from_site,
    tokenize,
    word_frequency,
    write_daily_scores_csv,
)


def compound_oracle(total: float) -> float:
    """Closed-form compound normalization, written independently of the code."""
    return total / math.sqrt(total * total + COMPOUND_SCALE)


@pytest.fixture
def lex() -> Lexicon:
    return Lexicon({"good": 1.9, "bad": -2.5, "rally": 2.3, "crash": -2.9})


class TestLoadLexicon:
    def test_single_line(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good\t1.9\n")
        assert load_lexicon(path).entries == {"good": 1.9}

    def test_empty_file_scores_neutral(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("")
        lexicon = load_lexicon(path)
        assert lexicon.entries == {}
        score = score_text(lexicon, "anything at all")
        assert (score.pos, score.neg, score.neu, score.compound) == (0.0, 0.0, 1.0, 0.0)

    def test_non_numeric_valence_reports_line(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("bad\tx\n")
        with pytest.raises(LexiconFormatError, match=r":1:"):
            load_lexicon(path)

    def test_later_duplicates_override(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good\t1.9\ngood\t0.5\n")
        assert load_lexicon(path).entries == {"good": 0.5}

    def test_extra_columns_ignored(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good\t1.9\t0.8\t[1, 2]\n")
        assert load_lexicon(path).entries == {"good": 1.9}


class TestTokenize:
    def test_lowercases_and_strips_punctuation(self):
        assert tokenize("Stocks Rally!") == ["stocks", "rally"]

    def test_empty_text(self):
        assert tokenize("") == []

    def test_keeps_intra_word_apostrophes(self):
        assert tokenize("don't panic") == ["don't", "panic"]

    def test_preserves_order(self):
        assert tokenize("Down then UP") == ["down", "then", "up"]


class TestScoreText:
    def test_no_hits_is_neutral(self, lex):
        score = score_text(lex, "the quick brown fox")
        assert (score.pos, score.neg, score.neu, score.compound) == (0.0, 0.0, 1.0, 0.0)

    def test_single_positive_token(self, lex):
        score = score_text(lex, "good")
        assert score.compound == pytest.approx(compound_oracle(1.9), abs=1e-12)
        assert score.compound == pytest.approx(0.4404, abs=1e-4)
        assert score.pos == 1.0 and score.neg == 0.0

    def test_negation_flip(self, lex):
        score = score_text(lex, "not good")
        flipped = 1.9 * NEGATION_FACTOR
        assert score.compound == pytest.approx(compound_oracle(flipped), abs=1e-12)
        assert score.compound == pytest.approx(-0.3412, abs=1e-4)

    def test_negator_outside_lookback_has_no_effect(self, lex):
        near = score_text(lex, "not so very good")
        far = score_text(lex, "not entirely sure this looks good")
        assert near.compound < 0 < far.compound

    def test_booster_raises_magnitude(self, lex):
        plain = score_text(lex, "good")
        boosted = score_text(lex, "very good")
        assert boosted.compound > plain.compound

    def test_booster_dampens_at_distance(self, lex):
        adjacent = score_text(lex, "very good")
        distant = score_text(lex, "very so so good")
        assert adjacent.compound > distant.compound > score_text(lex, "good").compound

    def test_deterministic(self, lex):
        text = "rally after the crash but not bad"
        assert score_text(lex, text) == score_text(lex, text)

    def test_compound_monotone_in_summed_valence(self):
        lexicons = [Lexicon({"word": v}) for v in (-3.0, -1.0, 0.5, 2.0, 3.9)]
        compounds = [score_text(l, "word word").compound for l in lexicons]
        assert compounds == sorted(compounds)

    @settings(max_examples=300, deadline=None)
    @given(st.text(max_size=120))
    def test_invariants_on_arbitrary_text(self, text):
        score = score_text(default_lexicon_cached(), text)
        assert abs(score.pos + score.neg + score.neu - 1.0) <= 1e-6
        assert -1.0 <= score.compound <= 1.0


_DEFAULT_LEX = None


def default_lexicon_cached() -> Lexicon:
    global _DEFAULT_LEX
    if _DEFAULT_LEX is None:
        from newsflow.sentiment import default_lexicon

        _DEFAULT_LEX = default_lexicon()
    return _DEFAULT_LEX


def _item(day, source, title):
    return NewsItem(date.fromisoformat(day), source, title)


class TestAggregateDaily:
    CAL = [date(2020, 1, 6), date(2020, 1, 7), date(2020, 1, 8)]

    def test_mean_of_two_titles(self, lex):
        items = [
            _item("2020-01-06", Source.REUTERS, "good rally"),
            _item("2020-01-06", Source.REUTERS, "bad crash"),
        ]
        c1 = score_text(lex, "good rally").compound
        c2 = score_text(lex, "bad crash").compound
        daily = aggregate_daily(items, lex, self.CAL)
        assert daily[0].scores[Source.REUTERS] == pytest.approx((c1 + c2) / 2, abs=1e-15)
        assert daily[0].counts[Source.REUTERS] == 2

    def test_missing_source_gets_neutral_fill(self, lex):
        daily = aggregate_daily([], lex, self.CAL)
        assert len(daily) == len(self.CAL)
        for row in daily:
            assert row.scores == (0.0, 0.0, 0.0, 0.0)
            assert row.counts == (0, 0, 0, 0)

    def test_custom_neutral_fill(self, lex):
        daily = aggregate_daily([], lex, self.CAL, neutral_fill=0.25)
        assert daily[0].scores == (0.25, 0.25, 0.25, 0.25)

    def test_weekend_news_maps_to_next_trading_day(self, lex):
        items = [_item("2020-01-05", Source.WSJ, "good")]  # Sunday
        daily = aggregate_daily(items, lex, self.CAL)
        assert daily[0].counts[Source.WSJ] == 1

    def test_news_after_last_trading_day_dropped(self, lex):
        items = [_item("2020-01-09", Source.WSJ, "good")]
        daily = aggregate_daily(items, lex, self.CAL)
        assert all(row.counts == (0, 0, 0, 0) for row in daily)

    def test_matches_bruteforce_cell_means(self, lex):
        corpus = [
            ("2020-01-06", Source.WSJ, "good rally"),
            ("2020-01-06", Source.WSJ, "crash fears loom"),
            ("2020-01-06", Source.CNBC, "bad day"),
            ("2020-01-07", Source.FORTUNE, "rally extends"),
            ("2020-01-07", Source.FORTUNE, "not good"),
            ("2020-01-07", Source.REUTERS, "steady session"),
            ("2020-01-08", Source.WSJ, "very good outlook"),
            ("2020-01-08", Source.REUTERS, "bad crash"),
        ]
        items = [_item(d, s, t) for d, s, t in corpus]
        daily = aggregate_daily(items, lex, self.CAL)
        for i, day in enumerate(self.CAL):
            for src in Source:
                cell = [
                    score_text(lex, t).compound
                    for d, s, t in corpus
                    if date.fromisoformat(d) == day and s == src
                ]
                expected = sum(cell) / len(cell) if cell else 0.0
                assert daily[i].scores[src] == pytest.approx(expected, abs=1e-12)
                assert daily[i].counts[src] == len(cell)

    def test_output_length_equals_calendar_despite_gaps(self, lex):
        items = [_item("2020-01-07", Source.WSJ, "good")]
        assert len(aggregate_daily(items, lex, self.CAL)) == 3

    def test_order_invariance_exact(self, lex):
        items = [
            _item("2020-01-06", Source.CNBC, t)
            for t in ("good rally", "bad crash", "not bad", "very good day", "so so")
        ]
        forward = aggregate_daily(items, lex, self.CAL)
        backward = aggregate_daily(list(reversed(items)), lex, self.CAL)
        assert forward == backward

    def test_unsorted_calendar_rejected(self, lex):
        with pytest.raises(ValueError):
            aggregate_daily([], lex, [self.CAL[1], self.CAL[0]])


class TestWordFrequency:
    def test_empty_corpus(self, lex):
        assert word_frequency([], lex, "positive") == []

    def test_counts_and_rank(self, lex):
        items = [
            _item("2020-01-06", Source.WSJ, "rally rally rally"),
            _item("2020-01-06", Source.CNBC, "good rally extends"),
            _item("2020-01-07", Source.WSJ, "crash wipes gains"),
        ]
        ranked = word_frequency(items, lex, "positive")
        assert ranked[0] == ("rally", 4)

    def test_tie_breaks_lexicographically(self, lex):
        items = [
            _item("2020-01-06", Source.WSJ, "good zeta alpha"),
            _item("2020-01-07", Source.WSJ, "good zeta alpha"),
        ]
        ranked = word_frequency(items, lex, "positive")
        assert ranked.index(("alpha", 2)) < ranked.index(("zeta", 2))

    def test_negative_partition(self, lex):
        items = [
            _item("2020-01-06", Source.WSJ, "crash hits banks"),
            _item("2020-01-06", Source.WSJ, "good rebound"),
        ]
        ranked = dict(word_frequency(items, lex, "negative"))
        assert "crash" in ranked and "rebound" not in ranked

    def test_stop_words_excluded(self, lex):
        items = [_item("2020-01-06", Source.WSJ, "the good the bad")]
        ranked = dict(word_frequency(items, lex, "positive", stop_words=frozenset({"the"})))
        assert "the" not in ranked

    def test_bad_polarity_rejected(self, lex):
        with pytest.raises(ValueError):
            word_frequency([], lex, "neutral")


class TestNewsCorpusIO:
    def test_site_mapping(self):
        assert source_from_site("WSJ.com") is Source.WSJ
        assert source_from_site("www.reuters.com") is Source.REUTERS
        assert source_from_site("blog.example.net") is None

    def test_round_trip_ndjson(self, tmp_path):
        path = tmp_path / "news.ndjson"
        path.write_text(
            '{"title": "Stocks rally", "published": "2020-01-06", "site": "cnbc.com"}\n'
            '{"title": "Markets wobble", "published": "2020-01-07T13:30:00Z", "site": "fortune.com"}\n'
            '{"title": "Ignore me", "published": "2020-01-07", "site": "unknown.io"}\n'
        )
        items, skipped = load_news(path)
        assert [i.source for i in items] == [Source.CNBC, Source.FORTUNE]
        assert items[1].published == date(2020, 1, 7)
        assert skipped == {"unknown.io": 1}

    def test_bad_json_names_line(self, tmp_path):
        path = tmp_path / "news.ndjson"
        path.write_text('{"title": "ok", "published": "2020-01-06", "site": "cnbc"}\nnot json\n')
        with pytest.raises(CorpusFormatError, match=r":2:"):
            load_news(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "news.ndjson"
        path.write_text('{"title": "ok", "site": "cnbc"}\n')
        with pytest.raises(CorpusFormatError, match="published"):
            load_news(path)

    def test_daily_scores_csv_round_trip(self, tmp_path):
        rows = [
            DailySourceScores(date(2020, 1, 6), (0.1, -0.2, 0.0, 0.5), (3, 1, 0, 2)),
            DailySourceScores(date(2020, 1, 7), (0.0, 0.0, 0.0, 0.0), (0, 0, 0, 0)),
        ]
        path = tmp_path / "scores.csv"
        write_daily_scores_csv(rows, path)
        assert read_daily_scores_csv(path) == rows


class TestValidation:
    def test_lexicon_rejects_uppercase_tokens(self):
        with pytest.raises(ValueError):
            Lexicon({"Good": 1.0})

    def test_lexicon_rejects_nonfinite_valence(self):
        with pytest.raises(ValueError):
            Lexicon({"good": float("nan")})

    def test_news_item_requires_title(self):
        with pytest.raises(ValueError):
            NewsItem(date(2020, 1, 6), Source.WSJ, "   ")

    def test_daily_scores_bounds(self):
        with pytest.raises(ValueError):
            DailySourceScores(date(2020, 1, 6), (1.5, 0.0, 0.0, 0.0), (1, 0, 0, 0))
