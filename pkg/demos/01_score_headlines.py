#!/usr/bin/env python3
# Score a handful of financial headlines with the bundled lexicon, roll them
# up into per-day source scores, and rank the words behind each polarity.

from datetime import date

from newsflow.sentiment import (
    NewsItem,
    Source,
    aggregate_daily,
    default_lexicon,
    score_text,
    tokenize,
    word_frequency,
)

lexicon = default_lexicon()
print(f"lexicon: {len(lexicon.entries)} scored tokens, "
      f"{len(lexicon.boosters)} boosters, {len(lexicon.negators)} negators\n")

# 1. Single-title scoring: tokens, negation, boosters, and the compound score.

titles = [
    "Stocks rally after strong earnings",
    "Markets crash as bankruptcy fears spread",
    "Fed statement leaves traders unmoved",
    "Not a good day for tech",
    "Very good quarter lifts the index",
]
for title in titles:
    score = score_text(lexicon, title)
    print(f"{title!r}")
    print(f"  tokens   {tokenize(title)}")
    print(f"  compound {score.compound:+.4f}  (pos {score.pos:.2f} / "
          f"neg {score.neg:.2f} / neu {score.neu:.2f})")
print()

# 2. Daily aggregation: weekend items roll forward to the next trading day,
#    and every (day, source) cell is the mean compound of its titles.

calendar = [date(2024, 3, 4), date(2024, 3, 5), date(2024, 3, 6)]
corpus = [
    NewsItem(date(2024, 3, 2), Source.WSJ, "Rally extends into the weekend"),  # Saturday
    NewsItem(date(2024, 3, 4), Source.WSJ, "Profit growth beats forecasts"),
    NewsItem(date(2024, 3, 4), Source.CNBC, "Crash risk worries analysts"),
    NewsItem(date(2024, 3, 5), Source.FORTUNE, "A calm, stable session"),
    NewsItem(date(2024, 3, 6), Source.REUTERS, "Losses deepen in energy"),
]
for row in aggregate_daily(corpus, lexicon, calendar):
    cells = ", ".join(
        f"{src.label} {row.scores[src]:+.3f} (n={row.counts[src]})" for src in Source
    )
    print(f"{row.date}: {cells}")
print()

# 3. Word frequencies by polarity, the data behind a wordcloud.

for polarity in ("positive", "negative"):
    ranked = word_frequency(corpus, lexicon, polarity)
    print(f"{polarity}: {ranked[:5]}")
