"""News-sentiment-aware stock forecasting toolkit.

Pipeline pieces, importable independently:

- :mod:`newsflow.sentiment` - lexicon scoring of headlines, daily aggregates
- :mod:`newsflow.dataprep` - joint series, rolling windows, noise augmentation
- :mod:`newsflow.baseline` - ARMA and price-plus-sentiment linear predictors
- :mod:`newsflow.neural` - from-scratch stacked LSTM with BPTT and ADAM
- :mod:`newsflow.evaluation` - MPA/MSE metrics, comparisons, plot emission
- :mod:`newsflow.synthetic` - deterministic fixture generator
- :mod:`newsflow.cli` - the ``newsflow`` command
"""

from .baseline import ArmaParams, SentimentArmaParams, arma_fit, arma_predict
from .dataprep import (
    JointSeries,
    NoiseConfig,
    PriceSeries,
    Window,
    WindowedDataset,
    add_noise,
    build_augmented_trainset,
    build_joint_series,
    build_windows,
    denormalize,
    load_prices,
    normalize_window,
)
from .evaluation import EvalReport, PredictionTrack, compare, index_metrics, mean_mpa, mpa
from .neural import (
    AdamState,
    NetworkConfig,
    TrainReport,
    TrainSettings,
    adam_step,
    mse_loss,
    network_forward,
    predict,
    train,
)
from .sentiment import (
    DailySourceScores,
    Lexicon,
    NewsItem,
    SentimentScore,
    Source,
    aggregate_daily,
    load_lexicon,
    score_text,
    tokenize,
    word_frequency,
)

__version__ = "0.1.0"
