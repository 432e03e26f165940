"""finseer: neural forecasting of daily stock series.

Rescaled-range predictability screening, supervised windowing, and online
gradient-descent backpropagation for a sigmoid MLP and a tapped-delay
recurrent network, with MSE/regression evaluation.
"""

from .errors import FinseerError
from .evaluation import EvalReport, RegressionFit, compare, evaluate, linear_regression, predict_series
from .ingest import OhlcvRecord, SeriesDataset, fetch_csv, parse_csv, serialize_csv
from .modelio import load_model, save_model
from .nnet import MlpNetwork, TdrnnNetwork, forward_mlp, forward_tdrnn, init_weights, reset_context, sigmoid
from .preprocess import (
    HurstResult,
    Normalizer,
    SupervisedWindowSet,
    build_windows,
    denormalize,
    fit_normalizer,
    normalize,
    rs_hurst,
    screen_predictability,
    split,
)
from .trainer import TrainConfig, TrainReport, gradient_check, train, train_example

__version__ = "0.1.0"
