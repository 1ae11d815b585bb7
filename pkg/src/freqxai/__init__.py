"""Explainable models of power-grid frequency stability.

Hourly stability indicators are extracted from 1 Hz frequency recordings,
regional energy time series are aggregated into feature frames, and
gradient-boosted trees trained on them are explained with exact Shapley
values.
"""

__version__ = "0.1.0"

from freqxai.errors import (  # noqa: F401
    FreqXaiError,
    DataError,
    InvariantViolation,
)
