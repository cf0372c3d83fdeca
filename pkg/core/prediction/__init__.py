"""
Spatial prediction from posterior draws
"""

from .predictor import (PredictionRequest, PredictiveSummary, GridSpec, ConstantCovariates,
                        TableCovariates, conditional_moments, predict_at, predict_grid,
                        write_predictions, evaluate_holdout)

__all__ = [
    'PredictionRequest', 'PredictiveSummary', 'GridSpec', 'ConstantCovariates',
    'TableCovariates', 'conditional_moments', 'predict_at', 'predict_grid',
    'write_predictions', 'evaluate_holdout',
]
