"""
Posterior diagnostics: convergence, model comparison, sensitivity and reports
"""

from .convergence import Psrf, psrf, gelman_rubin, DEFAULT_THRESHOLD
from .dic import DicResult, dic, dic_components
from .sensitivity import SensitivityReport, relative_change, sensitivity_table, parameter_group
from .summary import summarize, quantile_label
from .reports import (EVAR_FOOTNOTE, fit_summary_table, psrf_table, render_table, write_report)

__all__ = [
    'Psrf', 'psrf', 'gelman_rubin', 'DEFAULT_THRESHOLD',
    'DicResult', 'dic', 'dic_components',
    'SensitivityReport', 'relative_change', 'sensitivity_table', 'parameter_group',
    'summarize', 'quantile_label',
    'EVAR_FOOTNOTE', 'fit_summary_table', 'psrf_table', 'render_table', 'write_report',
]
