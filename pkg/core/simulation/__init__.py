"""
Simulation-study data generation
"""

from .layout import HOLDOUT_COORDS, builtin_layout, fitting_locations
from .simulator import (IDENTIFIABILITY_SET, SURROGATE, SimSpec, SimulatedField, TruthRecord, simulate_field,
                        contaminate, holdout_split, locate_rows, simulate_study, identifiability_specs)

__all__ = [
    'HOLDOUT_COORDS', 'builtin_layout', 'fitting_locations',
    'IDENTIFIABILITY_SET', 'SURROGATE', 'SimSpec', 'SimulatedField', 'TruthRecord', 'simulate_field',
    'contaminate', 'holdout_split', 'locate_rows', 'simulate_study', 'identifiability_specs',
]
