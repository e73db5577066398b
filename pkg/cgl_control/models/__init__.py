"""
Data models: physical parameters, grids, reports and experiment configuration.
"""

from .experiment import (
    CrosscheckSettings,
    ExperimentConfig,
    InitialDatum,
    PicardSettings,
    PlantKind,
    dump_config,
    load_config,
    parse_config,
)
from .params import Grid, PhysParams, TimeGrid
from .reports import (
    AdmissibilityReport,
    CrossSample,
    CrossValidationReport,
    DenominatorEntry,
    RateMode,
    RatePlan,
    Verdict,
)

__all__ = [
    "PhysParams",
    "Grid",
    "TimeGrid",
    "AdmissibilityReport",
    "DenominatorEntry",
    "Verdict",
    "RatePlan",
    "RateMode",
    "CrossSample",
    "CrossValidationReport",
    "ExperimentConfig",
    "InitialDatum",
    "PicardSettings",
    "CrosscheckSettings",
    "PlantKind",
    "load_config",
    "parse_config",
    "dump_config",
]
