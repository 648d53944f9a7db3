from .anova import (
    AnovaRow,
    AnovaTable,
    ModelSpec,
    Observation,
    ResidualRow,
    fit_anova_columns,
    fit_factorial_anova,
    term_name,
)
from .fdist import betainc_reg, f_cdf, f_sf
from .summary import SummaryStats, summary_stats

__all__ = [
    "AnovaRow",
    "AnovaTable",
    "ModelSpec",
    "Observation",
    "ResidualRow",
    "SummaryStats",
    "betainc_reg",
    "f_cdf",
    "f_sf",
    "fit_anova_columns",
    "fit_factorial_anova",
    "summary_stats",
    "term_name",
]
