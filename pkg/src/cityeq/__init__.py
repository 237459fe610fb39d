"""Semi-discrete spatial equilibrium toolkit.

Firms sit at finitely many points of a 1D/2D city; workers are spread
continuously, choose among home and workplaces through noisy net wages, and
the housing market turns revenues into a residential density. The package
computes the equilibrium wages (including a teleworking variant), the
induced spatial fields, and runs comparative-statics scenarios from JSON
configs.
"""

from .config import ScenarioConfig, config_schema, load_config, parse_config
from .economy import (
    CobbDouglas,
    FirmSpec,
    ModelParams,
    choice_shares,
    density_from_revenue,
    labor_demand,
    net_values,
    profit,
    profit_curvature,
    rent_from_density,
    revenue_softmax,
)
from .errors import (
    CityEqError,
    ConfigError,
    InvalidDomainError,
    InvalidPreferenceError,
    InvalidResolutionError,
    InvalidWageError,
    NumericInputError,
)
from .grid import CityGrid, Field, build_grid, integrate, write_field_csv
from .runner import ScenarioOutcome, run_scenario
from .selfcheck import self_check
from .solver import (
    EquilibriumResult,
    SolverConfig,
    assemble_residual,
    coupling_diagnostics,
    solve_by_fixed_point,
    solve_equilibrium,
    uniqueness_threshold,
    wage_bounds,
)
from .telework import (
    CES2,
    TeleFirmSpec,
    TeleworkEquilibriumResult,
    assemble_tele_residual,
    solve_tele_equilibrium,
    tele_demands,
    tele_profit,
    tele_uniqueness_threshold,
    tele_wage_bounds,
)
from .zeronoise import (
    Partition,
    build_partition,
    hard_revenue,
    verify_zero_noise_equilibrium,
    zero_noise_limit_study,
)

__version__ = "0.1.0"

__all__ = [
    "CES2",
    "CityEqError",
    "CityGrid",
    "CobbDouglas",
    "ConfigError",
    "EquilibriumResult",
    "Field",
    "FirmSpec",
    "InvalidDomainError",
    "InvalidPreferenceError",
    "InvalidResolutionError",
    "InvalidWageError",
    "ModelParams",
    "NumericInputError",
    "Partition",
    "ScenarioConfig",
    "ScenarioOutcome",
    "SolverConfig",
    "TeleFirmSpec",
    "TeleworkEquilibriumResult",
    "assemble_residual",
    "assemble_tele_residual",
    "build_grid",
    "build_partition",
    "choice_shares",
    "config_schema",
    "coupling_diagnostics",
    "density_from_revenue",
    "hard_revenue",
    "integrate",
    "labor_demand",
    "load_config",
    "net_values",
    "parse_config",
    "profit",
    "profit_curvature",
    "rent_from_density",
    "revenue_softmax",
    "run_scenario",
    "self_check",
    "solve_by_fixed_point",
    "solve_equilibrium",
    "solve_tele_equilibrium",
    "tele_demands",
    "tele_profit",
    "tele_uniqueness_threshold",
    "tele_wage_bounds",
    "uniqueness_threshold",
    "verify_zero_noise_equilibrium",
    "wage_bounds",
    "write_field_csv",
    "zero_noise_limit_study",
]
