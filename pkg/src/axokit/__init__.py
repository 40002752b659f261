"""axokit: approximate arithmetic operator design-space exploration.

Models LUT-removal approximate adders and signed multipliers, characterizes
their behavioral error and proxy hardware cost, transfers knowledge from
small to large operators through distance matching and from-scratch random
forests, supersamples candidate configurations under scaled constraints,
and searches the accuracy/cost trade-off with a constrained genetic
algorithm.
"""

__version__ = "0.1.0"

from .errors import (
    AxokitError,
    CapacityError,
    DuplicateConfigError,
    InvalidOperatorError,
    ModelFormatError,
    SchemaError,
    WidthMismatchError,
)
from .operators import (
    AxoConfig,
    Family,
    OperatorKind,
    build_netlist,
    config_length,
    enumerate_configs,
    evaluate,
    parse_kind,
)

__all__ = [
    "AxokitError",
    "CapacityError",
    "DuplicateConfigError",
    "InvalidOperatorError",
    "ModelFormatError",
    "SchemaError",
    "WidthMismatchError",
    "AxoConfig",
    "Family",
    "OperatorKind",
    "build_netlist",
    "config_length",
    "enumerate_configs",
    "evaluate",
    "parse_kind",
    "__version__",
]
