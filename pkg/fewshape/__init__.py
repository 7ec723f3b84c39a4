__version__ = "0.1.0"

from fewshape.exceptions import (  # noqa: E402
    ClassLookupError,
    ConfigurationError,
    DimensionError,
    FewShapeError,
    NumericError,
    ParameterError,
)

__all__ = [
    "__version__",
    "FewShapeError",
    "ConfigurationError",
    "ParameterError",
    "DimensionError",
    "ClassLookupError",
    "NumericError",
]
