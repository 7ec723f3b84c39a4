from typing import Any, Iterable, List, Optional, Tuple

__all__ = [
    "FewShapeError",
    "ConfigurationError",
    "ParameterError",
    "DimensionError",
    "BinvoxFormatError",
    "GenerationError",
    "ClassLookupError",
    "NumericError",
    "exit_code_for",
]


class FewShapeError(Exception):
    exit_code = 1


class ConfigurationError(FewShapeError, ValueError):
    exit_code = 2


class ParameterError(FewShapeError, ValueError):
    exit_code = 2

    def __init__(self, name: str, value: Any, msg: Optional[str] = None):
        self.name = name
        self.value = value
        self.msg = msg

    def __str__(self) -> str:
        s = f'Parameter "{self.name}" has invalid value {self.value!r}'
        if self.msg:
            s += f": {self.msg}"
        return s


class DimensionError(FewShapeError, ValueError):
    exit_code = 3

    def __init__(self, what: str, expected: Any, actual: Any):
        self.what = what
        self.expected = expected
        self.actual = actual

    def __str__(self) -> str:
        return (
            f"{self.what} mismatch: expected {self.expected}, "
            f"got {self.actual}"
        )


class BinvoxFormatError(FewShapeError, ValueError):
    exit_code = 3

    def __init__(self, offset: int, msg: str):
        self.offset = offset
        self.msg = msg

    def __str__(self) -> str:
        return f"Malformed binvox stream at byte {self.offset}: {self.msg}"


class GenerationError(FewShapeError, ValueError):
    exit_code = 3

    def __init__(self, class_id: str, parameter: str, msg: str):
        self.class_id = class_id
        self.parameter = parameter
        self.msg = msg

    def __str__(self) -> str:
        return (
            f'Parameter "{self.parameter}" of class "{self.class_id}" '
            f"produces an invalid shape: {self.msg}"
        )


class ClassLookupError(FewShapeError, LookupError):
    exit_code = 2

    def __init__(self, class_ids: Iterable[Any], msg: Optional[str] = None):
        self.class_ids: List[Any] = list(class_ids)
        self.msg = msg

    @property
    def class_names(self) -> str:
        return ", ".join(repr(c) for c in self.class_ids)

    def __str__(self) -> str:
        s = f"Unknown class id(s): {self.class_names}"
        if self.msg:
            s = f"{self.msg}: {self.class_names}"
        return s


class NumericError(FewShapeError, ArithmeticError):
    exit_code = 4

    def __init__(self, msg: str, keys: Tuple[Any, ...] = ()):
        self.msg = msg
        self.keys = keys

    def __str__(self) -> str:
        if self.keys:
            return f"{self.msg} (at {', '.join(map(str, self.keys))})"
        return self.msg


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, FewShapeError):
        return exc.exit_code
    return 1
