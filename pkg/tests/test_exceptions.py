import pytest

from fewshape.exceptions import (
    BinvoxFormatError,
    ClassLookupError,
    ConfigurationError,
    DimensionError,
    FewShapeError,
    GenerationError,
    NumericError,
    ParameterError,
    exit_code_for,
)


def test_parameter_error_str():
    exc = ParameterError("t", 1.5, "threshold must lie in (0, 1)")
    assert str(exc) == (
        'Parameter "t" has invalid value 1.5: threshold must lie in (0, 1)'
    )
    assert str(ParameterError("k", 0)) == 'Parameter "k" has invalid value 0'


def test_dimension_error_str():
    exc = DimensionError("resolution", 32, 16)
    assert str(exc) == "resolution mismatch: expected 32, got 16"


def test_binvox_format_error_keeps_offset():
    exc = BinvoxFormatError(42, "zero run length")
    assert exc.offset == 42
    assert str(exc) == "Malformed binvox stream at byte 42: zero run length"


def test_generation_error_names_parameter():
    exc = GenerationError("can", "radius", "empty cross-section")
    assert exc.parameter == "radius"
    assert str(exc) == (
        'Parameter "radius" of class "can" produces an invalid shape: '
        "empty cross-section"
    )


def test_class_lookup_error_lists_classes():
    exc = ClassLookupError(["ring", "bracket"])
    assert exc.class_ids == ["ring", "bracket"]
    assert str(exc) == "Unknown class id(s): 'ring', 'bracket'"
    exc = ClassLookupError(["ring"], "Not adapted")
    assert str(exc) == "Not adapted: 'ring'"


def test_numeric_error_keys():
    assert str(NumericError("Zero-shot IoU is zero")) == (
        "Zero-shot IoU is zero"
    )
    exc = NumericError("Zero-shot IoU is zero", ("ring", "bracket"))
    assert str(exc) == "Zero-shot IoU is zero (at ring, bracket)"


@pytest.mark.parametrize(
    ["exc", "code"],
    [
        (ConfigurationError("x"), 2),
        (ParameterError("x", 1), 2),
        (ClassLookupError(["x"]), 2),
        (DimensionError("x", 1, 2), 3),
        (BinvoxFormatError(0, "x"), 3),
        (GenerationError("c", "p", "x"), 3),
        (NumericError("x"), 4),
        (FewShapeError("x"), 1),
        (RuntimeError("x"), 1),
    ],
)
def test_exit_codes(exc, code):
    assert exit_code_for(exc) == code


def test_errors_keep_builtin_bases():
    assert isinstance(ParameterError("x", 1), ValueError)
    assert isinstance(ClassLookupError(["x"]), LookupError)
    assert isinstance(NumericError("x"), ArithmeticError)
