import numpy as np
import pytest
import torch

from fewshape.exceptions import ParameterError
from fewshape.nn.sparsemax import (
    sparsemax,
    sparsemax_jvp,
    sparsemax_threshold,
)

from .utils import brute_force_simplex_projection


def test_constant_vector_is_uniform():
    p = sparsemax(torch.full((5,), 2.5, dtype=torch.float64))
    assert torch.equal(p, torch.full((5,), 0.2, dtype=torch.float64))


@pytest.mark.parametrize(
    ["z", "expected"],
    [((3.0, 1.0), (1.0, 0.0)), ((1.2, 0.8), (0.7, 0.3))],
)
def test_hand_cases(z, expected):
    p = sparsemax(torch.tensor(z, dtype=torch.float64))
    assert p.tolist() == pytest.approx(expected, abs=1e-12)
    assert brute_force_simplex_projection(np.array(z)).tolist() == (
        pytest.approx(expected, abs=1e-12)
    )


def test_matches_brute_force_projection():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        z = rng.normal(0, rng.uniform(0.1, 3), size=rng.integers(1, 9))
        p = sparsemax(torch.from_numpy(z)).numpy()
        assert np.abs(p - brute_force_simplex_projection(z)).max() <= 1e-8
        assert p.min() >= 0
        assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_simplex_and_order_on_many_vectors():
    rng = np.random.default_rng(3)
    for size in range(1, 9):
        scale = rng.uniform(0.1, 3, size=(12_500, 1))
        z = torch.from_numpy(rng.normal(size=(12_500, size)) * scale)
        p = sparsemax(z, dim=-1)
        assert bool((p >= 0).all())
        assert float((p.sum(dim=-1) - 1).abs().max()) <= 1e-9
        ranked = torch.gather(p, -1, torch.argsort(z, -1, descending=True))
        assert bool((ranked[:, 1:] <= ranked[:, :-1]).all())


def test_shift_invariance():
    rng = np.random.default_rng(1)
    for _ in range(100):
        # dyadic inputs and shifts keep the shifted arithmetic exact
        z = np.round(rng.normal(size=6) * 64) / 64
        shift = np.round(rng.uniform(-8, 8) * 64) / 64
        a = sparsemax(torch.from_numpy(z))
        b = sparsemax(torch.from_numpy(z + shift))
        assert torch.equal(a, b)
        z = rng.normal(size=6)
        shift = rng.uniform(-8, 8)
        a = sparsemax(torch.from_numpy(z))
        b = sparsemax(torch.from_numpy(z + shift))
        assert torch.allclose(a, b, rtol=0, atol=1e-12)


def test_threshold_and_support_size():
    tau, k = sparsemax_threshold(torch.tensor([1.2, 0.8, -3.0]))
    assert k.item() == 2
    assert tau.item() == pytest.approx(0.5)


def test_batched_rows_are_independent():
    z = torch.tensor([[3.0, 1.0, 0.0], [1.0, 1.0, 1.0]])
    p = sparsemax(z, dim=-1)
    assert p[0].tolist() == [1.0, 0.0, 0.0]
    assert p[1].tolist() == pytest.approx([1 / 3] * 3)
    columns = sparsemax(z.T, dim=0)
    assert torch.allclose(columns.T, p)


def test_invalid_inputs():
    with pytest.raises(ParameterError):
        sparsemax(torch.zeros(0))
    with pytest.raises(ParameterError):
        sparsemax(torch.tensor([1.0, float("nan")]))


def test_jvp_projects_onto_support():
    z = torch.tensor([1.2, 0.8, -3.0], dtype=torch.float64)
    upstream = torch.tensor([5.0, 5.0, 7.0], dtype=torch.float64)
    assert sparsemax_jvp(z, upstream).tolist() == [0.0, 0.0, 0.0]
    upstream = torch.tensor([1.0, 0.0, 7.0], dtype=torch.float64)
    assert sparsemax_jvp(z, upstream).tolist() == [0.5, -0.5, 0.0]


def test_jvp_is_zero_for_singleton_support():
    z = torch.tensor([3.0, 1.0, 0.0], dtype=torch.float64)
    upstream = torch.randn(3, dtype=torch.float64)
    assert torch.count_nonzero(sparsemax_jvp(z, upstream)) == 0


def test_backward_matches_jvp_and_gradcheck():
    rng = np.random.default_rng(2)
    for _ in range(20):
        z = torch.from_numpy(rng.normal(size=(2, 6))).requires_grad_()
        upstream = torch.from_numpy(rng.normal(size=(2, 6)))
        (sparsemax(z, dim=-1) * upstream).sum().backward()
        assert torch.allclose(z.grad, sparsemax_jvp(z.detach(), upstream))
        assert torch.autograd.gradcheck(
            lambda x: sparsemax(x, dim=-1), (z.detach().requires_grad_(),)
        )
