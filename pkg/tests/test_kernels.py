import math

import numpy as np
import pytest

from topoflock import Kernel


def test_constant_eval():
    assert Kernel.constant(1.0).eval(0.5) == 1.0


def test_affine_endpoints():
    k = Kernel.affine(2.0, 1.0)
    assert k.eval(0.0) == 2.0
    assert k.eval(1.0) == 1.0


def test_exponential_eval():
    # direct evaluation of e^{-beta z}
    k = Kernel.exponential(beta=1.0)
    assert k.eval(1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_gamma_constant():
    assert Kernel.constant(1.0).gamma == 1.0


def test_gamma_affine():
    assert Kernel.affine(2.0, 1.0).gamma == 1.5


def test_gamma_exponential():
    # closed-form antiderivative: (1 - e^{-2}) / 2
    expected = (1.0 - math.exp(-2.0)) / 2.0
    assert Kernel.exponential(beta=2.0).gamma == pytest.approx(expected, abs=1e-15)


def test_derived_constants():
    k = Kernel.affine(2.0, 1.0)
    assert k.lip_constant == 1.0
    assert k.sup_norm == 2.0
    assert k.kcal == 2.0
    k = Kernel.constant(0.25)
    assert k.kcal == 1.0  # max(1, 0, 0.25)
    k = Kernel.exponential(beta=3.0, scale=2.0)
    assert k.sup_norm == 2.0
    assert k.lip_constant == 6.0
    assert k.kcal == 6.0


def test_eval_vectorized_and_domain():
    k = Kernel.affine(2.0, 1.0)
    z = np.array([0.0, 0.25, 1.0])
    assert np.allclose(k.eval(z), 2.0 - z)
    with pytest.raises(ValueError):
        k.eval(1.5)
    with pytest.raises(ValueError):
        k.eval(-0.1)


def test_table_matches_eval():
    for k in (Kernel.constant(0.7), Kernel.affine(1.5, 0.5), Kernel.exponential(beta=2.0)):
        n = 17
        tab = k.table(n)
        assert tab.shape == (n,)
        assert np.array_equal(tab, k.eval(np.arange(1, n + 1) / n))


def test_positive_and_nonincreasing():
    z = np.linspace(0.0, 1.0, 101)
    for k in (Kernel.constant(0.5), Kernel.affine(2.0, 1.0), Kernel.exponential(beta=4.0)):
        vals = k.eval(z)
        assert np.all(vals > 0.0)
        assert np.all(np.diff(vals) <= 0.0)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        Kernel.constant(0.0)
    with pytest.raises(ValueError):
        Kernel.affine(1.0, 1.0)  # vanishes at z=1
    with pytest.raises(ValueError):
        Kernel.affine(1.0, -0.5)  # increasing
    with pytest.raises(ValueError):
        Kernel.exponential(beta=-1.0)
    with pytest.raises(ValueError):
        Kernel.exponential(beta=1.0, scale=0.0)


def test_dict_round_trip():
    for k in (Kernel.constant(0.7), Kernel.affine(1.5, 0.5), Kernel.exponential(beta=2.0, scale=3.0)):
        k2 = Kernel.from_dict(k.to_dict())
        assert k2 == k


def test_from_dict_rejects_unknown_family():
    with pytest.raises(ValueError):
        Kernel.from_dict({"family": "gaussian", "sigma": 1.0})
