import numpy as np
import pytest

from chiralcl.materials import (MaterialRangeError, constant_dielectric,
                                eval_permittivity, gold, gold_nk_table,
                                make_synthetic_metal, silica, vacuum)


def test_gold_matches_reference_table():
    model = gold()
    table = gold_nk_table()
    sel = (table[:, 0] >= 500) & (table[:, 0] <= 850)
    for wl, n, k in table[sel]:
        eps = eval_permittivity(model, wl)
        ref = (n + 1j * k) ** 2
        assert abs(eps - ref) / abs(ref) < 0.12, wl


def test_gold_at_600nm_is_plasmonic():
    eps = eval_permittivity(gold(), 600.0)
    assert eps.real < -7.0
    assert 0.0 < eps.imag < 3.0


def test_gold_range_enforced():
    with pytest.raises(MaterialRangeError):
        eval_permittivity(gold(), 150.0)


def test_constant_dielectric_and_vacuum():
    assert eval_permittivity(vacuum(), 600.0) == 1.0
    assert eval_permittivity(silica(), 700.0) == pytest.approx(1.45**2)
    assert not constant_dielectric(2.0).is_dispersive


def test_synthetic_metal_exact_epsilon():
    m = make_synthetic_metal(0.16, 2.9096)
    eps = eval_permittivity(m, 600.0)
    assert eps == pytest.approx((0.16 + 2.9096j) ** 2)
    # wavelength-independent by construction
    assert eval_permittivity(m, 750.0) == eps


def test_synthetic_metal_rejects_gainless_kappa():
    with pytest.raises(ValueError):
        make_synthetic_metal(0.5, 0.0)


def test_permittivity_vectorized():
    wl = np.array([500.0, 600.0, 700.0])
    eps = eval_permittivity(gold(), wl)
    assert eps.shape == (3,)
    assert np.all(eps.real < 0)
