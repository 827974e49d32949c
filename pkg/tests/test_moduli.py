import numpy as np
import pytest

from instantons.adhm import basic_adhm_data, framed_tangent_dimension, random_adhm_data, solve_adhm
from instantons.errors import InvalidParameterError
from instantons.moduli import ModuliQuery, adhm_framed_dim, moduli_dimension, thooft_family_dim


def test_su2_on_the_sphere_is_8k_minus_3():
    for k in range(1, 101):
        assert moduli_dimension(ModuliQuery(2, k)) == 8 * k - 3


def test_thooft_family_plus_gauge_orientations():
    # the ansatz has 5k parameters; the remaining 3(k - 1) complete 8k - 3 for k >= 1
    for k in range(1, 101):
        assert thooft_family_dim(k) == 5 * k
        assert thooft_family_dim(k) + 3 * (k - 1) == moduli_dimension(ModuliQuery(2, k))


def test_framed_count_minus_framing_is_moduli_dimension():
    for k in range(1, 11):
        assert adhm_framed_dim(2, k) == 8 * k
        assert adhm_framed_dim(2, k) - 3 == moduli_dimension(ModuliQuery(2, k))
    for r in range(2, 6):
        for c in range(1, 6):
            assert adhm_framed_dim(r, c) == 4 * r * c
            assert adhm_framed_dim(r, c) - (r * r - 1) == moduli_dimension(ModuliQuery(r, c))


@pytest.mark.parametrize(
    "q, expected",
    [
        (ModuliQuery(3, 1), 12 - 8),
        (ModuliQuery(2, 1, b1=0, b_plus=1), 8 - 6),
        (ModuliQuery(2, 1, b1=2, b_plus=0), 8 + 3),
        (ModuliQuery(3, 1, b_plus=3), 12 - 32),
    ],
)
def test_general_formula(q, expected):
    assert moduli_dimension(q) == expected


def test_negative_index_is_returned():
    assert moduli_dimension(ModuliQuery(4, 1, b_plus=5)) < 0


@pytest.mark.parametrize("kwargs", [dict(r=1, k=1), dict(r=2, k=0), dict(r=2, k=1, b1=-1), dict(r=2, k=1.5), dict(r=True, k=1)])
def test_query_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        ModuliQuery(**kwargs)


def test_helpers_validate():
    with pytest.raises(InvalidParameterError):
        thooft_family_dim(0)
    with pytest.raises(InvalidParameterError):
        adhm_framed_dim(0, 1)


@pytest.mark.parametrize("r, c", [(2, 1), (2, 2)])
def test_kernel_oracle_matches_framed_count(r, c):
    d = basic_adhm_data() if c == 1 else solve_adhm(random_adhm_data(c, r, np.random.default_rng(0), 2.0)).data
    dim, sv = framed_tangent_dimension(d, threshold=1e-8)
    assert dim == adhm_framed_dim(r, c)
    # the spectrum separates cleanly around the threshold
    small, large = sv[sv <= 1e-8], sv[sv > 1e-8]
    assert np.all(large > 1e-4) and (small.size == 0 or np.all(small < 1e-9))
