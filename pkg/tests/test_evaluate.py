import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsr.encoding import (
    CATALOG,
    DONT_CARE,
    EXTENDED_TABLE,
    NGUYEN_TABLE,
    BasisPhi,
    BasisPsi,
    EncodingError,
    MappingTable,
    Transform,
    random_phi,
)
from gsr.evaluate import Dataset, apply_transform, build_design, eval_phi, eval_psi

D = DONT_CARE
APPB_TABLE = MappingTable(CATALOG[:10], d=3)

# independent scalar definitions, written against the math module
_NAIVE = {
    "one": lambda a: 1.0, "identity": lambda a: a, "reciprocal": lambda a: 1.0 / a,
    "square": lambda a: a * a, "cube": lambda a: a ** 3, "cos": math.cos, "sin": math.sin,
    "exp": math.exp, "ln": math.log, "sqrt": math.sqrt,
}


def naive_phi(rows, transforms, point):
    value = 1.0
    for r in rows:
        name = transforms[r[0]].value
        if name == "one":
            continue
        if r[1] == 0:
            arg = point[r[2] - 1]
        elif r[1] == 1:
            arg = sum(point[v - 1] for v in r[2:] if v > 0)
        else:
            arg = math.prod(point[v - 1] for v in r[2:] if v > 0)
        value *= _NAIVE[name](arg)
    return value


def test_apply_transform_examples():
    assert apply_transform(Transform.LN, 1.0) == 0.0
    assert apply_transform(Transform.NEG_EXP, 0.0) == 1.0
    assert not np.isfinite(apply_transform(Transform.LN, -1.0))
    assert not np.isfinite(apply_transform(Transform.RECIPROCAL, 0.0))
    assert not np.isfinite(apply_transform(Transform.SQRT, -2.0))
    assert apply_transform(Transform.ONE, float("nan")) == 1.0


def test_eval_phi_table3_zero_factor():
    m = BasisPhi([[1, 0, 2, D, D], [2, 2, 1, 1, 2], [5, 1, 1, 3, 0], [0, D, D, D, D]])
    assert eval_phi(m, NGUYEN_TABLE, [1.0, 0.0, math.e - 1]) == 0.0


def test_eval_square_times_exp_at_unit_point():
    m = BasisPhi([[3, 0, 1, D], [7, 2, 1, 2]])
    assert eval_phi(m, APPB_TABLE.with_d(2), [1.0, 0.0]) == 1.0


def test_eval_four_factor_product_hand_value():
    # [DERIVED] 0.5*sin(0.5)*sqrt(2) = 0.33900...; cross-checked by direct evaluation
    m = BasisPhi([[2, 1, 1, 1, 2], [4, 0, 2, D, D], [6, 2, 2, 3, 0], [9, 1, 2, 3, 3],
                  [0, D, D, D, D]])
    x1, x2, x3 = 0.5, 1.0, 0.5
    direct = x2 ** 3 * math.sin(x2 * x3) * math.sqrt(x2 + 2 * x3) / (2 * x1 + x2)
    got = eval_phi(m, APPB_TABLE, [x1, x2, x3])
    assert got == pytest.approx(0.5 * math.sin(0.5) * math.sqrt(2), abs=1e-15)
    assert got == pytest.approx(direct, abs=1e-15)
    assert abs(got - 0.33900) < 1e-5


def test_eval_psi_examples():
    assert eval_psi(BasisPsi([7]), APPB_TABLE, 0.0) == 1.0
    assert eval_psi(BasisPsi([4, 9]), APPB_TABLE, 4.0) == 128.0
    assert eval_psi(BasisPsi([0, 8, 0]), APPB_TABLE, math.e) == pytest.approx(1.0, abs=1e-15)


def test_eval_phi_dimension_checked():
    with pytest.raises(EncodingError):
        eval_phi(BasisPhi([[1, 0, 1, D]]), NGUYEN_TABLE, np.ones((4, 2)))


def test_build_design_constant_identity():
    ds = Dataset(np.array([[0.3], [0.7]]), np.array([2.0, 3.0]))
    b = build_design(ds, [BasisPhi([[0, D, D, D]])], [BasisPsi([1])],
                     NGUYEN_TABLE.with_d(1), NGUYEN_TABLE.with_d(1))
    assert np.array_equal(b.X[:, 0], [1, 1])
    assert np.array_equal(b.Y[:, 0], [2, 3])
    assert np.array_equal(b.A, [[1, -2], [1, -3]])
    assert b.all_finite


def test_build_design_stacking_and_flags():
    rng = np.random.default_rng(0)
    t = NGUYEN_TABLE.with_d(1)
    ds = Dataset(np.array([[0.0], [0.5], [1.0]]), np.array([1.0, 2.0, 3.0]))
    phis = [random_phi(t, rng) for _ in range(6)] + [BasisPhi([[5, 0, 1, D]])]
    psis = [BasisPsi([1]), BasisPsi([5])]
    b = build_design(ds, phis, psis, t, t)
    assert np.array_equal(b.A[:, :7], b.X, equal_nan=True)
    assert np.array_equal(b.A[:, 7:], -b.Y, equal_nan=True)
    # ln(x) at x = 0 is not finite
    assert not b.phi_finite[6]
    for j in range(7):
        assert b.phi_finite[j] == bool(np.isfinite(b.X[:, j]).all())
    assert not b.all_finite


def test_design_matches_direct_and_naive_evaluation():
    rng = np.random.default_rng(3)
    x = rng.uniform(0.1, 2.0, size=(1000, 3))
    mats = [random_phi(EXTENDED_TABLE, rng) for _ in range(1000)]
    ds = Dataset(x, np.ones(len(x)))
    b = build_design(ds, mats, [BasisPsi([1])], EXTENDED_TABLE, EXTENDED_TABLE.with_d(1))
    for i, m in enumerate(mats):
        direct = eval_phi(m, EXTENDED_TABLE, x[i])
        assert np.array_equal(b.X[i, i], direct, equal_nan=True)
        naive = naive_phi(m.rows, EXTENDED_TABLE.transforms, x[i].tolist())
        assert direct == pytest.approx(naive, rel=1e-12, abs=1e-12)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.ones((3, 1)), np.ones(2))
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan]]), np.ones(1))
    with pytest.raises(ValueError):
        Dataset(np.empty((0, 1)), np.empty(0))
    assert Dataset(np.arange(3.0), np.arange(3.0)).d == 1


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from(list(Transform)))
def test_transforms_never_raise(a, t):
    out = apply_transform(t, a)
    assert isinstance(out, float)
