import json
import math
import zlib

import numpy as np
import pytest

from gsr.benchmarks import (
    SUITES,
    UnknownBenchmark,
    get_benchmark,
    grid_points,
    ground_truth_eval,
    library_for,
    list_benchmarks,
    make_rng,
    registry_json,
    sample_dataset,
    SamplerSpec,
)
from gsr.encoding import Transform as T

sin, cos, exp, ln, sqrt = math.sin, math.cos, math.exp, math.log, math.sqrt


def _harmonic(n):
    return sum(1.0 / k for k in range(1, int(n) + 1))


# [PAPER] second transcription of the expression columns, scalar math-module code
ORACLE = {
    "Nguyen-1": lambda x: x ** 3 + x ** 2 + x,
    "Nguyen-2": lambda x: x ** 4 + x ** 3 + x ** 2 + x,
    "Nguyen-3": lambda x: x ** 5 + x ** 4 + x ** 3 + x ** 2 + x,
    "Nguyen-4": lambda x: x ** 6 + x ** 5 + x ** 4 + x ** 3 + x ** 2 + x,
    "Nguyen-5": lambda x: sin(x ** 2) * cos(x) - 1,
    "Nguyen-6": lambda x: sin(x) + sin(x + x ** 2),
    "Nguyen-7": lambda x: ln(x + 1) + ln(x ** 2 + 1),
    "Nguyen-8": lambda x: sqrt(x),
    "Nguyen-9": lambda a, b: sin(a) + sin(b ** 2),
    "Nguyen-10": lambda a, b: 2 * sin(a) * cos(b),
    "Nguyen-11": lambda a, b: a ** b,
    "Nguyen-12": lambda a, b: a ** 4 - a ** 3 + 0.5 * b ** 2 - b,
    "Nguyen-12*": lambda a, b: a ** 4 - a ** 3 + 0.5 * b ** 2 - b,
    "Jin-1": lambda a, b: 2.5 * a ** 4 - 1.3 * a ** 3 + 0.5 * b ** 2 - 1.7 * b,
    "Jin-2": lambda a, b: 8 * a ** 2 + 8 * b ** 3 - 15,
    "Jin-3": lambda a, b: 0.2 * a ** 3 + 0.5 * b ** 3 - 1.2 * b - 0.5 * a,
    "Jin-4": lambda a, b: 1.5 * exp(a) + 5 * cos(b),
    "Jin-5": lambda a, b: 6 * sin(a) * cos(b),
    "Jin-6": lambda a, b: 1.35 * a * b + 5.5 * sin((a - 1) * (b - 1)),
    "Neat-1": lambda x: x ** 4 + x ** 3 + x ** 2 + x,
    "Neat-2": lambda x: x ** 5 + x ** 4 + x ** 3 + x ** 2 + x,
    "Neat-3": lambda x: sin(x ** 2) * cos(x) - 1,
    "Neat-4": lambda x: ln(x + 1) + ln(x ** 2 + 1),
    "Neat-5": lambda a, b: 2 * sin(a) * cos(b),
    "Neat-6": _harmonic,
    "Neat-7": lambda a, b: 2 - 2.1 * cos(9.8 * a) * sin(1.3 * b),
    "Neat-8": lambda a, b: exp(-(a - 1) ** 2) / (1.2 + (b - 2.5) ** 2),
    "Neat-9": lambda a, b: 1 / (1 + a ** -4) + 1 / (1 + b ** -4),
    "Livermore-1": lambda x: 1 / 3 + x + sin(x ** 2),
    "Livermore-2": lambda x: sin(x ** 2) * cos(x) - 2,
    "Livermore-3": lambda x: sin(x ** 3) * cos(x ** 2) - 1,
    "Livermore-4": lambda x: ln(x + 1) + ln(x ** 2 + 1) + ln(x),
    "Livermore-5": lambda a, b: a ** 4 - a ** 3 + a ** 2 - b,
    "Livermore-6": lambda x: 4 * x ** 4 + 3 * x ** 3 + 2 * x ** 2 + x,
    "Livermore-7": lambda x: math.sinh(x),
    "Livermore-8": lambda x: math.cosh(x),
    "Livermore-9": lambda x: sum(x ** k for k in range(1, 10)),
    "Livermore-10": lambda a, b: 6 * sin(a) * cos(b),
    "Livermore-11": lambda a, b: a ** 2 * a ** 2 / (a + b),
    "Livermore-12": lambda a, b: a ** 5 / b ** 3,
    "Livermore-13": lambda x: x ** (1 / 3),
    "Livermore-14": lambda x: x ** 3 + x ** 2 + x + sin(x) + sin(x ** 2),
    "Livermore-15": lambda x: x ** (1 / 5),
    "Livermore-16": lambda x: x ** (2 / 5),
    "Livermore-17": lambda a, b: 4 * sin(a) * cos(b),
    "Livermore-18": lambda x: sin(x ** 2) * cos(x) - 5,
    "Livermore-19": lambda x: x ** 5 + x ** 4 + x ** 2 + x,
    "Livermore-20": lambda x: exp(-x ** 2),
    "Livermore-21": lambda x: sum(x ** k for k in range(1, 9)),
    "Livermore-22": lambda x: exp(-0.5 * x ** 2),
    "SymSet-1": lambda x: x * math.sinh(x) - 4 / 5,
    "SymSet-2": lambda x: 1 / (x ** 5 - 3 * x ** 4 - 2.8 * x + 5),
    "SymSet-3": lambda x: (x ** 4 - 1.2 * x ** 2 + 11.5) ** (1 / 3),
    "SymSet-4": lambda x: 0.8 - cos(x) + 4.2 * exp(x) * sin(x ** 2),
    "SymSet-5": lambda a, b: 4.5 * a ** 2 + a * b ** 3 - 1.7 * b - 3.1,
    "SymSet-6": lambda a, b: 5 / (3 * a - b ** 3),
    "SymSet-7": lambda a, b: ln(a ** 3 + 4 * a * b),
    "SymSet-8": lambda a, b: sqrt(5 * a ** 5 + 14 * a ** 3 * b ** 4 - 2 * b + 7),
    "SymSet-9": lambda a, b: (2 * a + b) ** (-2 / 3),
    "SymSet-10": lambda a, b: 1.5 * cos(a) * ln(a * b) - 2.5,
    "SymSet-11": lambda a, b: sqrt(2 * cos(a) + 30 * exp(b)) + 4,
    "SymSet-12": lambda a, b, c: 0.4 * a ** 4 + 6.2 * b - 3.5 * a * c - 4.5,
    "SymSet-13": lambda a, b, c: 2 * b / (a + c),
    "SymSet-14": lambda a, b, c: a * b * c / (a + b + c),
    "SymSet-15": lambda a, b, c: (a + b) ** c,
    "SymSet-16": lambda a, b, c: exp(2.6 * a - ln(b) + 9.8 * cos(c)),
    "SymSet-17": lambda a, b, c: ln(0.2 * exp(a + b) + 0.5 * cos(c ** 2)),
}

# [PAPER] dataset column: (kind, a, b, c) for training
TRAIN = {
    **{f"Nguyen-{i}": ("U", -1, 1, 20) for i in (1, 2, 3, 4, 5, 6)},
    "Nguyen-7": ("U", 0, 2, 20), "Nguyen-8": ("U", 0, 4, 20),
    **{f"Nguyen-{i}": ("U", 0, 1, 20) for i in (9, 10, 11, 12)},
    "Nguyen-12*": ("U", 0, 10, 20),
    **{f"Jin-{i}": ("U", -3, 3, 100) for i in range(1, 7)},
    "Neat-1": ("U", -1, 1, 20), "Neat-2": ("U", -1, 1, 20), "Neat-3": ("U", -1, 1, 20),
    "Neat-4": ("U", 0, 2, 20), "Neat-5": ("U", -1, 1, 100), "Neat-6": ("E", 1, 50, 50),
    "Neat-7": ("E", -50, 50, 10 ** 5), "Neat-8": ("U", 0.3, 4, 100), "Neat-9": ("E", -5, 5, 21),
    "Livermore-1": ("U", -10, 10, 1000), "Livermore-4": ("U", 0, 2, 20),
    "Livermore-5": ("U", 0, 1, 20), "Livermore-10": ("U", 0, 1, 20),
    "Livermore-11": ("U", -1, 1, 50), "Livermore-12": ("U", -1, 1, 50),
    "Livermore-13": ("U", 0, 4, 20), "Livermore-15": ("U", 0, 4, 20),
    "Livermore-16": ("U", 0, 4, 20), "Livermore-17": ("U", 0, 1, 20),
    **{f"Livermore-{i}": ("U", -1, 1, 20) for i in (2, 3, 6, 7, 8, 9, 14, 18, 19, 20, 21, 22)},
    **{f"SymSet-{i}": ("U", -1, 1, 20) for i in (1, 2, 3, 5, 6, 8, 11, 12)},
    "SymSet-4": ("U", -3, 3, 20), "SymSet-7": ("U", 0, 2, 20), "SymSet-9": ("U", 0, 2, 20),
    "SymSet-14": ("U", 0, 2, 20),
    **{f"SymSet-{i}": ("U", 0, 1, 20) for i in (10, 13, 15, 16, 17)},
}


def test_suite_counts():
    counts = {s: len(list_benchmarks(s)) for s in SUITES}
    assert counts == {"nguyen": 13, "jin": 6, "neat": 9, "livermore": 22, "symset": 17}
    assert len(list_benchmarks()) == len(list_benchmarks("all")) == 67
    assert "Nguyen-8" in list_benchmarks() and "SymSet-17" in list_benchmarks()
    assert set(list_benchmarks()) == set(ORACLE) == set(TRAIN)


def test_unknown_names_rejected():
    with pytest.raises(UnknownBenchmark):
        get_benchmark("Nguyen-99")
    with pytest.raises(UnknownBenchmark):
        list_benchmarks("koza")


@pytest.mark.parametrize("name", list(ORACLE))
def test_ground_truth_matches_oracle(name):
    spec = get_benchmark(name)
    kind, a, b, c = TRAIN[name]
    assert (spec.train.kind, spec.train.a, spec.train.b, spec.train.c) == (kind, a, b, c)
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    if kind == "E" and name == "Neat-6":
        x = rng.integers(1, 51, size=(100, 1)).astype(float)
    else:
        x = rng.uniform(a, b, size=(100, spec.d))
    got = spec.ground_truth(x)
    want = []
    for row in map(tuple, x.tolist()):
        try:
            w = ORACLE[name](*row)
        except (ValueError, ZeroDivisionError, OverflowError):
            w = math.nan
        # a negative base with a fractional power is complex: outside the real domain
        want.append(math.nan if isinstance(w, complex) else float(w))
    want = np.array(want)
    ok = np.isfinite(want)
    assert ok.sum() >= 20
    assert np.allclose(got[ok], want[ok], rtol=1e-12, atol=1e-12 * np.abs(want[ok]).max())


def test_ground_truth_examples():
    assert ground_truth_eval("Nguyen-1", [1.0]) == pytest.approx(3.0, abs=0)
    assert ground_truth_eval("Nguyen-11", [[1.0, 0.7]])[0] == 1.0
    # [DERIVED] 2^(-2/3) = 0.629960...
    assert ground_truth_eval("SymSet-9", [[0.5, 1.0]])[0] == pytest.approx(0.6299605249, abs=1e-10)
    assert ground_truth_eval("Neat-6", [4.0])[0] == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4, rel=1e-15)
    with pytest.raises(ValueError):
        ground_truth_eval("SymSet-9", np.ones((3, 3)))


def test_nguyen1_train_set():
    ds = sample_dataset("Nguyen-1", "train", 0)
    assert ds.n == 20 and ds.d == 1
    assert ds.features.min() >= -1 and ds.features.max() <= 1
    assert np.allclose(ds.targets, ds.features[:, 0] ** 3 + ds.features[:, 0] ** 2 + ds.features[:, 0])


def test_even_grid_inclusive():
    assert np.array_equal(grid_points(SamplerSpec("E", 0, 1, 3), 1)[:, 0], [0, 0.5, 1])
    g = grid_points(SamplerSpec("E", -5, 5, 21), 2)
    assert g.shape == (441, 2) and {-5.0, 0.0, 5.0} <= set(g[:, 0])


def test_sampler_determinism_and_role_separation():
    for name in ("Nguyen-1", "Jin-3", "SymSet-14", "Livermore-11"):
        a = sample_dataset(name, "train", 4)
        b = sample_dataset(name, "train", 4)
        assert np.array_equal(a.features, b.features) and np.array_equal(a.targets, b.targets)
        t = sample_dataset(name, "test", 4)
        assert not np.array_equal(a.features[: min(a.n, t.n)], t.features[: min(a.n, t.n)])
        other = sample_dataset(name, "train", 5)
        assert not np.array_equal(a.features, other.features)
    r1, r2 = make_rng(1, "train", "x"), make_rng(1, "train", "x")
    assert r1.random() == r2.random()


def test_special_test_sets():
    assert get_benchmark("Neat-6").test == SamplerSpec("E", 1, 120, 120)
    for i in range(1, 7):
        assert get_benchmark(f"Jin-{i}").test == SamplerSpec("U", -3, 3, 30)
    assert sample_dataset("Jin-2", "test", 0).n == 30
    neat6 = sample_dataset("Neat-6", "test", 0)
    assert neat6.n == 120 and neat6.targets[-1] == pytest.approx(_harmonic(120), rel=1e-14)
    # grid samplers ignore the role
    e = [sample_dataset("Neat-9", r, 0).features for r in ("train", "test")]
    assert np.array_equal(*e)


def test_samples_have_finite_targets():
    for name in list_benchmarks():
        if name == "Neat-7":
            continue
        ds = sample_dataset(name, "train", 0)
        assert np.isfinite(ds.targets).all() and ds.n >= 1


def test_library_examples():
    tx, ty = library_for("Nguyen-8")
    assert set(tx.allowed_transforms) == {T.ONE, T.IDENTITY, T.COS, T.SIN, T.EXP, T.LN}
    assert set(ty.allowed_transforms) == {T.ONE, T.IDENTITY, T.EXP, T.LN}
    assert tx.code(T.ONE) == 0 and tx.code(T.IDENTITY) == 1
    assert T.EXP not in library_for("Livermore-1")[0]
    sx, sy = library_for("SymSet-2")
    assert T.RECIPROCAL in sx and T.RECIPROCAL in sy
    assert T.LN not in library_for("Jin-1")[0] and T.SQUARE in library_for("Jin-1")[0]
    assert set(library_for("Neat-6")[0].allowed_transforms) == {
        T.ONE, T.IDENTITY, T.RECIPROCAL, T.NEG, T.SQRT}
    assert get_benchmark("SymSet-11").m_psi == 2


def test_all_libraries_pin_codes():
    for name in list_benchmarks():
        tx, ty = library_for(name)
        for t in (tx, ty):
            assert t.code(T.ONE) == 0 and t.code(T.IDENTITY) == 1


def test_registry_json():
    rows = json.loads(registry_json())
    assert len(rows) == 67
    by = {r["name"]: r for r in rows}
    assert by["Nguyen-1"]["train"] == "U(-1,1,20)"
    assert by["Neat-7"]["train"] == "E(-50,50,10^5)"
    assert by["SymSet-2"]["library_y"] == ["one", "identity", "exp", "ln", "reciprocal"]
