"""Registry of the symbolic-regression benchmark problems.

Every problem carries its closed-form ground truth, train/test samplers and
the transform libraries GSR may draw from. Arithmetic symbols in the published
library strings (+, -, *, /) are structural and do not map to transforms.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import digamma

from .encoding import MappingTable, Transform as T
from .evaluate import Dataset

SUITES = ("nguyen", "jin", "neat", "livermore", "symset")

ROLE_IDS = {"train": 0, "test": 1}

# Drawing E grids with more than this many points is impractical; larger
# requests use round(c ** (1/d)) points per axis instead.
MAX_GRID_POINTS = 10**6

L0 = (T.ONE, T.IDENTITY, T.COS, T.SIN, T.EXP, T.LN)
Y_BASE = (T.ONE, T.IDENTITY, T.EXP, T.LN)
Y_POWERS = (T.RECIPROCAL, T.SQUARE, T.CUBE, T.SQRT)


class UnknownBenchmark(KeyError):
    pass


@dataclass(frozen=True)
class SamplerSpec:
    kind: str  # "U" or "E"
    a: float
    b: float
    c: int

    def __post_init__(self):
        if self.kind not in ("U", "E") or self.c < 1 or not self.a < self.b:
            raise ValueError(f"bad sampler {self}")

    def label(self) -> str:
        c = f"{self.c:g}" if self.c < 10**5 else f"10^{round(np.log10(self.c))}"
        return f"{self.kind}({self.a:g},{self.b:g},{c})"


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    suite: str
    d: int
    expression: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    train: SamplerSpec
    test: SamplerSpec
    lib_x: tuple[T, ...]
    library_label: str
    m_psi: int = 1
    notes: str = ""

    @property
    def lib_y(self) -> tuple[T, ...]:
        return Y_BASE + tuple(t for t in Y_POWERS if t in self.lib_x)

    def tables(self) -> tuple[MappingTable, MappingTable]:
        return (MappingTable.from_transforms(self.lib_x, d=self.d),
                MappingTable.from_transforms(self.lib_y, d=1))

    def ground_truth(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None] if self.d == 1 else x[None, :]
        if x.shape[1] != self.d:
            raise ValueError(f"{self.name} expects {self.d} input columns, got {x.shape[1]}")
        with np.errstate(all="ignore"):
            return np.asarray(self.fn(x), dtype=float)

    def train_domain(self) -> tuple[float, float]:
        return self.train.a, self.train.b


def _harmonic(x):
    """Sum_{k=1}^{x} 1/k: direct summation for integers, digamma continuation otherwise."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    flat, res = x.ravel(), out.ravel()
    for i, v in enumerate(flat):
        if np.isfinite(v) and v >= 1 and v == np.round(v) and v <= 10**6:
            res[i] = np.sum(1.0 / np.arange(1, int(v) + 1))
        else:
            res[i] = digamma(v + 1.0) + np.euler_gamma
    return out


def _poly(*coefs):
    return lambda x: sum(c * x[:, 0] ** (k + 1) for k, c in enumerate(coefs))


_REGISTRY: dict[str, BenchmarkSpec] = {}


def _add(name, suite, d, expr, fn, train, lib, label="L0", test=None, m_psi=1, notes=""):
    spec = BenchmarkSpec(name, suite, d, expr, fn, train, test or train, tuple(lib),
                         label, m_psi, notes)
    _REGISTRY[name] = spec


def _u(a, b, c):
    return SamplerSpec("U", a, b, c)


def _e(a, b, c):
    return SamplerSpec("E", a, b, c)


def _lib(base, minus=(), plus=()):
    keep = [t for t in base if t not in minus]
    return tuple(keep) + tuple(t for t in plus if t not in keep)


# -- Nguyen -------------------------------------------------------------------
_add("Nguyen-1", "nguyen", 1, "x^3 + x^2 + x", _poly(1, 1, 1), _u(-1, 1, 20), L0)
_add("Nguyen-2", "nguyen", 1, "x^4 + x^3 + x^2 + x", _poly(1, 1, 1, 1), _u(-1, 1, 20), L0)
_add("Nguyen-3", "nguyen", 1, "x^5 + x^4 + x^3 + x^2 + x", _poly(1, 1, 1, 1, 1), _u(-1, 1, 20), L0)
_add("Nguyen-4", "nguyen", 1, "x^6 + x^5 + x^4 + x^3 + x^2 + x", _poly(1, 1, 1, 1, 1, 1),
     _u(-1, 1, 20), L0)
_add("Nguyen-5", "nguyen", 1, "sin(x^2)*cos(x) - 1",
     lambda x: np.sin(x[:, 0] ** 2) * np.cos(x[:, 0]) - 1, _u(-1, 1, 20), L0)
_add("Nguyen-6", "nguyen", 1, "sin(x) + sin(x + x^2)",
     lambda x: np.sin(x[:, 0]) + np.sin(x[:, 0] + x[:, 0] ** 2), _u(-1, 1, 20), L0)
_add("Nguyen-7", "nguyen", 1, "ln(x + 1) + ln(x^2 + 1)",
     lambda x: np.log(x[:, 0] + 1) + np.log(x[:, 0] ** 2 + 1), _u(0, 2, 20), L0)
_add("Nguyen-8", "nguyen", 1, "sqrt(x)", lambda x: np.sqrt(x[:, 0]), _u(0, 4, 20), L0)
_add("Nguyen-9", "nguyen", 2, "sin(x1) + sin(x2^2)",
     lambda x: np.sin(x[:, 0]) + np.sin(x[:, 1] ** 2), _u(0, 1, 20), L0)
_add("Nguyen-10", "nguyen", 2, "2*sin(x1)*cos(x2)",
     lambda x: 2 * np.sin(x[:, 0]) * np.cos(x[:, 1]), _u(0, 1, 20), L0)
_add("Nguyen-11", "nguyen", 2, "x1^x2", lambda x: np.power(x[:, 0], x[:, 1]), _u(0, 1, 20), L0)
_n12 = lambda x: x[:, 0] ** 4 - x[:, 0] ** 3 + 0.5 * x[:, 1] ** 2 - x[:, 1]
_add("Nguyen-12", "nguyen", 2, "x1^4 - x1^3 + 0.5*x2^2 - x2", _n12, _u(0, 1, 20), L0)
_add("Nguyen-12*", "nguyen", 2, "x1^4 - x1^3 + 0.5*x2^2 - x2", _n12, _u(0, 10, 20), L0,
     notes="same expression as Nguyen-12 on the wider domain [0, 10]")

# -- Jin ----------------------------------------------------------------------
JIN_LIB = _lib(L0, minus=(T.LN,), plus=(T.SQUARE, T.CUBE))
_jin_test = _u(-3, 3, 30)
for _name, _expr, _fn in [
    ("Jin-1", "2.5*x1^4 - 1.3*x1^3 + 0.5*x2^2 - 1.7*x2",
     lambda x: 2.5 * x[:, 0] ** 4 - 1.3 * x[:, 0] ** 3 + 0.5 * x[:, 1] ** 2 - 1.7 * x[:, 1]),
    ("Jin-2", "8*x1^2 + 8*x2^3 - 15", lambda x: 8 * x[:, 0] ** 2 + 8 * x[:, 1] ** 3 - 15),
    ("Jin-3", "0.2*x1^3 + 0.5*x2^3 - 1.2*x2 - 0.5*x1",
     lambda x: 0.2 * x[:, 0] ** 3 + 0.5 * x[:, 1] ** 3 - 1.2 * x[:, 1] - 0.5 * x[:, 0]),
    ("Jin-4", "1.5*exp(x1) + 5*cos(x2)", lambda x: 1.5 * np.exp(x[:, 0]) + 5 * np.cos(x[:, 1])),
    ("Jin-5", "6*sin(x1)*cos(x2)", lambda x: 6 * np.sin(x[:, 0]) * np.cos(x[:, 1])),
    ("Jin-6", "1.35*x1*x2 + 5.5*sin((x1 - 1)*(x2 - 1))",
     lambda x: 1.35 * x[:, 0] * x[:, 1] + 5.5 * np.sin((x[:, 0] - 1) * (x[:, 1] - 1))),
]:
    _add(_name, "jin", 2, _expr, _fn, _u(-3, 3, 100), JIN_LIB,
         "L0 - {ln} + {^2, ^3, const}", test=_jin_test)

# -- Neat ---------------------------------------------------------------------
_add("Neat-1", "neat", 1, "x^4 + x^3 + x^2 + x", _poly(1, 1, 1, 1), _u(-1, 1, 20), L0, "L0 + {1}")
_add("Neat-2", "neat", 1, "x^5 + x^4 + x^3 + x^2 + x", _poly(1, 1, 1, 1, 1), _u(-1, 1, 20), L0,
     "L0 + {1}")
_add("Neat-3", "neat", 1, "sin(x^2)*cos(x) - 1",
     lambda x: np.sin(x[:, 0] ** 2) * np.cos(x[:, 0]) - 1, _u(-1, 1, 20), L0, "L0 + {1}")
_add("Neat-4", "neat", 1, "ln(x + 1) + ln(x^2 + 1)",
     lambda x: np.log(x[:, 0] + 1) + np.log(x[:, 0] ** 2 + 1), _u(0, 2, 20), L0, "L0 + {1}")
_add("Neat-5", "neat", 2, "2*sin(x1)*cos(x2)",
     lambda x: 2 * np.sin(x[:, 0]) * np.cos(x[:, 1]), _u(-1, 1, 100), L0)
_add("Neat-6", "neat", 1, "sum_{k=1}^{x} 1/k", lambda x: _harmonic(x[:, 0]), _e(1, 50, 50),
     (T.ONE, T.IDENTITY, T.RECIPROCAL, T.NEG, T.SQRT), "{+, *, /, ^-1, -x, sqrt}",
     test=_e(1, 120, 120))
_add("Neat-7", "neat", 2, "2 - 2.1*cos(9.8*x1)*sin(1.3*x2)",
     lambda x: 2 - 2.1 * np.cos(9.8 * x[:, 0]) * np.sin(1.3 * x[:, 1]), _e(-50, 50, 10**5),
     _lib(L0, plus=(T.TAN, T.TANH, T.SQUARE, T.CUBE, T.SQRT)), "L0 + {tan, tanh, ^2, ^3, sqrt}")
_add("Neat-8", "neat", 2, "exp(-(x1 - 1)^2)/(1.2 + (x2 - 2.5)^2)",
     lambda x: np.exp(-(x[:, 0] - 1) ** 2) / (1.2 + (x[:, 1] - 2.5) ** 2), _u(0.3, 4, 100),
     (T.ONE, T.IDENTITY, T.EXP, T.NEG_EXP, T.SQUARE), "{+, -, *, /, exp, exp(-x), ^2}")
_add("Neat-9", "neat", 2, "1/(1 + x1^-4) + 1/(1 + x2^-4)",
     lambda x: 1 / (1 + x[:, 0] ** -4.0) + 1 / (1 + x[:, 1] ** -4.0), _e(-5, 5, 21), L0)

# -- Livermore ----------------------------------------------------------------
_x0 = lambda x: x[:, 0]
_add("Livermore-1", "livermore", 1, "1/3 + x + sin(x^2)",
     lambda x: 1 / 3 + _x0(x) + np.sin(_x0(x) ** 2), _u(-10, 10, 1000), _lib(L0, minus=(T.EXP,)),
     notes="exp removed from the library: unstable on the wide domain")
_add("Livermore-2", "livermore", 1, "sin(x^2)*cos(x) - 2",
     lambda x: np.sin(_x0(x) ** 2) * np.cos(_x0(x)) - 2, _u(-1, 1, 20), L0)
_add("Livermore-3", "livermore", 1, "sin(x^3)*cos(x^2) - 1",
     lambda x: np.sin(_x0(x) ** 3) * np.cos(_x0(x) ** 2) - 1, _u(-1, 1, 20), L0)
_add("Livermore-4", "livermore", 1, "ln(x + 1) + ln(x^2 + 1) + ln(x)",
     lambda x: np.log(_x0(x) + 1) + np.log(_x0(x) ** 2 + 1) + np.log(_x0(x)), _u(0, 2, 20), L0)
_add("Livermore-5", "livermore", 2, "x1^4 - x1^3 + x1^2 - x2",
     lambda x: x[:, 0] ** 4 - x[:, 0] ** 3 + x[:, 0] ** 2 - x[:, 1], _u(0, 1, 20), L0)
_add("Livermore-6", "livermore", 1, "4*x^4 + 3*x^3 + 2*x^2 + x", _poly(1, 2, 3, 4),
     _u(-1, 1, 20), L0)
_add("Livermore-7", "livermore", 1, "sinh(x)", lambda x: np.sinh(_x0(x)), _u(-1, 1, 20), L0)
_add("Livermore-8", "livermore", 1, "cosh(x)", lambda x: np.cosh(_x0(x)), _u(-1, 1, 20), L0)
_add("Livermore-9", "livermore", 1, "x^9 + x^8 + ... + x", _poly(*[1] * 9), _u(-1, 1, 20), L0)
_add("Livermore-10", "livermore", 2, "6*sin(x1)*cos(x2)",
     lambda x: 6 * np.sin(x[:, 0]) * np.cos(x[:, 1]), _u(0, 1, 20), L0)
_add("Livermore-11", "livermore", 2, "x1^2*x1^2/(x1 + x2)",
     lambda x: x[:, 0] ** 2 * x[:, 0] ** 2 / (x[:, 0] + x[:, 1]), _u(-1, 1, 50), L0,
     notes="printed formula implemented verbatim")
_add("Livermore-12", "livermore", 2, "x1^5/x2^3", lambda x: x[:, 0] ** 5 / x[:, 1] ** 3,
     _u(-1, 1, 50), L0)
_add("Livermore-13", "livermore", 1, "x^(1/3)", lambda x: np.cbrt(_x0(x)), _u(0, 4, 20), L0)
_add("Livermore-14", "livermore", 1, "x^3 + x^2 + x + sin(x) + sin(x^2)",
     lambda x: _poly(1, 1, 1)(x) + np.sin(_x0(x)) + np.sin(_x0(x) ** 2), _u(-1, 1, 20), L0)
_add("Livermore-15", "livermore", 1, "x^(1/5)", lambda x: np.power(_x0(x), 0.2), _u(0, 4, 20), L0)
_add("Livermore-16", "livermore", 1, "x^(2/5)", lambda x: np.power(_x0(x), 0.4), _u(0, 4, 20), L0)
_add("Livermore-17", "livermore", 2, "4*sin(x1)*cos(x2)",
     lambda x: 4 * np.sin(x[:, 0]) * np.cos(x[:, 1]), _u(0, 1, 20), L0)
_add("Livermore-18", "livermore", 1, "sin(x^2)*cos(x) - 5",
     lambda x: np.sin(_x0(x) ** 2) * np.cos(_x0(x)) - 5, _u(-1, 1, 20), L0)
_add("Livermore-19", "livermore", 1, "x^5 + x^4 + x^2 + x", _poly(1, 1, 0, 1, 1),
     _u(-1, 1, 20), L0)
_add("Livermore-20", "livermore", 1, "exp(-x^2)", lambda x: np.exp(-_x0(x) ** 2),
     _u(-1, 1, 20), L0)
_add("Livermore-21", "livermore", 1, "x^8 + x^7 + ... + x", _poly(*[1] * 8), _u(-1, 1, 20), L0)
_add("Livermore-22", "livermore", 1, "exp(-0.5*x^2)", lambda x: np.exp(-0.5 * _x0(x) ** 2),
     _u(-1, 1, 20), L0)

# -- SymSet -------------------------------------------------------------------
_LC = "L0c"
_x1 = lambda x: x[:, 0]
_x2 = lambda x: x[:, 1]
_x3 = lambda x: x[:, 2]
_add("SymSet-1", "symset", 1, "x*sinh(x) - 4/5", lambda x: _x1(x) * np.sinh(_x1(x)) - 0.8,
     _u(-1, 1, 20), _lib(L0, minus=(T.LN,), plus=(T.NEG_EXP,)), "L0c - {ln} + {exp(-x)}")
_add("SymSet-2", "symset", 1, "(x^5 - 3*x^4 - 2.8*x + 5)^-1",
     lambda x: 1 / (_x1(x) ** 5 - 3 * _x1(x) ** 4 - 2.8 * _x1(x) + 5), _u(-1, 1, 20),
     _lib(L0, plus=(T.RECIPROCAL,)), "L0c + {^-1}")
_add("SymSet-3", "symset", 1, "(x^4 - 1.2*x^2 + 11.5)^(1/3)",
     lambda x: np.cbrt(_x1(x) ** 4 - 1.2 * _x1(x) ** 2 + 11.5), _u(-1, 1, 20),
     _lib(L0, plus=(T.SQUARE, T.CUBE)), "L0c + {^2, ^3}")
_add("SymSet-4", "symset", 1, "0.8 - cos(x) + 4.2*exp(x)*sin(x^2)",
     lambda x: 0.8 - np.cos(_x1(x)) + 4.2 * np.exp(_x1(x)) * np.sin(_x1(x) ** 2),
     _u(-3, 3, 20), L0, _LC)
_add("SymSet-5", "symset", 2, "4.5*x1^2 + x1*x2^3 - 1.7*x2 - 3.1",
     lambda x: 4.5 * _x1(x) ** 2 + _x1(x) * _x2(x) ** 3 - 1.7 * _x2(x) - 3.1,
     _u(-1, 1, 20), L0, _LC)
_add("SymSet-6", "symset", 2, "5/(3*x1 - x2^3)", lambda x: 5 / (3 * _x1(x) - _x2(x) ** 3),
     _u(-1, 1, 20), _lib(L0, plus=(T.RECIPROCAL,)), "L0c + {^-1}")
_add("SymSet-7", "symset", 2, "ln(x1^3 + 4*x1*x2)",
     lambda x: np.log(_x1(x) ** 3 + 4 * _x1(x) * _x2(x)), _u(0, 2, 20), L0, _LC)
_add("SymSet-8", "symset", 2, "sqrt(5*x1^5 + 14*x1^3*x2^4 - 2*x2 + 7)",
     lambda x: np.sqrt(5 * _x1(x) ** 5 + 14 * _x1(x) ** 3 * _x2(x) ** 4 - 2 * _x2(x) + 7),
     _u(-1, 1, 20), _lib(L0, plus=(T.SQUARE, T.CUBE)), "L0c + {^2, ^3}",
     notes="points where the radicand is negative are rejected during sampling")
_add("SymSet-9", "symset", 2, "(2*x1 + x2)^(-2/3)",
     lambda x: np.power(2 * _x1(x) + _x2(x), -2.0 / 3.0), _u(0, 2, 20), L0, _LC)
_add("SymSet-10", "symset", 2, "1.5*cos(x1)*ln(x1*x2) - 2.5",
     lambda x: 1.5 * np.cos(_x1(x)) * np.log(_x1(x) * _x2(x)) - 2.5, _u(0, 1, 20), L0, _LC)
_add("SymSet-11", "symset", 2, "sqrt(2*cos(x1) + 30*exp(x2)) + 4",
     lambda x: np.sqrt(2 * np.cos(_x1(x)) + 30 * np.exp(_x2(x))) + 4, _u(-1, 1, 20),
     _lib(L0, plus=(T.SQUARE,)), "L0c + {^2}", m_psi=2)
_add("SymSet-12", "symset", 3, "0.4*x1^4 + 6.2*x2 - 3.5*x1*x3 - 4.5",
     lambda x: 0.4 * _x1(x) ** 4 + 6.2 * _x2(x) - 3.5 * _x1(x) * _x3(x) - 4.5,
     _u(-1, 1, 20), L0, _LC)
_add("SymSet-13", "symset", 3, "2*x2/(x1 + x3)", lambda x: 2 * _x2(x) / (_x1(x) + _x3(x)),
     _u(0, 1, 20), L0, _LC)
_add("SymSet-14", "symset", 3, "x1*x2*x3/(x1 + x2 + x3)",
     lambda x: _x1(x) * _x2(x) * _x3(x) / (_x1(x) + _x2(x) + _x3(x)), _u(0, 2, 20), L0, _LC)
_add("SymSet-15", "symset", 3, "(x1 + x2)^x3", lambda x: np.power(_x1(x) + _x2(x), _x3(x)),
     _u(0, 1, 20), L0, _LC)
_add("SymSet-16", "symset", 3, "exp(2.6*x1 - ln(x2) + 9.8*cos(x3))",
     lambda x: np.exp(2.6 * _x1(x) - np.log(_x2(x)) + 9.8 * np.cos(_x3(x))), _u(0, 1, 20),
     L0, _LC)
_add("SymSet-17", "symset", 3, "ln(0.2*exp(x1 + x2) + 0.5*cos(x3^2))",
     lambda x: np.log(0.2 * np.exp(_x1(x) + _x2(x)) + 0.5 * np.cos(_x3(x) ** 2)),
     _u(0, 1, 20), L0, _LC)


def list_benchmarks(suite: str | None = None) -> list[str]:
    if suite in (None, "all"):
        return list(_REGISTRY)
    if suite not in SUITES:
        raise UnknownBenchmark(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    return [n for n, s in _REGISTRY.items() if s.suite == suite]


def get_benchmark(name: str) -> BenchmarkSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownBenchmark(f"unknown benchmark {name!r}") from None


def library_for(name: str) -> tuple[MappingTable, MappingTable]:
    return get_benchmark(name).tables()


def ground_truth_eval(name: str, x) -> np.ndarray:
    return get_benchmark(name).ground_truth(x)


def make_rng(seed: int, role: str, name: str) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, role, crc32(name))."""
    ss = np.random.SeedSequence([int(seed), ROLE_IDS[role], zlib.crc32(name.encode())])
    return np.random.Generator(np.random.Philox(ss))


def grid_points(s: SamplerSpec, d: int) -> np.ndarray:
    c = s.c if s.c ** d <= MAX_GRID_POINTS else max(2, round(s.c ** (1.0 / d)))
    axis = np.linspace(s.a, s.b, c)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sample_points(spec: BenchmarkSpec, s: SamplerSpec, rng: np.random.Generator) -> np.ndarray:
    if s.kind == "E":
        return grid_points(s, spec.d)
    # U: keep drawing until c points with a finite ground truth are collected
    out = np.empty((0, spec.d))
    for _ in range(1000):
        x = rng.uniform(s.a, s.b, size=(s.c, spec.d))
        out = np.vstack([out, x[np.isfinite(spec.ground_truth(x))]])
        if len(out) >= s.c:
            return out[: s.c]
    raise RuntimeError(f"{spec.name}: could not draw {s.c} points with finite targets")


def sample_dataset(spec: BenchmarkSpec | str, role: str = "train", seed: int = 0) -> Dataset:
    if isinstance(spec, str):
        spec = get_benchmark(spec)
    if role not in ROLE_IDS:
        raise ValueError("role must be 'train' or 'test'")
    s = spec.train if role == "train" else spec.test
    x = sample_points(spec, s, make_rng(seed, role, spec.name))
    y = spec.ground_truth(x)
    keep = np.isfinite(y)
    return Dataset(x[keep], y[keep])


def registry_json(indent: int | None = 2) -> str:
    """The registry as JSON: expression, samplers and libraries per problem."""
    rows = []
    for spec in _REGISTRY.values():
        rows.append({
            "name": spec.name,
            "suite": spec.suite,
            "d": spec.d,
            "expression": spec.expression,
            "train": spec.train.label(),
            "test": spec.test.label(),
            "library": spec.library_label,
            "library_x": [t.value for t in spec.lib_x],
            "library_y": [t.value for t in spec.lib_y],
            "m_psi": spec.m_psi,
            "notes": spec.notes,
        })
    return json.dumps(rows, indent=indent)
