"""Integer-matrix encoding of basis functions.

A phi basis matrix has one row per multiplied transformation. Each row holds
``[transform, arg_type, v_1, ..., v_nv]``: the transform code indexes a
:class:`MappingTable`, ``arg_type`` selects a single variable (0), a sum (1)
or a product (2) of the listed variables, and each ``v_i`` is 0 (skip) or a
1-based feature index. A psi basis matrix is a column of transform codes
applied to the scalar target.

Entries that are never read (the tail of a single-variable row, everything
after a ``One`` transform) are stored as :data:`DONT_CARE`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DONT_CARE = -1

ARG_SINGLE = 0
ARG_SUM = 1
ARG_PRODUCT = 2

N_ROWS_CHOICES = (1, 2, 3)
N_VARS_RANGE = (2, 5)


class EncodingError(ValueError):
    """Raised for structurally malformed basis matrices."""


class Transform(enum.Enum):
    ONE = "one"
    IDENTITY = "identity"
    RECIPROCAL = "reciprocal"
    SQUARE = "square"
    CUBE = "cube"
    COS = "cos"
    SIN = "sin"
    EXP = "exp"
    LN = "ln"
    SQRT = "sqrt"
    NEG_EXP = "negexp"
    NEG = "neg"
    TAN = "tan"
    TANH = "tanh"

    def __call__(self, a):
        """Apply the transform elementwise. Out-of-domain inputs give nan/inf."""
        a = np.asarray(a, dtype=float)
        with np.errstate(all="ignore"):
            return _FUNCS[self](a)

    def render(self, arg: str) -> str:
        """Infix text of this transform applied to an already-rendered argument."""
        return _RENDER[self].format(a=arg)


_FUNCS = {
    Transform.ONE: lambda a: np.ones_like(a),
    Transform.IDENTITY: lambda a: a.copy(),
    Transform.RECIPROCAL: lambda a: 1.0 / a,
    Transform.SQUARE: lambda a: a * a,
    Transform.CUBE: lambda a: a * a * a,
    Transform.COS: np.cos,
    Transform.SIN: np.sin,
    Transform.EXP: np.exp,
    Transform.LN: np.log,
    Transform.SQRT: np.sqrt,
    Transform.NEG_EXP: lambda a: np.exp(-a),
    Transform.NEG: np.negative,
    Transform.TAN: np.tan,
    Transform.TANH: np.tanh,
}

# Rendered forms must stay parseable by expression.parse_relation and sympy.
_RENDER = {
    Transform.ONE: "1",
    Transform.IDENTITY: "{a}",
    Transform.RECIPROCAL: "({a})**-1",
    Transform.SQUARE: "({a})**2",
    Transform.CUBE: "({a})**3",
    Transform.COS: "cos({a})",
    Transform.SIN: "sin({a})",
    Transform.EXP: "exp({a})",
    Transform.LN: "ln({a})",
    Transform.SQRT: "sqrt({a})",
    Transform.NEG_EXP: "exp(-({a}))",
    Transform.NEG: "(-({a}))",
    Transform.TAN: "tan({a})",
    Transform.TANH: "tanh({a})",
}

# Declaration order used to assign codes; One/Identity are always 0/1.
CATALOG = tuple(Transform)

POLY_TRANSFORMS = frozenset(
    {Transform.ONE, Transform.IDENTITY, Transform.SQUARE, Transform.CUBE,
     Transform.RECIPROCAL, Transform.SQRT}
)
TRIG_TRANSFORMS = POLY_TRANSFORMS | {Transform.COS, Transform.SIN}


@dataclass(frozen=True)
class MappingTable:
    """Assignment of integer codes to transforms for one benchmark side.

    ``allowed`` restricts random generation to a subset of codes (a
    sublibrary) without renumbering, so matrices drawn from a sublibrary decode
    identically under the full table.
    """

    transforms: tuple[Transform, ...]
    d: int = 1
    n_v_range: tuple[int, int] = N_VARS_RANGE
    allowed: frozenset[int] | None = None

    def __post_init__(self):
        if len(self.transforms) < 2 or self.transforms[:2] != (Transform.ONE, Transform.IDENTITY):
            raise EncodingError("codes 0 and 1 must be One and Identity")
        if len(set(self.transforms)) != len(self.transforms):
            raise EncodingError("duplicate transforms in mapping table")
        if self.d < 1:
            raise EncodingError("feature dimension must be positive")
        lo, hi = self.n_v_range
        if not 1 <= lo <= hi:
            raise EncodingError(f"bad n_v range {self.n_v_range}")
        if self.allowed is not None:
            if not self.allowed or not all(0 <= c < len(self.transforms) for c in self.allowed):
                raise EncodingError("allowed codes must be a non-empty subset of the table")

    @classmethod
    def from_transforms(cls, members: Iterable[Transform], d: int = 1, **kw) -> "MappingTable":
        """Build a table holding ``members`` in catalog order (One/Identity forced in)."""
        wanted = set(members) | {Transform.ONE, Transform.IDENTITY}
        return cls(tuple(t for t in CATALOG if t in wanted), d=d, **kw)

    def __len__(self) -> int:
        return len(self.transforms)

    def code(self, t: Transform) -> int:
        return self.transforms.index(t)

    def __contains__(self, t: Transform) -> bool:
        return t in self.transforms

    @property
    def allowed_codes(self) -> tuple[int, ...]:
        if self.allowed is None:
            return tuple(range(len(self.transforms)))
        return tuple(sorted(self.allowed))

    @property
    def allowed_transforms(self) -> tuple[Transform, ...]:
        return tuple(self.transforms[c] for c in self.allowed_codes)

    def restrict(self, members: Iterable[Transform]) -> "MappingTable":
        """Sub-table allowing only ``members`` (those absent from the table are ignored)."""
        members = set(members)
        codes = frozenset(i for i, t in enumerate(self.transforms) if t in members)
        if not codes:
            raise EncodingError("restriction leaves no transforms")
        return MappingTable(self.transforms, self.d, self.n_v_range, codes)

    def full(self) -> "MappingTable":
        return MappingTable(self.transforms, self.d, self.n_v_range, None)

    def with_d(self, d: int) -> "MappingTable":
        return MappingTable(self.transforms, d, self.n_v_range, self.allowed)


NGUYEN_TABLE = MappingTable.from_transforms(
    [Transform.COS, Transform.SIN, Transform.EXP, Transform.LN], d=3
)
EXTENDED_TABLE = MappingTable.from_transforms(
    [Transform.RECIPROCAL, Transform.SQUARE, Transform.CUBE, Transform.COS,
     Transform.SIN, Transform.EXP, Transform.LN, Transform.SQRT],
    d=3,
)


def _canonical_row(row: Sequence[int]) -> tuple[int, ...]:
    """Replace don't-care entries by DONT_CARE so equal functions compare equal."""
    row = tuple(int(v) for v in row)
    if row[0] == 0:
        return (0,) + (DONT_CARE,) * (len(row) - 1)
    if row[1] == ARG_SINGLE:
        return row[:3] + (DONT_CARE,) * (len(row) - 3)
    if row[1] in (ARG_SUM, ARG_PRODUCT):
        # an unused variable slot may be written as don't-care; it reads as skip
        return row[:2] + tuple(0 if v == DONT_CARE else v for v in row[2:])
    return row


@dataclass(frozen=True)
class BasisPhi:
    """Encoded feature-side basis function, ``n_B x (n_v + 2)`` integers."""

    rows: tuple[tuple[int, ...], ...]
    _key: tuple = field(init=False, repr=False, compare=False)

    def __init__(self, rows):
        rows = tuple(tuple(int(v) for v in r) for r in np.atleast_2d(np.asarray(rows, dtype=int)))
        if not rows or len(rows[0]) < 3 or any(len(r) != len(rows[0]) for r in rows):
            raise EncodingError("phi matrix needs >= 1 row and >= 3 equal-length columns")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_key", tuple(_canonical_row(r) for r in rows))

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_v(self) -> int:
        return len(self.rows[0]) - 2

    @property
    def key(self) -> tuple:
        """Canonical form (don't-care entries blanked); use for caching."""
        return self._key

    def to_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=int)

    def is_constant(self) -> bool:
        return all(r[0] == 0 for r in self.rows)


@dataclass(frozen=True)
class BasisPsi:
    """Encoded target-side basis function, a column of transform codes."""

    codes: tuple[int, ...]

    def __init__(self, codes):
        codes = tuple(int(c) for c in np.ravel(np.asarray(codes, dtype=int)))
        if not codes:
            raise EncodingError("psi matrix needs at least one row")
        object.__setattr__(self, "codes", codes)

    @property
    def key(self) -> tuple:
        return self.codes

    @property
    def n_rows(self) -> int:
        return len(self.codes)

    def to_array(self) -> np.ndarray:
        return np.array(self.codes, dtype=int).reshape(-1, 1)

    def is_constant(self) -> bool:
        return all(c == 0 for c in self.codes)


# -- validation ---------------------------------------------------------------

def validate_phi(m: BasisPhi, table: MappingTable) -> str | None:
    """Return ``None`` if ``m`` is a valid phi matrix under ``table``, else a reason.

    Dimension problems (variable codes that cannot belong to ``table.d``) are
    structural and raise :class:`EncodingError` instead.
    """
    n_t = len(table.transforms)
    for r, row in enumerate(m.rows):
        t, arg, vars_ = row[0], row[1], row[2:]
        if not 0 <= t < n_t:
            return f"row {r}: transform code {t} outside table of size {n_t}"
        if t == 0:
            continue
        if arg == ARG_SINGLE:
            v = vars_[0]
            if v > table.d:
                raise EncodingError(f"row {r}: variable {v} exceeds d={table.d}")
            if not 1 <= v:
                return f"row {r}: single-variable argument needs a variable in 1..{table.d}, got {v}"
            continue
        if arg not in (ARG_SUM, ARG_PRODUCT):
            return f"row {r}: argument type {arg} not in {{0, 1, 2}}"
        if any(v > table.d for v in vars_):
            raise EncodingError(f"row {r}: variable code exceeds d={table.d}")
        if any(v < DONT_CARE for v in vars_):
            return f"row {r}: negative variable code in a sum/product argument"
        if not any(v > 0 for v in vars_):
            return f"row {r}: sum/product argument with every variable skipped"
    return None


def validate_psi(m: BasisPsi, table: MappingTable) -> str | None:
    n_t = len(table.transforms)
    for r, c in enumerate(m.codes):
        if not 0 <= c < n_t:
            return f"row {r}: transform code {c} outside table of size {n_t}"
    return None


# -- decoding -----------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """One decoded row: ``transform`` applied to an argument over ``variables``.

    ``variables`` are 1-based feature indices with skips removed. ``arg_type``
    is meaningless for ``One``.
    """

    transform: Transform
    arg_type: int
    variables: tuple[int, ...]

    def argument(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the argument on ``x`` of shape (N, d)."""
        if self.arg_type == ARG_SINGLE:
            return x[:, self.variables[0] - 1]
        cols = [x[:, v - 1] for v in self.variables]
        if self.arg_type == ARG_SUM:
            return np.sum(cols, axis=0) if cols else np.zeros(len(x))
        return np.prod(cols, axis=0) if cols else np.ones(len(x))

    def render_argument(self) -> str:
        names = [f"x{v}" for v in self.variables]
        if self.arg_type == ARG_SINGLE:
            return names[0]
        if self.arg_type == ARG_SUM:
            return " + ".join(names) if len(names) > 1 else names[0]
        return "*".join(names)

    def render(self) -> str:
        t = self.transform
        if t is Transform.ONE:
            return "1"
        arg = self.render_argument()
        if t is Transform.IDENTITY:
            # sums need parentheses once multiplied by neighbours
            if self.arg_type == ARG_SUM and len(self.variables) > 1:
                return f"({arg})"
            return arg
        return t.render(arg)


def decode_phi(m: BasisPhi, table: MappingTable) -> list[Factor]:
    """Decode a valid phi matrix into its ordered list of factors."""
    reason = validate_phi(m, table)
    if reason is not None:
        raise EncodingError(reason)
    out = []
    for row in m.rows:
        t = table.transforms[row[0]]
        if t is Transform.ONE:
            out.append(Factor(t, ARG_SINGLE, ()))
        elif row[1] == ARG_SINGLE:
            out.append(Factor(t, ARG_SINGLE, (row[2],)))
        else:
            out.append(Factor(t, row[1], tuple(v for v in row[2:] if v > 0)))
    return out


def decode_psi(m: BasisPsi, table: MappingTable) -> list[Transform]:
    reason = validate_psi(m, table)
    if reason is not None:
        raise EncodingError(reason)
    return [table.transforms[c] for c in m.codes]


# -- random generation --------------------------------------------------------

def random_phi(table: MappingTable, rng: np.random.Generator) -> BasisPhi:
    """Draw a random valid phi matrix from the (sub)table's allowed transforms."""
    codes = table.allowed_codes
    n_rows = N_ROWS_CHOICES[rng.integers(len(N_ROWS_CHOICES))]
    lo, hi = table.n_v_range
    n_v = int(rng.integers(lo, hi + 1))
    d = table.d
    rows = []
    for _ in range(n_rows):
        t = codes[rng.integers(len(codes))]
        if t == 0:
            rows.append([0] + [DONT_CARE] * (n_v + 1))
            continue
        arg = int(rng.integers(3))
        if arg == ARG_SINGLE:
            rows.append([t, arg, int(rng.integers(1, d + 1))] + [DONT_CARE] * (n_v - 1))
            continue
        while True:
            vars_ = rng.integers(0, d + 1, size=n_v)
            if vars_.any():
                break
        rows.append([t, arg] + vars_.tolist())
    return BasisPhi(rows)


def random_psi(table: MappingTable, rng: np.random.Generator, allow_one: bool = False) -> BasisPsi:
    """Draw a single-row psi matrix. ``One`` is excluded unless ``allow_one``."""
    codes = table.allowed_codes
    if not allow_one:
        codes = tuple(c for c in codes if c != 0)
        if not codes:
            codes = (1,)
    return BasisPsi([codes[rng.integers(len(codes))]])


def constant_phi(n_v: int = 2) -> BasisPhi:
    return BasisPhi([[0] + [DONT_CARE] * (n_v + 1)])


# -- text ---------------------------------------------------------------------

def format_coefficient(c: float, digits: int = 5) -> str:
    return f"{c:.{digits}g}"


def to_infix_string(factors: Sequence[Factor] | Sequence[Transform], coefficient: float,
                    digits: int = 5, target: str = "y") -> str:
    """Render ``coefficient * product(factors)`` as infix text.

    ``factors`` may be phi factors or psi transforms (applied to ``target``).
    Rows equal to ``One`` are dropped unless every row is ``One``.
    """
    parts = []
    for f in factors:
        if isinstance(f, Transform):
            if f is not Transform.ONE:
                parts.append(f.render(target))
        elif f.transform is not Transform.ONE:
            parts.append(f.render())
    body = "*".join(parts) if parts else "1"
    return f"{format_coefficient(coefficient, digits)}*{body}"


def join_terms(terms: Sequence[str]) -> str:
    """Join signed term strings as ``a + b - c``."""
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


def format_phi_matrix(m: BasisPhi, d: int) -> str:
    """Text serialization: header ``phi n_B n_v d`` then one row per line."""
    m_rows = [list(r) for r in m.key]
    lines = [f"phi {m.n_rows} {m.n_v} {d}"]
    lines += [" ".join(str(v) for v in r) for r in m_rows]
    return "\n".join(lines)


def format_psi_matrix(m: BasisPsi) -> str:
    return "\n".join([f"psi {m.n_rows}"] + [str(c) for c in m.codes])


def parse_matrix(text: str) -> tuple[BasisPhi | BasisPsi, int | None]:
    """Inverse of :func:`format_phi_matrix` / :func:`format_psi_matrix`.

    Returns the matrix and ``d`` (``None`` for psi).
    """
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise EncodingError("empty matrix text")
    head = lines[0]
    try:
        if head[0] == "phi":
            n_b, n_v, d = (int(v) for v in head[1:4])
            rows = [[int(v) for v in ln] for ln in lines[1:]]
            if len(rows) != n_b or any(len(r) != n_v + 2 for r in rows):
                raise EncodingError("phi body does not match header")
            return BasisPhi(rows), d
        if head[0] == "psi":
            n_b = int(head[1])
            codes = [int(ln[0]) for ln in lines[1:]]
            if len(codes) != n_b or any(len(ln) != 1 for ln in lines[1:]):
                raise EncodingError("psi body does not match header")
            return BasisPsi(codes), None
    except (IndexError, ValueError) as exc:
        raise EncodingError(f"malformed matrix text: {exc}") from exc
    raise EncodingError(f"unknown matrix header {head[0]!r}")
