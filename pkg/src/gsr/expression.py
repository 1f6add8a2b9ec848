"""Text form of fitted relations ``sum beta_j psi_j(y) = sum alpha_i phi_i(x)``.

:func:`format_relation` renders a weighted basis set as infix text and
:func:`parse_relation` reads such text back into basis matrices. The parser
uses Python's ``ast`` module; ``^`` is accepted as a power operator and ``x``
as an alias of ``x1`` for one-dimensional problems.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoding import (
    ARG_PRODUCT,
    ARG_SINGLE,
    ARG_SUM,
    CATALOG,
    DONT_CARE,
    BasisPhi,
    BasisPsi,
    MappingTable,
    Transform,
    decode_phi,
    decode_psi,
    join_terms,
    to_infix_string,
)

_CALLS = {
    "cos": Transform.COS, "sin": Transform.SIN, "exp": Transform.EXP, "ln": Transform.LN,
    "log": Transform.LN, "sqrt": Transform.SQRT, "tan": Transform.TAN, "tanh": Transform.TANH,
}
_POWERS = {2: Transform.SQUARE, 3: Transform.CUBE, -1: Transform.RECIPROCAL, 0.5: Transform.SQRT}


class ParseError(ValueError):
    pass


def catalog_table(d: int) -> MappingTable:
    """Table holding every known transform, used for parsed relations."""
    return MappingTable(CATALOG, d=d)


@dataclass(frozen=True)
class Relation:
    """Parsed relation. Coefficients are as printed (not renormalized)."""

    phis: tuple[BasisPhi, ...]
    alpha: np.ndarray
    psis: tuple[BasisPsi, ...]
    beta: np.ndarray
    d: int

    @property
    def w(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta])

    def tables(self) -> tuple[MappingTable, MappingTable]:
        return catalog_table(self.d), catalog_table(1)


# -- formatting ---------------------------------------------------------------

def format_relation(phis: Sequence[BasisPhi], psis: Sequence[BasisPsi], w: np.ndarray,
                    table_x: MappingTable, table_y: MappingTable, digits: int = 5,
                    prune: float = 0.0) -> str:
    """Render ``beta . psi(y) = alpha . phi(x)``; terms with ``|w_i| <= prune * max|w|`` are dropped."""
    w = np.asarray(w, dtype=float)
    n_phi = len(phis)
    cut = prune * np.abs(w).max() if w.size else 0.0
    left = [to_infix_string(decode_psi(m, table_y), c, digits)
            for m, c in zip(psis, w[n_phi:]) if abs(c) > cut and c != 0]
    right = [to_infix_string(decode_phi(m, table_x), c, digits)
             for m, c in zip(phis, w[:n_phi]) if abs(c) > cut and c != 0]
    return f"{join_terms(left)} = {join_terms(right)}"


# -- parsing ------------------------------------------------------------------

def _num(node) -> float | None:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _num(node.operand)
        if v is not None:
            return -v if isinstance(node.op, ast.USub) else v
    return None


class _TermParser:
    def __init__(self, d: int):
        self.d = d

    def var(self, node) -> int | None:
        if not isinstance(node, ast.Name):
            return None
        if node.id == "x" and self.d == 1:
            return 1
        if node.id.startswith("x") and node.id[1:].isdigit():
            v = int(node.id[1:])
            if not 1 <= v <= self.d:
                raise ParseError(f"variable {node.id} outside 1..{self.d}")
            return v
        return None

    def argument(self, node) -> tuple[int, tuple[int, ...]]:
        """(arg_type, variables) of a variable, a sum of variables or a product of variables."""
        v = self.var(node)
        if v is not None:
            return ARG_SINGLE, (v,)
        for op, kind in ((ast.Add, ARG_SUM), (ast.Mult, ARG_PRODUCT)):
            if isinstance(node, ast.BinOp) and isinstance(node.op, op):
                vs = self._chain(node, op)
                if vs is not None:
                    return kind, tuple(vs)
        raise ParseError(f"argument {ast.unparse(node)!r} is not a variable, sum or product of variables")

    def _chain(self, node, op) -> list[int] | None:
        if isinstance(node, ast.BinOp) and isinstance(node.op, op):
            a, b = self._chain(node.left, op), self._chain(node.right, op)
            return None if a is None or b is None else a + b
        v = self.var(node)
        return None if v is None else [v]

    def term(self, node) -> tuple[float, list[tuple[Transform, int, tuple[int, ...]]]]:
        """Split a product into a numeric coefficient and transform factors."""
        n = _num(node)
        if n is not None:
            return n, []
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            c, f = self.term(node.operand)
            return (-c if isinstance(node.op, ast.USub) else c), f
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
            arg = self._chain(node, ast.Mult)
            if arg is not None:
                return 1.0, [(Transform.IDENTITY, ARG_PRODUCT if len(arg) > 1 else ARG_SINGLE,
                              tuple(arg))]
            c1, f1 = self.term(node.left)
            c2, f2 = self.term(node.right)
            return c1 * c2, f1 + f2
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div):
            den = _num(node.right)
            if den is None or den == 0:
                raise ParseError("division is only supported by nonzero numeric constants")
            c, f = self.term(node.left)
            return c / den, f
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
            kind, vs = self.argument(node)
            return 1.0, [(Transform.IDENTITY, kind, vs)]
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            return self.power(node)
        if isinstance(node, ast.Call):
            return 1.0, [self.call(node)]
        v = self.var(node)
        if v is not None:
            return 1.0, [(Transform.IDENTITY, ARG_SINGLE, (v,))]
        raise ParseError(f"cannot encode {ast.unparse(node)!r}")

    def call(self, node):
        if not isinstance(node.func, ast.Name) or node.func.id not in _CALLS or len(node.args) != 1:
            raise ParseError(f"unsupported function call {ast.unparse(node)!r}")
        t = _CALLS[node.func.id]
        arg = node.args[0]
        if t is Transform.EXP and isinstance(arg, ast.UnaryOp) and isinstance(arg.op, ast.USub):
            return (Transform.NEG_EXP,) + self.argument(arg.operand)
        return (t,) + self.argument(arg)

    def power(self, node):
        e = _num(node.right)
        if e is None:
            raise ParseError(f"exponent of {ast.unparse(node)!r} must be a number")
        base = node.left
        try:
            kind, vs = self.argument(base)
        except ParseError:
            kind = None
        if kind is not None and e in _POWERS:
            return 1.0, [(_POWERS[e], kind, vs)]
        if e == int(e) and e >= 1:
            c, f = self.term(base)
            return c ** int(e), f * int(e)
        raise ParseError(f"cannot encode power {ast.unparse(node)!r}")


def _phi_from_factors(factors) -> BasisPhi:
    if not factors:
        return BasisPhi([[0, DONT_CARE, DONT_CARE, DONT_CARE]])
    n_v = max(2, max(len(vs) for _, _, vs in factors))
    rows = []
    for t, kind, vs in factors:
        code = CATALOG.index(t)
        if kind == ARG_SINGLE:
            rows.append([code, ARG_SINGLE, vs[0]] + [DONT_CARE] * (n_v - 1))
        else:
            rows.append([code, kind] + list(vs) + [0] * (n_v - len(vs)))
    return BasisPhi(rows)


def _split_terms(node) -> list:
    """Top-level additive terms; subtraction becomes a negated term."""
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
        return _split_terms(node.left) + _split_terms(node.right)
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Sub):
        return _split_terms(node.left) + [ast.UnaryOp(ast.USub(), node.right)]
    return [node]


def _has_y(node) -> bool:
    return any(isinstance(n, ast.Name) and n.id == "y" for n in ast.walk(node))


def _psi_factor(node) -> list[Transform]:
    if isinstance(node, ast.Name) and node.id == "y":
        return [Transform.IDENTITY]
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1:
        arg = node.args[0]
        if node.func.id == "exp" and isinstance(arg, ast.UnaryOp) and isinstance(arg.op, ast.USub) \
                and isinstance(arg.operand, ast.Name) and arg.operand.id == "y":
            return [Transform.NEG_EXP]
        if node.func.id in _CALLS and isinstance(arg, ast.Name) and arg.id == "y":
            return [_CALLS[node.func.id]]
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        e = _num(node.right)
        if isinstance(node.left, ast.Name) and node.left.id == "y" and e in _POWERS:
            return [_POWERS[e]]
        if e is not None and e == int(e) and e >= 1:
            return _psi_factor(node.left) * int(e)
    raise ParseError(f"cannot encode target factor {ast.unparse(node)!r}")


def _psi_term(node) -> tuple[float, list[Transform]]:
    n = _num(node)
    if n is not None:
        return n, []
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        c, f = _psi_term(node.operand)
        return (-c if isinstance(node.op, ast.USub) else c), f
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        c1, f1 = _psi_term(node.left)
        c2, f2 = _psi_term(node.right)
        return c1 * c2, f1 + f2
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div) and _num(node.right):
        c, f = _psi_term(node.left)
        return c / _num(node.right), f
    return 1.0, _psi_factor(node)


def parse_relation(text: str, d: int) -> Relation:
    """Parse ``lhs = rhs`` where the left side is in ``y`` and the right side in ``x1..xd``.

    Constant terms on the left move to the right as ``One`` bases.
    """
    if text.count("=") != 1:
        raise ParseError("expected exactly one '=' in the relation")
    lhs_text, rhs_text = (s.strip() for s in text.replace("^", "**").split("="))
    if not lhs_text or not rhs_text:
        raise ParseError("both sides of the relation must be non-empty")
    try:
        lhs = ast.parse(lhs_text, mode="eval").body
        rhs = ast.parse(rhs_text, mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"malformed expression: {exc.msg}") from None
    tp = _TermParser(d)
    phis, alpha, psis, beta = [], [], [], []
    for node in _split_terms(lhs):
        c, fs = _psi_term(node)
        if fs:
            psis.append(BasisPsi([CATALOG.index(t) for t in fs]))
            beta.append(c)
        elif c != 0:
            phis.append(_phi_from_factors([]))
            alpha.append(-c)
    for node in _split_terms(rhs):
        if _has_y(node):
            raise ParseError("the target y may only appear on the left-hand side")
        c, fs = tp.term(node)
        if c != 0:
            phis.append(_phi_from_factors(fs))
            alpha.append(c)
    if not psis:
        raise ParseError("the left-hand side has no target term")
    return Relation(tuple(phis), np.array(alpha, dtype=float), tuple(psis),
                    np.array(beta, dtype=float), d)
