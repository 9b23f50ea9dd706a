"""Exact rational arithmetic and small integer-linear-algebra helpers.

Everything downstream (polytopes, piecewise-linear functions, the simplex
solver) computes over arbitrary-precision rationals.  gmpy2's ``mpq`` is used
when available (it is an order of magnitude faster); ``fractions.Fraction``
is a drop-in fallback.
"""

from __future__ import annotations

import re
from math import gcd
from typing import Iterable, Sequence

try:
    from gmpy2 import mpq as Rat  # type: ignore[import-untyped]

    GMPY2 = True
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as Rat  # type: ignore[assignment]

    GMPY2 = False

ZERO = Rat(0)
ONE = Rat(1)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/[1-9]\d*)?$")


def parse_rational(text: str) -> Rat:
    """Parse "p/q" or "p" (integers only).  Decimal notation is rejected.

    Raises ValueError on anything else; exactness of prices and coordinates
    depends on never silently converting through floats.
    """
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not an exact rational (use p/q or an integer): {text!r}")
    return Rat(text)


def rat_str(value) -> str:
    """Serialize a rational as "p/q", or "p" when the denominator is 1."""
    return str(Rat(value))


def as_int(value) -> int:
    """Convert an integral rational to int; raises if it is not integral."""
    q = Rat(value)
    if q.denominator != 1:
        raise ValueError(f"not an integer: {q}")
    return int(q.numerator)


def dot(u: Sequence, v: Sequence):
    """Exact inner product; accepts mixed int/rational sequences."""
    total = ZERO
    for a, b in zip(u, v):
        total += a * b
    return total


def vec_content(values: Iterable[int]) -> int:
    """gcd of the absolute values (0 for the all-zero vector)."""
    g = 0
    for v in values:
        g = gcd(g, abs(int(v)))
    return g


def integerize(values: Sequence) -> tuple[int, ...]:
    """Scale a rational vector by a positive factor to a content-1 int vector.

    The zero vector maps to itself.
    """
    rats = [Rat(v) for v in values]
    lcm = 1
    for r in rats:
        d = int(r.denominator)
        lcm = lcm // gcd(lcm, d) * d
    ints = [int(r.numerator) * (lcm // int(r.denominator)) for r in rats]
    g = vec_content(ints)
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


# ---------------------------------------------------------------------------
# Dense exact linear algebra (small systems only).


def mat_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a matrix of rationals/ints via fraction-free elimination."""
    m = [[Rat(x) for x in row] for row in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, nrows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col]
        for r in range(row + 1, nrows):
            if m[r][col] != 0:
                factor = m[r][col] / inv
                for c in range(col, ncols):
                    m[r][c] -= factor * m[row][c]
        rank += 1
        row += 1
        if row == nrows:
            break
    return rank


def rref(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; returns (matrix, pivot column indices)."""
    m = [[Rat(x) for x in row] for row in rows]
    pivots: list[int] = []
    if not m:
        return m, pivots
    nrows, ncols = len(m), len(m[0])
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, nrows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col]
        m[row] = [x / inv for x in m[row]]
        for r in range(nrows):
            if r != row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
        if row == nrows:
            break
    return m, pivots


def nullspace(rows: Sequence[Sequence]) -> list[tuple]:
    """Basis of the right null space {x : rows @ x = 0} as rational tuples."""
    if not rows:
        return []
    ncols = len(rows[0])
    reduced, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [ZERO] * ncols
        vec[f] = ONE
        for r, p in enumerate(pivots):
            vec[p] = -reduced[r][f]
        basis.append(tuple(vec))
    return basis


def det(rows: Sequence[Sequence]):
    """Exact determinant of a square rational matrix."""
    n = len(rows)
    m = [[Rat(x) for x in row] for row in rows]
    result = ONE
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return ZERO
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            result = -result
        result *= m[col][col]
        inv = m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                factor = m[r][col] / inv
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return result
