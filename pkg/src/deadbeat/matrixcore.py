"""Exact rational dense linear algebra.

Matrices are stored as an integer numerator grid over one positive common
denominator kept in lowest terms.  Products and sums then run on Python ints,
which keeps the structural checks (nilpotency, characteristic polynomials,
rank-one powers) exact and fast enough for the small systems handled here.
Floating point only enters through :func:`to_real`.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from numbers import Rational
from operator import mul
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DimensionMismatch",
    "Polynomial",
    "RationalMatrix",
    "as_fraction",
    "charpoly",
    "format_matrix",
    "inverse",
    "kron",
    "matpow",
    "nilpotency_index",
    "nullspace_basis",
    "parse_matrix",
    "random_fraction",
    "random_nonsingular_matrix",
    "random_rational_matrix",
    "rank",
    "rref",
    "solve",
    "to_real",
]


class DimensionMismatch(ValueError):
    pass


def as_fraction(value) -> Fraction:
    """Convert ``value`` to an exact :class:`Fraction`.

    Strings may be ``"p/q"``, ``"p"`` or a decimal literal such as ``"0.4"``
    (read exactly as 2/5).  Floats go through their shortest decimal repr so
    that ``0.4`` also means 2/5 rather than the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite entry {value!r}")
        return Fraction(repr(float(value)))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, np.floating):
        return as_fraction(float(value))
    raise TypeError(f"cannot read {value!r} as a rational number")


def _reduce(num: list[list[int]], den: int) -> tuple[tuple[tuple[int, ...], ...], int]:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if den < 0:
        num = [[-v for v in row] for row in num]
        den = -den
    g = den
    for row in num:
        for v in row:
            if v:
                g = math.gcd(g, v)
                if g == 1:
                    break
        if g == 1:
            break
    if g != 1:
        num = [[v // g for v in row] for row in num]
        den //= g
    return tuple(tuple(row) for row in num), den


class RationalMatrix:
    """Immutable dense matrix with exact rational entries.

    >>> m = RationalMatrix([["1/2", 0], [0, "0.4"]])
    >>> m[1, 1]
    Fraction(2, 5)
    >>> (m @ m)[0, 0]
    Fraction(1, 4)
    """

    __slots__ = ("rows", "cols", "_num", "_den", "_hash")

    def __init__(self, entries: Iterable[Iterable] = (), *, cols: int | None = None):
        data = [[as_fraction(v) for v in row] for row in entries]
        rows = len(data)
        if rows:
            width = len(data[0])
            if any(len(r) != width for r in data):
                raise DimensionMismatch("ragged rows")
            if cols is not None and cols != width:
                raise DimensionMismatch(f"expected {cols} columns, got {width}")
        else:
            width = cols or 0
        den = 1
        for row in data:
            for v in row:
                den = den * v.denominator // math.gcd(den, v.denominator)
        num = [[v.numerator * (den // v.denominator) for v in row] for row in data]
        self._set(rows, width, num, den)

    def _set(self, rows: int, cols: int, num, den: int) -> None:
        self.rows = rows
        self.cols = cols
        self._num, self._den = _reduce(num, den)
        self._hash = None

    @classmethod
    def _raw(cls, rows: int, cols: int, num, den: int = 1) -> "RationalMatrix":
        obj = cls.__new__(cls)
        obj._set(rows, cols, num, den)
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls._raw(n, n, [[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls._raw(rows, cols, [[0] * cols for _ in range(rows)])

    @classmethod
    def ones(cls, rows: int, cols: int = 1) -> "RationalMatrix":
        return cls._raw(rows, cols, [[1] * cols for _ in range(rows)])

    @classmethod
    def column(cls, values: Iterable) -> "RationalMatrix":
        return cls([[v] for v in values], cols=1)

    @classmethod
    def row_vector(cls, values: Iterable) -> "RationalMatrix":
        vals = list(values)
        return cls([vals], cols=len(vals))

    @classmethod
    def hstack(cls, *blocks: "RationalMatrix") -> "RationalMatrix":
        blocks = tuple(b for b in blocks)
        if not blocks:
            raise ValueError("nothing to stack")
        rows = blocks[0].rows
        if any(b.rows != rows for b in blocks):
            raise DimensionMismatch("hstack needs equal row counts")
        den = math.lcm(*(b._den for b in blocks))
        num = [[] for _ in range(rows)]
        for b in blocks:
            f = den // b._den
            for i in range(rows):
                num[i].extend(v * f for v in b._num[i])
        return cls._raw(rows, sum(b.cols for b in blocks), num, den)

    @classmethod
    def vstack(cls, *blocks: "RationalMatrix") -> "RationalMatrix":
        if not blocks:
            raise ValueError("nothing to stack")
        cols = blocks[0].cols
        if any(b.cols != cols for b in blocks):
            raise DimensionMismatch("vstack needs equal column counts")
        den = math.lcm(*(b._den for b in blocks))
        num = []
        for b in blocks:
            f = den // b._den
            num.extend([v * f for v in row] for row in b._num)
        return cls._raw(sum(b.rows for b in blocks), cols, num, den)

    @classmethod
    def block_diag(cls, *blocks: "RationalMatrix") -> "RationalMatrix":
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        den = math.lcm(1, *(b._den for b in blocks))
        num = [[0] * cols for _ in range(rows)]
        r0 = c0 = 0
        for b in blocks:
            f = den // b._den
            for i in range(b.rows):
                for j in range(b.cols):
                    num[r0 + i][c0 + j] = b._num[i][j] * f
            r0 += b.rows
            c0 += b.cols
        return cls._raw(rows, cols, num, den)

    # -- access -----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, idx) -> Fraction:
        i, j = idx
        return Fraction(self._num[i][j], self._den)

    def entries(self) -> tuple[Fraction, ...]:
        """All entries in row-major order."""
        return tuple(Fraction(v, self._den) for row in self._num for v in row)

    def tolist(self) -> list[list[Fraction]]:
        return [[Fraction(v, self._den) for v in row] for row in self._num]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self._den) for v in self._num[i])

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(Fraction(row[j], self._den) for row in self._num)

    def submatrix(self, rows: Sequence[int] | range, cols: Sequence[int] | range) -> "RationalMatrix":
        return RationalMatrix._raw(
            len(rows), len(cols), [[self._num[i][j] for j in cols] for i in rows], self._den
        )

    def columns(self, cols: Sequence[int] | range) -> "RationalMatrix":
        return self.submatrix(range(self.rows), cols)

    def block(self, i: int, j: int, height: int, width: int) -> "RationalMatrix":
        return self.submatrix(range(i * height, (i + 1) * height), range(j * width, (j + 1) * width))

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix._raw(
            self.cols, self.rows, [list(c) for c in zip(*self._num)] if self.rows else
            [[] for _ in range(self.cols)], self._den
        )

    def is_zero(self) -> bool:
        return all(v == 0 for row in self._num for v in row)

    def trace(self) -> Fraction:
        if not self.is_square:
            raise DimensionMismatch("trace of a non-square matrix")
        return Fraction(sum(self._num[i][i] for i in range(self.rows)), self._den)

    # -- arithmetic -------------------------------------------------------

    def _check_same(self, other: "RationalMatrix") -> None:
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        self._check_same(other)
        den = math.lcm(self._den, other._den)
        fa, fb = den // self._den, den // other._den
        num = [[a * fa + b * fb for a, b in zip(ra, rb)] for ra, rb in zip(self._num, other._num)]
        return RationalMatrix._raw(self.rows, self.cols, num, den)

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix._raw(self.rows, self.cols, [[-v for v in r] for r in self._num], self._den)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar) -> "RationalMatrix":
        if isinstance(scalar, RationalMatrix):
            return NotImplemented
        s = as_fraction(scalar)
        return RationalMatrix._raw(
            self.rows, self.cols, [[v * s.numerator for v in r] for r in self._num],
            self._den * s.denominator,
        )

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "RationalMatrix":
        return self * (1 / as_fraction(scalar))

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols_b = list(zip(*other._num)) if other.rows else [()] * other.cols
        num = [[sum(map(mul, row, col)) for col in cols_b] for row in self._num]
        return RationalMatrix._raw(self.rows, other.cols, num, self._den * other._den)

    def apply(self, vec: Sequence) -> tuple[Fraction, ...]:
        """Exact matrix-vector product on a plain sequence of rationals."""
        if len(vec) != self.cols:
            raise DimensionMismatch(f"vector of length {len(vec)} for {self.shape} matrix")
        v = [as_fraction(x) for x in vec]
        den = math.lcm(1, *(x.denominator for x in v))
        ints = [x.numerator * (den // x.denominator) for x in v]
        total = self._den * den
        return tuple(Fraction(sum(a * b for a, b in zip(row, ints)), total) for row in self._num)

    # -- comparison / display ---------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._den == other._den and self._num == other._num

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._num, self._den))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in self.tolist())
        return f"RationalMatrix([{body}], cols={self.cols})"

    def __str__(self) -> str:
        return format_matrix(self)


def _check_square(m: RationalMatrix, what: str) -> None:
    if not m.is_square:
        raise DimensionMismatch(f"{what} needs a square matrix, got {m.shape}")


def kron(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    num = [
        [x * y for x in ra for y in rb]
        for ra in a._num
        for rb in b._num
    ]
    return RationalMatrix._raw(a.rows * b.rows, a.cols * b.cols, num, a._den * b._den)


def matpow(m: RationalMatrix, k: int) -> RationalMatrix:
    _check_square(m, "matpow")
    if k < 0:
        raise ValueError("negative matrix power")
    result = RationalMatrix.identity(m.rows)
    base = m
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def rref(m: RationalMatrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns, by exact Gauss-Jordan."""
    a = m.tolist()
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        p = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: RationalMatrix) -> int:
    return len(rref(m)[1])


def nullspace_basis(m: RationalMatrix) -> RationalMatrix:
    """Columns form the canonical RREF free-variable basis of N(m).

    A trivial null space gives an ``m.cols x 0`` matrix.
    """
    a, pivots = rref(m)
    free = [c for c in range(m.cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][f]
        basis.append(v)
    if not basis:
        return RationalMatrix.zeros(m.cols, 0)
    return RationalMatrix(basis).T


def solve(m: RationalMatrix, rhs: RationalMatrix) -> RationalMatrix | None:
    """One exact solution X of ``m @ X == rhs`` or ``None`` if inconsistent.

    Free variables are set to zero, so the answer is unique whenever ``m``
    has full column rank.
    """
    if m.rows != rhs.rows:
        raise DimensionMismatch(f"{m.shape} system with {rhs.shape} right-hand side")
    aug, pivots = rref(RationalMatrix.hstack(m, rhs))
    if any(p >= m.cols for p in pivots):
        return None
    x = [[Fraction(0)] * rhs.cols for _ in range(m.cols)]
    for i, pc in enumerate(pivots):
        x[pc] = aug[i][m.cols:]
    return RationalMatrix(x, cols=rhs.cols)


def inverse(m: RationalMatrix) -> RationalMatrix | None:
    _check_square(m, "inverse")
    if rank(m) < m.rows:
        return None
    return solve(m, RationalMatrix.identity(m.rows))


def nilpotency_index(m: RationalMatrix) -> int | None:
    """Smallest p >= 1 with m**p == 0, or None when m is not nilpotent."""
    _check_square(m, "nilpotency_index")
    power = m
    for p in range(1, max(m.rows, 1) + 1):
        if power.is_zero():
            return p
        power = power @ m
    return None


def to_real(m: RationalMatrix) -> np.ndarray:
    if m.rows == 0 or m.cols == 0:
        return np.zeros((m.rows, m.cols))
    return np.array([[float(v) for v in row] for row in m.tolist()], dtype=float)


class Polynomial:
    """Univariate polynomial in ``s`` with exact coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [as_fraction(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def monomial(cls, k: int, coeff=1) -> "Polynomial":
        return cls([0] * k + [coeff])

    @classmethod
    def from_descending(cls, coeffs: Iterable) -> "Polynomial":
        return cls(list(coeffs)[::-1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, s):
        acc = Fraction(0) if not isinstance(s, float) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def eval_matrix(self, m: RationalMatrix) -> RationalMatrix:
        """Horner evaluation with a square matrix argument."""
        _check_square(m, "eval_matrix")
        acc = RationalMatrix.zeros(m.rows, m.cols)
        eye = RationalMatrix.identity(m.rows)
        for c in reversed(self.coeffs):
            acc = acc @ m + eye * c
        return acc

    def valuation(self) -> int | None:
        """Multiplicity of the root at zero (None for the zero polynomial)."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return None

    def divisible_by_s_power(self, k: int) -> bool:
        v = self.valuation()
        return v is None or v >= k

    def __repr__(self) -> str:
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if k == 0:
                term = str(mag)
            else:
                power = "s" if k == 1 else f"s^{k}"
                term = power if mag == 1 else f"{mag}*{power}"
            parts.append((sign, term))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, term in parts[1:]:
            text += f" {sign} {term}"
        return text


def charpoly(m: RationalMatrix) -> Polynomial:
    """det(sI - m) by the Faddeev-LeVerrier recurrence, exactly."""
    _check_square(m, "charpoly")
    n = m.rows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    eye = RationalMatrix.identity(n)
    aux = eye
    for k in range(1, n + 1):
        prod = m @ aux
        coeffs[n - k] = -prod.trace() / k
        if k < n:
            aux = prod + eye * coeffs[n - k]
    return Polynomial(coeffs)


# -- plain-text matrix format ---------------------------------------------


def format_matrix(m: RationalMatrix) -> str:
    """One row per line, entries as rational strings separated by spaces."""
    rows = [[str(v) for v in row] for row in m.tolist()]
    if not rows:
        return ""
    width = max((len(v) for row in rows for v in row), default=1)
    return "\n".join(" ".join(v.rjust(width) for v in row) for row in rows)


def parse_matrix(text: str) -> RationalMatrix:
    """Inverse of :func:`format_matrix`.  Blank lines and ``#`` comments are skipped."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([as_fraction(tok) for tok in line.replace(",", " ").split()])
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not rows:
        raise ValueError("no matrix rows found")
    return RationalMatrix(rows)


# -- random rational matrices ---------------------------------------------

DENOMINATORS = (1, 2, 4, 5, 10)


def random_fraction(rng: random.Random, max_num: int = 9, denominators=DENOMINATORS) -> Fraction:
    return Fraction(rng.randint(-max_num, max_num), rng.choice(denominators))


def random_rational_matrix(rows: int, cols: int, rng: random.Random, max_num: int = 9,
                           denominators=DENOMINATORS) -> RationalMatrix:
    return RationalMatrix(
        [[random_fraction(rng, max_num, denominators) for _ in range(cols)] for _ in range(rows)],
        cols=cols,
    )


def random_nonsingular_matrix(n: int, rng: random.Random, max_num: int = 9,
                              denominators=DENOMINATORS) -> RationalMatrix:
    while True:
        m = random_rational_matrix(n, n, rng, max_num, denominators)
        if rank(m) == n:
            return m
