"""Deadbeat coupling matrices: validation, horizon and random generation.

A q x q matrix G is a deadbeat coupling matrix when its rows sum to one and
its characteristic polynomial is s**(q-1) * (s - 1).  Then G**r equals the
rank-one matrix ``ones @ l.T`` from some power r on, with ``l.T @ ones = 1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .matrixcore import (
    DimensionMismatch,
    Polynomial,
    RationalMatrix,
    charpoly,
    format_matrix,
    inverse,
    parse_matrix,
    random_fraction,
)

__all__ = [
    "CouplingError",
    "CouplingMatrix",
    "InvalidHorizon",
    "RowSumViolation",
    "SpectrumViolation",
    "deadbeat_horizon",
    "dump_coupling",
    "load_coupling",
    "random_coupling",
    "validate_coupling",
]


class CouplingError(ValueError):
    pass


class RowSumViolation(CouplingError):
    pass


class SpectrumViolation(CouplingError):
    pass


class InvalidHorizon(CouplingError):
    pass


@dataclass(frozen=True)
class CouplingMatrix:
    g: RationalMatrix
    horizon_r: int
    left_eigvec_l: tuple[Fraction, ...]

    @property
    def q(self) -> int:
        return self.g.rows

    @property
    def consensus_projector(self) -> RationalMatrix:
        """The rank-one limit ``ones @ l.T``."""
        return RationalMatrix.ones(self.q) @ RationalMatrix.row_vector(self.left_eigvec_l)


def _deadbeat_charpoly(q: int) -> Polynomial:
    return Polynomial.monomial(q - 1) * Polynomial([-1, 1])


def validate_coupling(g: RationalMatrix) -> CouplingMatrix:
    if not g.is_square:
        raise DimensionMismatch(f"coupling matrix must be square, got {g.shape}")
    q = g.rows
    if q == 0:
        raise DimensionMismatch("empty coupling matrix")
    ones = RationalMatrix.ones(q)
    sums = g @ ones
    if sums != ones:
        bad = [i for i in range(q) if sums[i, 0] != 1]
        raise RowSumViolation(f"rows {bad} do not sum to 1")
    cp = charpoly(g)
    if cp != _deadbeat_charpoly(q):
        raise SpectrumViolation(f"characteristic polynomial is {cp}, not s^{q - 1}(s - 1)")

    power = g
    for r in range(1, q + 1):
        nxt = power @ g
        if nxt == power:
            break
        power = nxt
    else:  # unreachable once the characteristic polynomial is right
        raise SpectrumViolation("powers never stabilise")
    ell = power.row(0)
    if power != ones @ RationalMatrix.row_vector(ell):
        raise SpectrumViolation("stable power is not rank one")
    return CouplingMatrix(g=g, horizon_r=r, left_eigvec_l=ell)


def deadbeat_horizon(g: RationalMatrix) -> int:
    """Smallest r >= 1 with g**r == g**(r + 1)."""
    return validate_coupling(g).horizon_r


def _nilpotent_part(size: int, r: int, rng: random.Random) -> RationalMatrix:
    """Block-diagonal strictly upper bidiagonal matrix whose largest block is r x r.

    Superdiagonal entries are small nonzero rationals, so every block of size
    b has nilpotency index exactly b.
    """
    sizes = [r]
    left = size - r
    while left > 0:
        b = rng.randint(1, min(r, left))
        sizes.append(b)
        left -= b
    rng.shuffle(sizes)
    blocks = []
    for b in sizes:
        rows = [[0] * b for _ in range(b)]
        for i in range(b - 1):
            rows[i][i + 1] = _nonzero_fraction(rng)
        blocks.append(RationalMatrix(rows, cols=b))
    return RationalMatrix.block_diag(*blocks)


def _nonzero_fraction(rng: random.Random) -> Fraction:
    while True:
        v = random_fraction(rng)
        if v:
            return v


def _unimodular_basis(q: int, rng: random.Random) -> RationalMatrix:
    """Integer V with det = +-1 and first column all ones."""
    lower = RationalMatrix([[int(i == j or j == 0) for j in range(q)] for i in range(q)])
    upper = RationalMatrix(
        [[int(i == j) if j <= i or i == 0 and j == 0 else rng.randint(-3, 3)
          for j in range(q)] for i in range(q)]
    )
    # upper keeps e_1 as its first column, so V e_1 = lower e_1 = ones
    v = lower @ upper
    order = list(range(q))
    rng.shuffle(order)
    return v.submatrix(order, range(q))


def random_coupling(q: int, r: int, seed: int) -> CouplingMatrix:
    """Random deadbeat coupling matrix with minimal horizon exactly ``r``.

    Built as ``V diag(1, J) V^-1`` with ``V = [ones | R]``; unit row sums
    follow from ``V^-1 ones = e_1`` and the nilpotency index of J sets the
    horizon.  Deterministic per seed.
    """
    if q < 1:
        raise InvalidHorizon("need at least one agent")
    if r < 1 or (q == 1 and r != 1) or (q > 1 and r > q - 1):
        raise InvalidHorizon(f"horizon {r} impossible for q={q}")
    if q == 1:
        return validate_coupling(RationalMatrix([[1]]))
    rng = random.Random(seed)
    core = RationalMatrix.block_diag(RationalMatrix([[1]]), _nilpotent_part(q - 1, r, rng))
    v = _unimodular_basis(q, rng)
    cm = validate_coupling(v @ core @ inverse(v))
    assert cm.horizon_r == r
    return cm


def dump_coupling(c: CouplingMatrix | RationalMatrix) -> str:
    g = c.g if isinstance(c, CouplingMatrix) else c
    return format_matrix(g) + "\n"


def load_coupling(text: str) -> CouplingMatrix:
    return validate_coupling(parse_matrix(text))
