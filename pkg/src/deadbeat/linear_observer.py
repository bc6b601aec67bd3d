"""Geometric deadbeat observers for linear pairs (A, C).

For ``f(x) = A x`` and ``h(x) = C x`` the nonlinear set chain reduces to affine
sets ``x + S_k`` with

    S_0 = N(C),    S_{k+1} = A S_k  ∩  N(C),

and ``S_{-1} = R^n``.  The observer uses the smallest p for which
``A S_{p-2}`` is a complement of ``N(C)``: the intersection
``(xhat + A S_{p-2}) ∩ {x : C x = y}`` is then the single point
``xhat + H (y - C xhat)`` with ``H = B (C B)^-1`` for any basis B of
``A S_{p-2}``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matrixcore import (
    DimensionMismatch,
    RationalMatrix,
    as_fraction,
    format_matrix,
    inverse,
    nilpotency_index,
    nullspace_basis,
    parse_matrix,
    random_nonsingular_matrix,
    random_rational_matrix,
    rank,
    to_real,
)

__all__ = [
    "LinearDeadbeatObserver",
    "NilpotencyCheckFailed",
    "NotDeadbeatObservable",
    "ObserverError",
    "RankDeficientC",
    "SingularA",
    "SubspaceChain",
    "design_observer",
    "dump_observer",
    "load_observer",
    "observer_step",
    "observer_step_exact",
    "random_observable_pair",
    "subspace_chain",
]


class ObserverError(ValueError):
    pass


class SingularA(ObserverError):
    pass


class RankDeficientC(ObserverError):
    pass


class NotDeadbeatObservable(ObserverError):
    pass


class NilpotencyCheckFailed(AssertionError):
    pass


@dataclass(frozen=True)
class SubspaceChain:
    """Bases of S_0, S_1, ... until the chain stabilises or reaches {0}."""

    s: tuple[RationalMatrix, ...]

    def dims(self) -> list[int]:
        return [b.cols for b in self.s]

    def basis(self, k: int, n: int) -> RationalMatrix:
        """Basis of S_k, with S_{-1} = R^n and the chain held constant past its end."""
        if k < 0:
            return RationalMatrix.identity(n)
        return self.s[min(k, len(self.s) - 1)]


@dataclass(frozen=True)
class LinearDeadbeatObserver:
    a: RationalMatrix
    c: RationalMatrix
    h_gain: RationalMatrix
    l_gain: RationalMatrix
    p: int
    chain: SubspaceChain | None = None

    @property
    def n(self) -> int:
        return self.a.rows

    @property
    def m(self) -> int:
        return self.c.rows

    def error_matrix(self) -> RationalMatrix:
        """A - L C, nilpotent of index p."""
        return self.a - self.l_gain @ self.c


def _check_pair(a: RationalMatrix, c: RationalMatrix) -> None:
    if not a.is_square:
        raise DimensionMismatch(f"A must be square, got {a.shape}")
    if c.cols != a.rows:
        raise DimensionMismatch(f"C has {c.cols} columns, A is {a.rows}x{a.rows}")
    if rank(a) < a.rows:
        raise SingularA("A is singular, so x -> A x is not a bijection")
    if rank(c) < c.rows:
        raise RankDeficientC("C must have full row rank")


def _intersect_with_kernel(basis: RationalMatrix, c: RationalMatrix) -> RationalMatrix:
    # span(basis) ∩ N(C) = basis @ N(C @ basis) for a basis with independent columns
    if basis.cols == 0:
        return basis
    return basis @ nullspace_basis(c @ basis)


def subspace_chain(a: RationalMatrix, c: RationalMatrix) -> SubspaceChain:
    _check_pair(a, c)
    s = [nullspace_basis(c)]
    while s[-1].cols > 0:
        nxt = _intersect_with_kernel(a @ s[-1], c)
        if nxt.cols == s[-1].cols:
            break
        s.append(nxt)
    return SubspaceChain(tuple(s))


def _complements_kernel(b: RationalMatrix, c: RationalMatrix) -> bool:
    # span(b) ⊕ N(C) = R^n  iff  C restricted to span(b) is a bijection onto R^m
    return b.cols == c.rows and rank(c @ b) == c.rows


def design_observer(a: RationalMatrix, c: RationalMatrix) -> LinearDeadbeatObserver:
    chain = subspace_chain(a, c)
    n = a.rows
    # once the chain has stopped changing, larger p cannot help
    for p in range(1, len(chain.s) + 2):
        b = a @ chain.basis(p - 2, n)
        if _complements_kernel(b, c):
            break
    else:
        raise NotDeadbeatObservable(
            f"no horizon makes A S_(p-2) complementary to N(C); chain dims {chain.dims()}"
        )
    h = b @ inverse(c @ b)
    l = a @ h
    if nilpotency_index(a - l @ c) != p:
        raise NilpotencyCheckFailed(f"(A - LC) does not have nilpotency index {p}")
    return LinearDeadbeatObserver(a=a, c=c, h_gain=h, l_gain=l, p=p, chain=chain)


def observer_step_exact(obs: LinearDeadbeatObserver, xhat: Sequence, y: Sequence) -> tuple:
    """A (xhat + H (y - C xhat)) in exact arithmetic."""
    if len(xhat) != obs.n or len(y) != obs.m:
        raise DimensionMismatch("state or output has the wrong length")
    innov = [as_fraction(yi) - ci for yi, ci in zip(y, obs.c.apply(xhat))]
    corrected = [as_fraction(x) + d for x, d in zip(xhat, obs.h_gain.apply(innov))]
    return obs.a.apply(corrected)


def observer_step(obs: LinearDeadbeatObserver, xhat, y) -> np.ndarray:
    xhat = np.asarray(xhat, dtype=float)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if xhat.shape != (obs.n,) or y.shape != (obs.m,):
        raise DimensionMismatch("state or output has the wrong length")
    a, c, h = to_real(obs.a), to_real(obs.c), to_real(obs.h_gain)
    return a @ (xhat + h @ (y - c @ xhat))


def random_observable_pair(n: int, m: int, rng: random.Random,
                           max_tries: int = 200) -> LinearDeadbeatObserver:
    """Draw random nonsingular A and full-rank C until the design succeeds."""
    for _ in range(max_tries):
        a = random_nonsingular_matrix(n, rng)
        c = random_rational_matrix(m, n, rng)
        try:
            return design_observer(a, c)
        except (RankDeficientC, NotDeadbeatObservable):
            continue
    raise NotDeadbeatObservable(f"no deadbeat-observable pair found for n={n}, m={m}")


# -- text bundle ------------------------------------------------------------


def dump_observer(obs: LinearDeadbeatObserver) -> str:
    parts = [f"p {obs.p}"]
    for name, mat in (("A", obs.a), ("C", obs.c), ("H", obs.h_gain), ("L", obs.l_gain)):
        parts.append(f"[{name}]\n{format_matrix(mat)}")
    return "\n\n".join(parts) + "\n"


def load_observer(text: str) -> LinearDeadbeatObserver:
    sections: dict[str, list[str]] = {}
    p = None
    current = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("p ") and current is None:
            p = int(stripped.split()[1])
        elif stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1]
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    missing = {"A", "C", "H", "L"} - sections.keys()
    if p is None or missing:
        raise ValueError(f"incomplete observer bundle (missing {sorted(missing) or 'p'})")
    mats = {k: parse_matrix("\n".join(v)) for k, v in sections.items()}
    obs = LinearDeadbeatObserver(a=mats["A"], c=mats["C"], h_gain=mats["H"], l_gain=mats["L"], p=p)
    if obs.l_gain != obs.a @ obs.h_gain or nilpotency_index(obs.error_matrix()) != p:
        raise ValueError("observer bundle is inconsistent")
    return obs
