"""Deadbeat interconnections and the compatibility test.

An interconnection maps the stacked outputs ``y = (y_1, ..., y_q)`` of q
agents to their driving signals.  It is deadbeat when it keeps the diagonal
``Y_0 = {y_1 = ... = y_q}`` invariant and pushes every stack onto it within r
iterations.  Two kinds ship:

* :class:`LinearInterconnection`, ``y -> Gamma y`` with Gamma exact;
* :class:`CubePowerInterconnection`, ``y_i -> (sum_j g_ij y_j^3)^(1/3)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .coupling import CouplingMatrix, validate_coupling
from .matrixcore import (
    DimensionMismatch,
    RationalMatrix,
    kron,
    matpow,
    nullspace_basis,
    to_real,
)
from .nonlinear_systems import signed_cbrt

__all__ = [
    "CubePowerInterconnection",
    "CycleDetected",
    "DiagonalNotInvariant",
    "Interconnection",
    "InterconnectError",
    "LinearInterconnection",
    "MultipleRoots",
    "NotDeadbeat",
    "check_cube_compatibility",
    "check_linear_compatibility",
    "cube_interconnection",
    "diagonal_embedding",
    "disagreement_matrix",
    "kron_interconnection",
    "kronecker_rearrangement",
    "linear_horizon",
    "raw_linear_interconnection",
    "tree_interconnection",
    "y_sigma_matrix",
]


class InterconnectError(ValueError):
    pass


class DiagonalNotInvariant(InterconnectError):
    pass


class NotDeadbeat(InterconnectError):
    pass


class CycleDetected(InterconnectError):
    pass


class MultipleRoots(InterconnectError):
    pass


def disagreement_matrix(q: int, m: int) -> RationalMatrix:
    """D with block rows (I_m, -I_m) at block columns (i, i+1); N(D) = Y_0."""
    rows = []
    for i in range(q - 1):
        for k in range(m):
            row = [0] * (q * m)
            row[i * m + k] = 1
            row[(i + 1) * m + k] = -1
            rows.append(row)
    if not rows:
        return RationalMatrix.zeros(0, q * m)
    return RationalMatrix(rows)


def diagonal_embedding(q: int, m: int) -> RationalMatrix:
    """E = ones_q ⊗ I_m, whose range is Y_0."""
    return kron(RationalMatrix.ones(q), RationalMatrix.identity(m))


@dataclass(frozen=True)
class LinearInterconnection:
    gamma: RationalMatrix
    q: int
    m: int
    horizon: int
    kind: str = "raw"
    coupling: CouplingMatrix | None = None
    qmat: RationalMatrix | None = None

    @property
    def is_kron(self) -> bool:
        """True when Gamma = G ⊗ Q with G a deadbeat coupling matrix."""
        return self.coupling is not None and self.qmat is not None

    def apply(self, y):
        """Gamma y, exact for rational sequences and float for numpy input."""
        if isinstance(y, np.ndarray) and y.dtype.kind == "f":
            return to_real(self.gamma) @ y
        return self.gamma.apply(y)


@dataclass(frozen=True)
class CubePowerInterconnection:
    g: CouplingMatrix
    q: int
    m: int = 1
    kind: str = "cube"

    @property
    def horizon(self) -> int:
        return self.g.horizon_r

    def apply(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return signed_cbrt(to_real(self.g.g) @ y**3)


Interconnection = Union[LinearInterconnection, CubePowerInterconnection]


def _horizon(gamma: RationalMatrix, q: int, m: int) -> int:
    d = disagreement_matrix(q, m)
    if not (d @ gamma @ diagonal_embedding(q, m)).is_zero():
        raise DiagonalNotInvariant("Gamma does not map the diagonal into itself")
    power = d @ gamma
    for r in range(1, q * m + 1):
        if power.is_zero():
            return r
        power = power @ gamma
    raise NotDeadbeat(f"D Gamma^r != 0 for every r <= {q * m}")


def linear_horizon(ic: LinearInterconnection) -> int:
    """Smallest r >= 1 with D Gamma^r = 0."""
    return _horizon(ic.gamma, ic.q, ic.m)


def raw_linear_interconnection(gamma: RationalMatrix, q: int, m: int) -> LinearInterconnection:
    if gamma.shape != (q * m, q * m):
        raise DimensionMismatch(f"Gamma must be {q * m}x{q * m}, got {gamma.shape}")
    return LinearInterconnection(gamma, q, m, _horizon(gamma, q, m))


def kron_interconnection(g: CouplingMatrix | RationalMatrix, qmat: RationalMatrix) -> LinearInterconnection:
    if not isinstance(g, CouplingMatrix):
        g = validate_coupling(g)
    if not qmat.is_square:
        raise DimensionMismatch(f"Q must be square, got {qmat.shape}")
    gamma = kron(g.g, qmat)
    return LinearInterconnection(gamma, g.q, qmat.rows, _horizon(gamma, g.q, qmat.rows),
                                 kind="kron", coupling=g, qmat=qmat)


def cube_interconnection(g: CouplingMatrix | RationalMatrix) -> CubePowerInterconnection:
    if not isinstance(g, CouplingMatrix):
        g = validate_coupling(g)
    return CubePowerInterconnection(g, g.q)


def tree_interconnection(parent: Sequence[int | None], m: int = 1) -> LinearInterconnection:
    """Each agent copies its parent's output; the single root keeps its own.

    ``parent[i]`` is the 0-based index of the agent driving agent i, or
    ``None`` for the root.  The horizon equals the depth of the tree (at
    least 1).
    """
    q = len(parent)
    roots = [i for i, p in enumerate(parent) if p is None]
    if len(roots) > 1:
        raise MultipleRoots(f"agents {roots} are all roots")
    for i, p in enumerate(parent):
        if p is not None and not (0 <= p < q) or p == i:
            raise InterconnectError(f"agent {i} has invalid parent {p!r}")
    depth = 0
    for i in range(q):
        seen, node, steps = {i}, i, 0
        while parent[node] is not None:
            node = parent[node]
            steps += 1
            if node in seen:
                raise CycleDetected(f"agent {i} reaches a cycle through {sorted(seen)}")
            seen.add(node)
        depth = max(depth, steps)
    if not roots:
        raise CycleDetected("no root")
    select = RationalMatrix(
        [[int(j == (i if parent[i] is None else parent[i])) for j in range(q)] for i in range(q)]
    )
    # a parent map into a rooted tree is itself a deadbeat coupling matrix
    ic = kron_interconnection(select, RationalMatrix.identity(m))
    assert ic.horizon == max(depth, 1)
    return LinearInterconnection(ic.gamma, q, m, ic.horizon, kind="tree",
                                 coupling=ic.coupling, qmat=ic.qmat)


def y_sigma_matrix(ic: LinearInterconnection, sigma: int) -> RationalMatrix:
    """D Gamma^sigma, whose null space is Y_sigma."""
    return disagreement_matrix(ic.q, ic.m) @ matpow(ic.gamma, sigma)


def check_linear_compatibility(a: RationalMatrix, c: RationalMatrix,
                               ic: LinearInterconnection, p: int) -> bool:
    """Exact test of the compatibility implication for f = A x, h = C x.

    For each sigma in 1..r, every stacked state whose first p output stacks
    lie in Y_sigma must have its p-th output stack in Y_sigma as well.
    """
    if not a.is_square or c.cols != a.rows or c.rows != ic.m:
        raise DimensionMismatch("A, C and the interconnection do not conform")
    eye_q = RationalMatrix.identity(ic.q)
    out_maps = []
    ca = c
    for _ in range(p + 1):
        out_maps.append(kron(eye_q, ca))
        ca = ca @ a
    for sigma in range(1, ic.horizon + 1):
        member = y_sigma_matrix(ic, sigma)
        if member.is_zero():
            continue
        hyp = RationalMatrix.vstack(*(member @ o for o in out_maps[:p]))
        k = nullspace_basis(hyp)
        if k.cols and not (member @ out_maps[p] @ k).is_zero():
            return False
    return True


def check_cube_compatibility(g: CouplingMatrix, samples: int = 20, seed: int = 0,
                             tol: float = 1e-9) -> bool:
    """Sample the closure property behind the cube-power compatibility proof.

    For y, v with cubes in N(G^sigma - ones l^T), the combination
    (y^3 + v^3)^(1/3) must again land on the diagonal after sigma steps.
    """
    ic = cube_interconnection(g)
    rng = random.Random(seed)
    proj = g.consensus_projector
    for sigma in range(1, g.horizon_r + 1):
        basis = to_real(nullspace_basis(matpow(g.g, sigma) - proj))
        if basis.shape[1] == 0:
            continue
        for _ in range(samples):
            cubes = [basis @ np.array([rng.randint(-9, 9) / rng.choice((1, 2, 4, 5, 10))
                                       for _ in range(basis.shape[1])]) for _ in range(2)]
            y, v = signed_cbrt(cubes[0]), signed_cbrt(cubes[1])
            z = signed_cbrt(y**3 + v**3)
            for _ in range(sigma):
                z = ic.apply(z)
            if np.ptp(z) > tol * max(1.0, float(np.max(np.abs(z)))):
                return False
    return True


def kronecker_rearrangement(gamma: RationalMatrix, q: int, m: int) -> RationalMatrix:
    """Van Loan rearrangement: Gamma = G ⊗ Q for some G, Q iff this has rank <= 1.

    Row (i, j) holds the vectorised m x m block Gamma_ij.
    """
    rows = []
    for i in range(q):
        for j in range(q):
            blk = gamma.block(i, j, m, m)
            rows.append(list(blk.entries()))
    return RationalMatrix(rows)
