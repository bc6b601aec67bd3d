"""Arrays of coupled deadbeat observers.

Agent i updates as ``x_i+ = g(x_i, w_i)`` with ``w = gamma(h(x_1), ..., h(x_q))``.
Linear agents ``g(x, w) = A x + L (w - C x)`` coupled through an exact linear
interconnection are stepped in rational arithmetic; everything else runs in
floating point with a divergence guard.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TextIO, Union

import numpy as np

from .coupling import CouplingMatrix, validate_coupling
from .interconnect import (
    CubePowerInterconnection,
    Interconnection,
    LinearInterconnection,
    check_linear_compatibility,
    cube_interconnection,
    kron_interconnection,
)
from .linear_observer import ObserverError, design_observer
from .matrixcore import (
    DimensionMismatch,
    RationalMatrix,
    as_fraction,
    kron,
    nilpotency_index,
    random_fraction,
    rank,
    to_real,
)
from .nonlinear_systems import SystemFamily

__all__ = [
    "ArraySpec",
    "DivergedTrajectory",
    "FamilyDynamics",
    "LinearDynamics",
    "NilpotencyPreconditionFailed",
    "SyncReport",
    "KroneckerSyncReport",
    "CubeSyncReport",
    "Trajectory",
    "UnsupportedFamily",
    "UnsupportedInterconnection",
    "build_phi",
    "closed_loop_matrix",
    "measure_sync",
    "random_rational_states",
    "simulate",
    "synchronization_bound",
    "verify_kronecker_sync",
    "verify_cube_sync",
    "verify_theorem2",
    "verify_theorem4",
    "write_sync_csv",
    "write_trajectory_csv",
]

DIVERGENCE_LIMIT = 1e12
FLOAT_TOL = 1e-7


class DivergedTrajectory(RuntimeError):
    pass


class NilpotencyPreconditionFailed(ValueError):
    pass


class UnsupportedInterconnection(ValueError):
    pass


class UnsupportedFamily(ValueError):
    pass


@dataclass(frozen=True)
class LinearDynamics:
    a: RationalMatrix
    c: RationalMatrix
    l: RationalMatrix

    def __post_init__(self):
        n, m = self.a.rows, self.c.rows
        if self.a.shape != (n, n) or self.c.shape != (m, n) or self.l.shape != (n, m):
            raise DimensionMismatch(
                f"A {self.a.shape}, C {self.c.shape}, L {self.l.shape} do not conform")

    @property
    def n(self) -> int:
        return self.a.rows

    @property
    def m(self) -> int:
        return self.c.rows

    @property
    def p(self) -> int | None:
        return nilpotency_index(self.a - self.l @ self.c)

    def output(self, x: np.ndarray) -> np.ndarray:
        return to_real(self.c) @ x

    def step(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        a, c, l = to_real(self.a), to_real(self.c), to_real(self.l)
        return a @ x + l @ (w - c @ x)


@dataclass(frozen=True)
class FamilyDynamics:
    family: SystemFamily

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def m(self) -> int:
        return self.family.m

    @property
    def p(self) -> int:
        return self.family.p

    def output(self, x: np.ndarray) -> np.ndarray:
        return self.family.h(x)

    def step(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return self.family.observer_step(x, w)


Dynamics = Union[LinearDynamics, FamilyDynamics]


@dataclass(frozen=True)
class ArraySpec:
    q: int
    dynamics: Dynamics
    ic: Interconnection
    initial: tuple[tuple, ...]

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(tuple(x) for x in self.initial))
        if self.ic.q != self.q:
            raise DimensionMismatch(f"interconnection is for {self.ic.q} agents, array has {self.q}")
        if self.ic.m != self.dynamics.m:
            raise DimensionMismatch(
                f"interconnection output dim {self.ic.m} vs agent output dim {self.dynamics.m}")
        if len(self.initial) != self.q or any(len(x) != self.dynamics.n for x in self.initial):
            raise DimensionMismatch(f"need {self.q} initial states of length {self.dynamics.n}")

    @property
    def n(self) -> int:
        return self.dynamics.n

    @property
    def is_exact(self) -> bool:
        return (isinstance(self.dynamics, LinearDynamics)
                and isinstance(self.ic, LinearInterconnection)
                and not any(isinstance(v, float) for x in self.initial for v in x))


@dataclass
class Trajectory:
    steps: list[tuple[tuple, ...]]
    exact: bool
    diverged: bool = False
    bound_tau: int | None = None
    bound_reason: str = ""

    @property
    def k_max(self) -> int:
        return len(self.steps) - 1

    def as_array(self) -> np.ndarray:
        """Float array of shape (steps, q, n)."""
        return np.array([[[float(v) for v in x] for x in snap] for snap in self.steps])

    def agent(self, i: int) -> list[tuple]:
        return [snap[i] for snap in self.steps]


@dataclass
class SyncReport:
    measured_tau: int | None
    bound_tau: int | None
    tol: float
    per_step_disagreement: list
    bound_reason: str = ""

    @property
    def k_max(self) -> int:
        return len(self.per_step_disagreement) - 1

    @property
    def passed(self) -> bool:
        return (self.bound_tau is not None and self.measured_tau is not None
                and self.measured_tau <= self.bound_tau)

    def summary(self) -> str:
        tau = "none" if self.measured_tau is None else str(self.measured_tau)
        if self.measured_tau is None:
            tau += f" (k_max={self.k_max})"
        if self.bound_tau is None:
            bound = f"N/A ({self.bound_reason or 'no bound'})"
            verdict = ""
        else:
            bound = str(self.bound_tau)
            verdict = ", PASS" if self.passed else ", FAIL"
        return f"measured_tau={tau}, bound={bound}{verdict}"

    def to_text(self) -> str:
        lines = [
            self.summary(),
            f"measured_tau: {self.measured_tau}",
            f"bound_tau: {self.bound_tau}",
            f"bound_reason: {self.bound_reason}",
            f"tol: {self.tol}",
            "per_step_disagreement:",
        ]
        lines += [f"  {k}: {float(d):.6e}" for k, d in enumerate(self.per_step_disagreement)]
        return "\n".join(lines) + "\n"


# -- closed-loop matrices -----------------------------------------------------


def closed_loop_matrix(a: RationalMatrix, c: RationalMatrix, l: RationalMatrix,
                       gamma: RationalMatrix, q: int) -> RationalMatrix:
    """I_q⊗A + (I_q⊗L)(Gamma - I)(I_q⊗C): the stacked linear array map."""
    eye = RationalMatrix.identity(q)
    qm = q * c.rows
    if gamma.shape != (qm, qm):
        raise DimensionMismatch(f"Gamma is {gamma.shape}, expected {qm}x{qm}")
    return kron(eye, a) + kron(eye, l) @ (gamma - RationalMatrix.identity(qm)) @ kron(eye, c)


def build_phi(a: RationalMatrix, c: RationalMatrix, h_gain: RationalMatrix,
              ic: LinearInterconnection | RationalMatrix, q: int) -> RationalMatrix:
    """(I_q⊗A)(I + (I_q⊗H)(Gamma - I)(I_q⊗C)) for the observer array x+ = A(x + H(w - Cx))."""
    gamma = ic.gamma if isinstance(ic, LinearInterconnection) else ic
    n, m = a.rows, c.rows
    if c.cols != n or h_gain.shape != (n, m) or gamma.shape != (q * m, q * m):
        raise DimensionMismatch("A, C, H and Gamma do not conform")
    eye = RationalMatrix.identity(q)
    inner = kron(eye, h_gain) @ (gamma - RationalMatrix.identity(q * m)) @ kron(eye, c)
    return kron(eye, a) @ (RationalMatrix.identity(q * n) + inner)


# -- horizon bound ------------------------------------------------------------


def synchronization_bound(spec: ArraySpec) -> tuple[int | None, str]:
    """The guaranteed horizon r*p for this array, with the reason it applies.

    Returns ``(None, reason)`` when no shipped result covers the array.
    """
    dyn, ic = spec.dynamics, spec.ic
    p = dyn.p
    if p is None:
        return None, "A - LC not nilpotent"
    r = ic.horizon
    if spec.q == 1 or r == 1:
        return r * p, "vacuous compatibility (r = 1)"
    if isinstance(ic, LinearInterconnection) and ic.kind == "tree":
        return r * p, "tree interconnection"
    if isinstance(dyn, LinearDynamics):
        if isinstance(ic, LinearInterconnection) and ic.is_kron:
            return r * p, "Kronecker interconnection"
        if not isinstance(ic, LinearInterconnection):
            return None, "no compatibility result"
        if rank(dyn.a) < dyn.n:
            return None, "A singular"
        try:
            obs = design_observer(dyn.a, dyn.c)
        except (ObserverError, DimensionMismatch):
            return None, "not the set-chain observer"
        if obs.l_gain != dyn.l:
            return None, "not the set-chain observer"
        if check_linear_compatibility(dyn.a, dyn.c, ic, p):
            return r * p, "compatible"
        return None, "incompatible"
    if dyn.family.name == "cube" and isinstance(ic, CubePowerInterconnection):
        return r * p, "cube-power compatibility"
    return None, "unverified"


# -- simulation ---------------------------------------------------------------


def _disagreement(snap: tuple[tuple, ...]):
    if len(snap) < 2:
        return Fraction(0) if snap and isinstance(snap[0][0], Fraction) else 0.0
    return max(max(col) - min(col) for col in zip(*snap))


def simulate(spec: ArraySpec, k_max: int) -> Trajectory:
    bound, reason = synchronization_bound(spec)
    if spec.is_exact:
        steps = _simulate_exact(spec, k_max)
        return Trajectory(steps, exact=True, bound_tau=bound, bound_reason=reason)
    steps, diverged = _simulate_float(spec, k_max)
    return Trajectory(steps, exact=False, diverged=diverged, bound_tau=bound, bound_reason=reason)


def _simulate_exact(spec: ArraySpec, k_max: int) -> list[tuple[tuple, ...]]:
    dyn = spec.dynamics
    step = closed_loop_matrix(dyn.a, dyn.c, dyn.l, spec.ic.gamma, spec.q)
    n = spec.n
    x = tuple(as_fraction(v) for state in spec.initial for v in state)
    steps = []
    for k in range(k_max + 1):
        steps.append(tuple(x[i * n:(i + 1) * n] for i in range(spec.q)))
        if k < k_max:
            x = step.apply(x)
    return steps


def _simulate_float(spec: ArraySpec, k_max: int) -> tuple[list[tuple[tuple, ...]], bool]:
    dyn, ic = spec.dynamics, spec.ic
    x = [np.array([float(as_fraction(v)) if not isinstance(v, float) else v for v in s])
         for s in spec.initial]
    steps = [tuple(tuple(s.tolist()) for s in x)]
    for _ in range(k_max):
        y = np.concatenate([dyn.output(s) for s in x])
        w = np.asarray(ic.apply(y), dtype=float).reshape(spec.q, dyn.m)
        x = [dyn.step(s, wi) for s, wi in zip(x, w)]
        if any(not np.all(np.isfinite(s)) or np.max(np.abs(s)) > DIVERGENCE_LIMIT for s in x):
            return steps, True
        steps.append(tuple(tuple(s.tolist()) for s in x))
    return steps, False


def measure_sync(traj: Trajectory, tol: float | None = None) -> SyncReport:
    """First step from which all pairwise disagreements stay within ``tol``."""
    if traj.diverged:
        raise DivergedTrajectory("trajectory left the divergence bound")
    if tol is None:
        tol = 0 if traj.exact else FLOAT_TOL
    dis = [_disagreement(s) for s in traj.steps]
    tau = None
    for k in range(len(dis) - 1, -1, -1):
        if dis[k] > tol:
            break
        tau = k
    return SyncReport(tau, traj.bound_tau, tol, dis, traj.bound_reason)


# -- randomized bound checks ------------------------------------------------


def random_rational_states(q: int, n: int, rng: random.Random) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(random_fraction(rng) for _ in range(n)) for _ in range(q))


@dataclass
class KroneckerSyncReport:
    bound_tau: int
    taus: list
    law_holds: bool
    trials: int = field(init=False)

    def __post_init__(self):
        self.trials = len(self.taus)

    @property
    def worst_tau(self) -> int | None:
        if any(t is None for t in self.taus):
            return None
        return max(self.taus, default=0)

    @property
    def passed(self) -> bool:
        return self.worst_tau is not None and self.worst_tau <= self.bound_tau and self.law_holds


def verify_kronecker_sync(a: RationalMatrix, c: RationalMatrix, l: RationalMatrix,
                    g: CouplingMatrix | RationalMatrix | Interconnection,
                    qmat: RationalMatrix | None = None, trials: int = 5,
                    seed: int = 0) -> KroneckerSyncReport:
    """Exact check of synchronization by step r*p for the array with G ⊗ Q.

    After step r*p every agent must follow (A + LQC - LC)^k applied to
    (l^T ⊗ I_n) times the initial stack.
    """
    if isinstance(g, CubePowerInterconnection):
        raise UnsupportedInterconnection("needs a linear G ⊗ Q interconnection")
    if isinstance(g, LinearInterconnection):
        if not g.is_kron:
            raise UnsupportedInterconnection("interconnection is not of the form G ⊗ Q")
        g, qmat = g.coupling, g.qmat
    if not isinstance(g, CouplingMatrix):
        g = validate_coupling(g)
    if qmat is None:
        qmat = RationalMatrix.identity(c.rows)
    dyn = LinearDynamics(a, c, l)
    p = dyn.p
    if p is None:
        raise NilpotencyPreconditionFailed("A - LC is not nilpotent")
    ic = kron_interconnection(g, qmat)
    bound = g.horizon_r * p
    k_max = bound + 5
    n = a.rows
    consensus = a + l @ qmat @ c - l @ c
    ell = kron(RationalMatrix.row_vector(g.left_eigvec_l), RationalMatrix.identity(n))
    rng = random.Random(seed)
    taus, law = [], True
    for _ in range(trials):
        init = random_rational_states(g.q, n, rng)
        traj = simulate(ArraySpec(g.q, dyn, ic, init), k_max)
        taus.append(measure_sync(traj, 0).measured_tau)
        xbar = ell.apply([v for s in init for v in s])
        for k, snap in enumerate(traj.steps):
            if k >= bound and any(x != xbar for x in snap):
                law = False
            xbar = consensus.apply(xbar)
    return KroneckerSyncReport(bound, taus, law)


@dataclass
class CubeSyncReport:
    bound_tau: int
    taus: list
    diverged: int
    tol: float

    @property
    def worst_tau(self) -> int | None:
        if any(t is None for t in self.taus):
            return None
        return max(self.taus, default=0)

    @property
    def passed(self) -> bool:
        return self.diverged == 0 and self.worst_tau is not None and self.worst_tau <= self.bound_tau


def verify_cube_sync(family: SystemFamily, g: CouplingMatrix | RationalMatrix, trials: int = 10,
                    seed: int = 0, tol: float = FLOAT_TOL) -> CubeSyncReport:
    """Simulate the cube-power array from random initials in [-1, 1]^n."""
    if family.name != "cube":
        raise UnsupportedFamily(f"no compatibility proof for the {family.name!r} family")
    if not isinstance(g, CouplingMatrix):
        g = validate_coupling(g)
    ic = cube_interconnection(g)
    dyn = FamilyDynamics(family)
    bound = g.horizon_r * family.p
    rng = np.random.default_rng(seed)
    taus, diverged = [], 0
    for _ in range(trials):
        init = rng.uniform(-1.0, 1.0, size=(g.q, family.n)).tolist()
        traj = simulate(ArraySpec(g.q, dyn, ic, init), bound + 10)
        if traj.diverged:
            diverged += 1
            continue
        taus.append(measure_sync(traj, tol).measured_tau)
    return CubeSyncReport(bound, taus, diverged, tol)


# -- export -------------------------------------------------------------------


def _open_out(dest):
    return (open(dest, "w", newline=""), True) if isinstance(dest, str) else (dest, False)


def write_trajectory_csv(traj: Trajectory, dest: str | TextIO) -> None:
    """Columns step, agent, component_1..component_n; agents are numbered from 1."""
    fh, close = _open_out(dest)
    try:
        writer = csv.writer(fh)
        n = len(traj.steps[0][0]) if traj.steps and traj.steps[0] else 0
        writer.writerow(["step", "agent"] + [f"component_{j + 1}" for j in range(n)])
        for k, snap in enumerate(traj.steps):
            for i, x in enumerate(snap):
                writer.writerow([k, i + 1] + [repr(float(v)) for v in x])
    finally:
        if close:
            fh.close()


def write_sync_csv(report: SyncReport, dest: str | TextIO) -> None:
    """Columns step, disagreement, synced (1 from measured_tau on)."""
    fh, close = _open_out(dest)
    try:
        writer = csv.writer(fh)
        writer.writerow(["step", "disagreement", "synced"])
        tau = report.measured_tau
        for k, d in enumerate(report.per_step_disagreement):
            writer.writerow([k, repr(float(d)), int(tau is not None and k >= tau)])
    finally:
        if close:
            fh.close()


# older names, kept for callers that still use them
verify_theorem2 = verify_kronecker_sync
verify_theorem4 = verify_cube_sync
