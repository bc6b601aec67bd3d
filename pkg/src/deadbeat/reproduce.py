"""Self-checking reproductions of the worked examples.

Each target recomputes its quantities from the inputs in
:mod:`deadbeat.reference_cases` and compares them with the reported values.
The two trajectory targets also write plot-ready CSV files.
"""

from __future__ import annotations

import csv
import os
import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import reference_cases as ref
from .array_sim import (
    ArraySpec,
    FamilyDynamics,
    LinearDynamics,
    build_phi,
    measure_sync,
    random_rational_states,
    simulate,
    write_sync_csv,
    write_trajectory_csv,
)
from .coupling import validate_coupling
from .interconnect import (
    check_linear_compatibility,
    cube_interconnection,
    kron_interconnection,
    raw_linear_interconnection,
)
from .linear_observer import design_observer
from .matrixcore import RationalMatrix, charpoly, matpow, nilpotency_index
from .nonlinear_systems import chaotic_family, cube_family

__all__ = ["TARGETS", "ReproductionResult", "UnknownTarget", "reproduce"]


class UnknownTarget(ValueError):
    pass


@dataclass
class ReproductionResult:
    target: str
    checks: list[tuple[str, bool]] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    def check(self, label: str, ok: bool) -> None:
        self.checks.append((label, bool(ok)))

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok in self.checks)

    def report(self) -> str:
        out = [f"[{self.target}]"] + [f"  {line}" for line in self.lines]
        out += [f"  {'ok' if ok else 'MISMATCH'}: {label}" for label, ok in self.checks]
        out += [f"  wrote {path}" for path in self.files]
        out.append(f"  {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(out)


def _fmt_vec(values) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def _coupling_power(res: ReproductionResult, out_dir: str) -> None:
    cm = validate_coupling(ref.FOUR_AGENT_G)
    power = matpow(cm.g, cm.horizon_r)
    res.lines.append(f"r={cm.horizon_r}, l={_fmt_vec(cm.left_eigvec_l)}")
    res.lines.append("G^r =\n" + "\n".join("    " + row for row in str(power).splitlines()))
    res.check("horizon r = 3", cm.horizon_r == ref.FOUR_AGENT_HORIZON)
    res.check("left eigenvector l", cm.left_eigvec_l == ref.FOUR_AGENT_ELL)
    expected = RationalMatrix.ones(4) @ RationalMatrix.row_vector(ref.FOUR_AGENT_ELL)
    res.check("G^3 = ones l^T", power == expected)
    res.check("G^2 != G^3", matpow(cm.g, 2) != power)


def _consensus_value(res: ReproductionResult, out_dir: str, trials: int = 10, seed: int = 0) -> None:
    # scalar agents x+ = w reduce the array to plain consensus y+ = G y
    one = RationalMatrix.identity(1)
    cm = validate_coupling(ref.FOUR_AGENT_G)
    ic = kron_interconnection(cm, one)
    dyn = LinearDynamics(one, one, one)
    rng = random.Random(seed)
    worst = True
    for _ in range(trials):
        init = random_rational_states(4, 1, rng)
        traj = simulate(ArraySpec(4, dyn, ic, init), 8)
        value = sum(l * x[0] for l, x in zip(ref.FOUR_AGENT_ELL, init))
        worst &= all(all(x[0] == value for x in traj.steps[k]) for k in range(3, 9))
    res.lines.append(f"{trials} random rational stacks, steps 3..8")
    res.check("y_i(k) = 0.1 y1 - 0.8 y2 + 1.3 y3 + 0.4 y4 for k >= 3", worst)


def _counterexample_h(res: ReproductionResult, out_dir: str) -> None:
    obs = design_observer(ref.COUNTEREXAMPLE_A, ref.COUNTEREXAMPLE_C)
    res.lines.append(f"p={obs.p}")
    res.lines.append("H =\n" + "\n".join("    " + row for row in str(obs.h_gain).splitlines()))
    res.check("p = 2", obs.p == ref.COUNTEREXAMPLE_P)
    # observer maps agree iff A H agrees; A is nonsingular so H itself must match
    res.check("A H matches", obs.a @ obs.h_gain == ref.COUNTEREXAMPLE_A @ ref.COUNTEREXAMPLE_H)
    res.check("A - A H C nilpotent of index 2",
              nilpotency_index(obs.a - obs.a @ ref.COUNTEREXAMPLE_H @ obs.c) == 2)


def _counterexample_phi(res: ReproductionResult, out_dir: str) -> None:
    a, c = ref.COUNTEREXAMPLE_A, ref.COUNTEREXAMPLE_C
    obs = design_observer(a, c)
    ic = raw_linear_interconnection(ref.NON_KRON_GAMMA, 2, 2)
    poly = charpoly(build_phi(a, c, obs.h_gain, ic, 2))
    res.lines.append(f"interconnection horizon r={ic.horizon}")
    res.lines.append(f"charpoly = {poly}")
    res.check("charpoly matches", poly == ref.COUNTEREXAMPLE_PHI_CHARPOLY)
    res.check("not divisible by s^4", not poly.divisible_by_s_power(4))
    res.check("compatibility check fails", not check_linear_compatibility(a, c, ic, obs.p))


def _chaotic_observer_run(res: ReproductionResult, out_dir: str, k_max: int = 12) -> None:
    fam = chaotic_family(**ref.CHAOTIC_PARAMS)
    x = np.array(ref.CHAOTIC_X0)
    xhat = np.array(ref.CHAOTIC_XHAT0)
    rows, errors = [], []
    for k in range(k_max + 1):
        err = float(np.max(np.abs(xhat - x)))
        errors.append(err)
        rows.append([k, *map(repr, x.tolist()), *map(repr, xhat.tolist()), repr(err), int(err <= 1e-9)])
        xhat = fam.observer_step(xhat, fam.h(x))
        x = fam.f(x)
    path = os.path.join(out_dir, "fig-observer.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "x_1", "x_2", "x_3", "xhat_1", "xhat_2", "xhat_3", "error", "equal"])
        writer.writerows(rows)
    res.files.append(path)
    first = next((k for k in range(k_max + 1) if all(e <= 1e-9 for e in errors[k:])), None)
    res.lines.append(f"estimate equals state from k={first}")
    res.check("error <= 1e-9 for k = 3..12", all(e <= 1e-9 for e in errors[3:]))


def _cube_array_run(res: ReproductionResult, out_dir: str, k_max: int = 20) -> None:
    ic = cube_interconnection(validate_coupling(ref.FOUR_AGENT_G))
    spec = ArraySpec(4, FamilyDynamics(cube_family()), ic, ref.CUBE_SYNC_INITIAL)
    traj = simulate(spec, k_max)
    report = measure_sync(traj)
    path = os.path.join(out_dir, "fig-sync.csv")
    sync_path = os.path.join(out_dir, "fig-sync_sync.csv")
    write_trajectory_csv(traj, path)
    write_sync_csv(report, sync_path)
    res.files += [path, sync_path]
    res.lines.append(report.summary())
    res.check("bound r p = 9", report.bound_tau == ref.CUBE_SYNC_HORIZON)
    res.check("measured_tau <= 9", report.measured_tau is not None
              and report.measured_tau <= ref.CUBE_SYNC_HORIZON)
    res.check("disagreement <= 1e-7 for k = 9..20",
              all(d <= 1e-7 for d in report.per_step_disagreement[ref.CUBE_SYNC_HORIZON:]))


TARGETS: dict[str, Callable[[ReproductionResult, str], None]] = {
    "dbcoup-power": _coupling_power,
    "consensus-value": _consensus_value,
    "counterexample-H": _counterexample_h,
    "counterexample-phi": _counterexample_phi,
    "fig-observer": _chaotic_observer_run,
    "fig-sync": _cube_array_run,
}


def reproduce(target: str, out_dir: str = ".") -> list[ReproductionResult]:
    """Run one target, or every target for ``"all"``."""
    if target == "all":
        names = list(TARGETS)
    elif target in TARGETS:
        names = [target]
    else:
        raise UnknownTarget(f"unknown target {target!r}; choose from {', '.join(TARGETS)} or all")
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for name in names:
        res = ReproductionResult(name)
        TARGETS[name](res, out_dir)
        results.append(res)
    return results
