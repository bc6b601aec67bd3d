"""Acceptance criteria 1-10.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.  Timed criteria use the median of repeated
runs after one warm-up call.
"""

import random
import statistics
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy

from deadbeat.array_sim import (
    ArraySpec,
    FamilyDynamics,
    LinearDynamics,
    build_phi,
    measure_sync,
    random_rational_states,
    simulate,
    verify_kronecker_sync,
    verify_cube_sync,
)
from deadbeat.coupling import random_coupling, validate_coupling
from deadbeat.interconnect import (
    check_linear_compatibility,
    cube_interconnection,
    kron_interconnection,
    raw_linear_interconnection,
)
from deadbeat.linear_observer import (
    LinearDeadbeatObserver,
    design_observer,
    observer_step_exact,
    subspace_chain,
)
from deadbeat.matrixcore import (
    Polynomial,
    RationalMatrix,
    charpoly,
    matpow,
    nilpotency_index,
    random_nonsingular_matrix,
    random_rational_matrix,
    rank,
)
from deadbeat.nonlinear_systems import chaotic_family, cube_family
from deadbeat.reference_cases import (
    COUNTEREXAMPLE_A,
    COUNTEREXAMPLE_C,
    COUNTEREXAMPLE_H,
    FOUR_AGENT_G,
    CHAOTIC_X0,
    CHAOTIC_XHAT0,
    CUBE_SYNC_INITIAL,
    NON_KRON_GAMMA,
)
from helpers import random_full_row_rank, random_horizon, kronecker_sync_instance, compatible_instance

ELL = [Fraction(1, 10), Fraction(-4, 5), Fraction(13, 10), Fraction(2, 5)]


def median_runtime(fn, runs=15):
    fn()
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def announce(number, ok, detail):
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")


def sympy_matrix(m):
    return sympy.Matrix(m.rows, m.cols, [sympy.Rational(v.numerator, v.denominator) for v in m.entries()])


@pytest.mark.criterion(1, "four-agent coupling: r = 3, l exact, G^3 rank one, < 1 ms")
def test_criterion_1_coupling_power():
    def work():
        cm = validate_coupling(FOUR_AGENT_G)
        return cm, matpow(cm.g, 3)

    cm, power = work()
    elapsed = median_runtime(work)
    # independent oracle: sympy matrix power
    oracle = sympy_matrix(FOUR_AGENT_G) ** 3
    expected = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in ELL]] * 4)
    ok = (cm.horizon_r == 3 and list(cm.left_eigvec_l) == ELL and oracle == expected
          and sympy_matrix(power) == expected and elapsed < 1e-3)
    announce(1, ok, f"r={cm.horizon_r}, {elapsed * 1e3:.3f} ms")
    assert cm.horizon_r == 3
    assert list(cm.left_eigvec_l) == ELL
    assert oracle == expected
    assert sympy_matrix(power) == expected
    assert elapsed < 1e-3


@pytest.mark.criterion(2, "consensus value 0.1y1 - 0.8y2 + 1.3y3 + 0.4y4 for k = 3..8, < 10 ms")
def test_criterion_2_consensus_value():
    one = RationalMatrix.identity(1)
    stacks = [random_rational_states(4, 1, random.Random(seed)) for seed in range(10)]

    def work():
        ic = kron_interconnection(validate_coupling(FOUR_AGENT_G), one)
        dyn = LinearDynamics(one, one, one)
        return [simulate(ArraySpec(4, dyn, ic, init), 8) for init in stacks]

    trajs = work()
    elapsed = median_runtime(work, runs=7)
    ok = True
    for init, traj in zip(stacks, trajs):
        y = [x[0] for x in init]
        value = Fraction(1, 10) * y[0] - Fraction(8, 10) * y[1] + Fraction(13, 10) * y[2] + Fraction(4, 10) * y[3]
        ok &= all(x == (value,) for k in range(3, 9) for x in traj.steps[k])
    announce(2, ok and elapsed < 1e-2, f"10 stacks, {elapsed * 1e3:.2f} ms")
    assert ok
    assert elapsed < 1e-2


@pytest.mark.criterion(3, "four-state observer: p = 2, H equivalent, A - AHC index 2")
def test_criterion_3_observer_gain():
    obs = design_observer(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C)
    reference = LinearDeadbeatObserver(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C, COUNTEREXAMPLE_H,
                                       COUNTEREXAMPLE_A @ COUNTEREXAMPLE_H, p=2)
    # the observer maps (xhat, y) -> A(xhat + H(y - C xhat)) agree on a basis of R^4 x R^2
    unit = [tuple(int(i == j) for j in range(6)) for i in range(6)]
    agree = all(observer_step_exact(obs, u[:4], u[4:]) == observer_step_exact(reference, u[:4], u[4:])
                for u in unit)
    index = nilpotency_index(COUNTEREXAMPLE_A - COUNTEREXAMPLE_A @ COUNTEREXAMPLE_H @ COUNTEREXAMPLE_C)
    ok = obs.p == 2 and agree and index == 2
    announce(3, ok, f"p={obs.p}, nilpotency index {index}")
    assert obs.p == 2
    assert agree
    assert index == 2


@pytest.mark.criterion(4, "closed-loop charpoly exact and not divisible by s^4")
def test_criterion_4_phi_charpoly():
    obs = design_observer(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C)
    phi = build_phi(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C, obs.h_gain, NON_KRON_GAMMA, 2)
    poly = charpoly(phi)
    expected = Polynomial.from_descending(["1", "-3.5", "-1.5", "11.5", "-2.5", "-8", "-2", "0", "0"])
    s = sympy.Symbol("s")
    oracle = sympy.Poly(sympy_matrix(phi).charpoly(s).as_expr(), s).all_coeffs()
    oracle_poly = Polynomial.from_descending(Fraction(int(c.p), int(c.q)) for c in oracle)
    ok = poly == expected == oracle_poly and not poly.divisible_by_s_power(4)
    announce(4, ok, str(poly))
    assert poly == expected
    assert oracle_poly == expected
    assert not poly.divisible_by_s_power(4)
    assert poly.valuation() == 2


@pytest.mark.criterion(5, "compatibility: 20 random Kronecker instances true, four-state triple false")
def test_criterion_5_compatibility():
    rng = random.Random(55)
    verdicts = []
    for _ in range(20):
        obs, g, qmat = compatible_instance(rng)
        assert rank(obs.a) == obs.n and rank(qmat) == qmat.rows
        verdicts.append(check_linear_compatibility(obs.a, obs.c, kron_interconnection(g, qmat), obs.p))
    ic = raw_linear_interconnection(NON_KRON_GAMMA, 2, 2)
    counter = check_linear_compatibility(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C, ic, 2)
    ok = all(verdicts) and not counter
    announce(5, ok, f"{sum(verdicts)}/20 compatible, triple -> {counter}")
    assert all(verdicts)
    assert counter is False


@pytest.mark.criterion(6, "chaotic observer: error <= 1e-9 for k = 3..12, < 1 ms")
def test_criterion_6_observer_figure():
    fam = chaotic_family(1.0, 1 / 3)

    def work():
        x, xhat = np.array(CHAOTIC_X0), np.array(CHAOTIC_XHAT0)
        errors = []
        for _ in range(13):
            errors.append(float(np.max(np.abs(xhat - x))))
            xhat = fam.observer_step(xhat, fam.h(x))
            x = fam.f(x)
        return errors

    errors = work()
    elapsed = median_runtime(work)
    worst = max(errors[3:])
    ok = worst <= 1e-9 and elapsed < 1e-3
    announce(6, ok, f"max error {worst:.1e}, {elapsed * 1e3:.3f} ms")
    assert worst <= 1e-9
    assert errors[2] > 1e-3
    assert elapsed < 1e-3


@pytest.mark.criterion(7, "cube array: disagreement <= 1e-7 for k = 9..20, measured_tau <= 9")
def test_criterion_7_sync_figure():
    spec = ArraySpec(4, FamilyDynamics(cube_family()), cube_interconnection(FOUR_AGENT_G), CUBE_SYNC_INITIAL)
    report = measure_sync(simulate(spec, 20), tol=1e-7)
    worst = max(report.per_step_disagreement[9:])
    ok = worst <= 1e-7 and report.measured_tau is not None and report.measured_tau <= 9
    announce(7, ok, f"measured_tau={report.measured_tau}, max late disagreement {worst:.1e}")
    assert len(report.per_step_disagreement) == 21
    assert worst <= 1e-7
    assert report.measured_tau <= 9


@pytest.mark.criterion(8, "Kronecker arrays: 50 random instances exact by rp, post-sync law, < 5 s")
def test_criterion_8_kronecker_sync_suite():
    rng = random.Random(8)
    start = time.perf_counter()
    reports = []
    for _ in range(50):
        a, c, l, g, qmat = kronecker_sync_instance(rng)
        reports.append(verify_kronecker_sync(a, c, l, g, qmat, trials=3, seed=rng.randrange(2**16)))
    elapsed = time.perf_counter() - start
    failed = [i for i, r in enumerate(reports) if not r.passed]
    announce(8, not failed and elapsed < 5, f"{50 - len(failed)}/50 instances, {elapsed:.2f} s")
    assert not failed
    assert all(r.law_holds for r in reports)
    assert elapsed < 5


@pytest.mark.criterion(9, "cube arrays: 10 couplings x 10 stacks, measured_tau <= rp at 1e-6, < 5 s")
def test_criterion_9_cube_sync_suite():
    rng = random.Random(9)
    fam = cube_family()
    start = time.perf_counter()
    reports = []
    for i in range(10):
        q = rng.randint(2, 6)
        g = random_coupling(q, random_horizon(q, rng, r_max=4), rng.randrange(2**32))
        reports.append(verify_cube_sync(fam, g, trials=10, seed=i, tol=1e-6))
    elapsed = time.perf_counter() - start
    diverged = sum(r.diverged for r in reports)
    ok = all(r.passed for r in reports) and diverged == 0 and elapsed < 5
    announce(9, ok, f"worst tau/bound {[(r.worst_tau, r.bound_tau) for r in reports]}, {elapsed:.2f} s")
    assert diverged == 0
    assert all(len(r.taus) == 10 for r in reports)
    assert all(r.passed for r in reports)
    assert elapsed < 5


@pytest.mark.criterion(10, "inverses, cube conjugacy, chain monotonicity, Cayley-Hamilton")
def test_criterion_10_invariants():
    nprng = np.random.default_rng(10)
    round_trip = 0.0
    for fam in (chaotic_family(), cube_family()):
        for x in nprng.uniform(-2, 2, size=(100, 3)):
            round_trip = max(round_trip, np.max(np.abs(fam.f_inv(fam.f(x)) - x)),
                             np.max(np.abs(fam.f(fam.f_inv(x)) - x)))

    ic = cube_interconnection(FOUR_AGENT_G)
    g = np.array([[float(v) for v in row] for row in FOUR_AGENT_G.tolist()])
    conjugacy = max(np.max(np.abs(ic.apply(y) ** 3 - g @ y**3))
                    for y in nprng.uniform(-2, 2, size=(100, 4)))

    rng = random.Random(10)
    monotone = True
    for _ in range(50):
        n = rng.randint(1, 5)
        m = rng.randint(1, n)
        chain = subspace_chain(random_nonsingular_matrix(n, rng), random_full_row_rank(m, n, rng))
        dims = chain.dims()
        monotone &= all(x > y for x, y in zip(dims, dims[1:]))
        monotone &= all(rank(RationalMatrix.hstack(prev, cur)) == prev.cols
                        for prev, cur in zip(chain.s, chain.s[1:]) if cur.cols)

    cayley = all(charpoly(m).eval_matrix(m).is_zero()
                 for n in range(1, 9) for m in (random_rational_matrix(n, n, rng) for _ in range(3)))

    ok = round_trip <= 1e-10 and conjugacy <= 1e-12 and monotone and cayley
    announce(10, ok, f"round trip {round_trip:.1e}, conjugacy {conjugacy:.1e}")
    assert round_trip <= 1e-10
    assert conjugacy <= 1e-12
    assert monotone
    assert cayley
