import random
from fractions import Fraction

import numpy as np
import pytest

from deadbeat.coupling import random_coupling, validate_coupling
from deadbeat.interconnect import (
    CycleDetected,
    DiagonalNotInvariant,
    InterconnectError,
    MultipleRoots,
    NotDeadbeat,
    check_cube_compatibility,
    check_linear_compatibility,
    cube_interconnection,
    diagonal_embedding,
    disagreement_matrix,
    kron_interconnection,
    kronecker_rearrangement,
    linear_horizon,
    raw_linear_interconnection,
    tree_interconnection,
    y_sigma_matrix,
)
from deadbeat.linear_observer import design_observer
from deadbeat.matrixcore import DimensionMismatch, RationalMatrix, rank, to_real
from deadbeat.reference_cases import (
    COUNTEREXAMPLE_A,
    COUNTEREXAMPLE_C,
    FOUR_AGENT_G,
    LEADER_FOLLOWER_G,
    NON_KRON_GAMMA,
)
from helpers import compatible_instance


def float_horizon(gamma: np.ndarray, q: int, m: int) -> int:
    """Smallest r with every block row of gamma^r equal, by float powers."""
    power = gamma.copy()
    for r in range(1, q * m + 1):
        blocks = power.reshape(q, m, q * m)
        if np.allclose(blocks, blocks[0], atol=1e-9):
            return r
        power = power @ gamma
    raise AssertionError("not deadbeat")


def test_disagreement_matrix_kernel_is_diagonal():
    d, e = disagreement_matrix(4, 2), diagonal_embedding(4, 2)
    assert d.shape == (6, 8) and e.shape == (8, 2)
    assert (d @ e).is_zero()
    assert rank(d) == 6
    assert disagreement_matrix(1, 3).shape == (0, 3)


def test_kron_interconnection_of_four_agent_example():
    qmat = RationalMatrix([[2, 1], [0, -1]])
    ic = kron_interconnection(FOUR_AGENT_G, qmat)
    assert (ic.q, ic.m, ic.horizon, ic.kind) == (4, 2, 3, "kron")
    assert ic.is_kron
    assert ic.horizon == float_horizon(to_real(ic.gamma), 4, 2)
    assert rank(kronecker_rearrangement(ic.gamma, 4, 2)) == 1


def test_non_kronecker_example():
    ic = raw_linear_interconnection(NON_KRON_GAMMA, 2, 2)
    assert ic.horizon == 2 == float_horizon(to_real(NON_KRON_GAMMA), 2, 2)
    assert not ic.is_kron
    assert rank(kronecker_rearrangement(NON_KRON_GAMMA, 2, 2)) > 1
    assert y_sigma_matrix(ic, 2).is_zero()
    assert not y_sigma_matrix(ic, 1).is_zero()


def test_diagonal_must_be_invariant():
    with pytest.raises(DiagonalNotInvariant):
        raw_linear_interconnection(RationalMatrix([[2, 0], [0, 1]]), 2, 1)


def test_averaging_is_not_deadbeat():
    with pytest.raises(NotDeadbeat):
        raw_linear_interconnection(RationalMatrix([["3/4", "1/4"], ["1/4", "3/4"]]), 2, 1)


def test_raw_shape_checked():
    with pytest.raises(DimensionMismatch):
        raw_linear_interconnection(RationalMatrix.identity(3), 2, 2)


def test_apply_exact_and_float_agree():
    ic = kron_interconnection(FOUR_AGENT_G, RationalMatrix.identity(1))
    y = [Fraction(1), Fraction(-1, 2), Fraction(3), Fraction(0)]
    exact = ic.apply(y)
    assert all(isinstance(v, Fraction) for v in exact)
    assert np.allclose([float(v) for v in exact], ic.apply(np.array([1.0, -0.5, 3.0, 0.0])))
    assert linear_horizon(ic) == 3


def tree_depth(parent):
    def depth(i):
        return 0 if parent[i] is None else 1 + depth(parent[i])
    return max(depth(i) for i in range(len(parent)))


@pytest.mark.parametrize("parent", [
    [None],
    [None, 0],
    [None, 0, 1],
    [None, 0, 0, 1, 3],
    [2, None, 1, 0],
])
def test_tree_horizon_is_depth(parent):
    ic = tree_interconnection(parent)
    assert ic.kind == "tree"
    assert ic.horizon == max(tree_depth(parent), 1)


def test_tree_with_vector_outputs():
    ic = tree_interconnection([None, 0, 1], m=2)
    assert ic.gamma.shape == (6, 6)
    assert ic.horizon == 2


@pytest.mark.parametrize("parent, error", [
    ([None, None], MultipleRoots),
    ([1, 0], CycleDetected),
    ([None, 2, 1], CycleDetected),
    ([None, 1], InterconnectError),
    ([None, 5], InterconnectError),
])
def test_tree_errors(parent, error):
    with pytest.raises(error):
        tree_interconnection(parent)


def test_cube_power_reaches_diagonal_in_three_steps():
    ic = cube_interconnection(FOUR_AGENT_G)
    assert ic.horizon == 3
    y = np.array([1.0, -1.0, 2.0, 0.0])
    for k in range(1, 7):
        y = ic.apply(y)
        spread = np.ptp(y)
        assert (spread <= 1e-12) == (k >= 3)


def test_counterexample_is_incompatible():
    obs = design_observer(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C)
    ic = raw_linear_interconnection(NON_KRON_GAMMA, 2, 2)
    assert not check_linear_compatibility(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C, ic, obs.p)


def test_kronecker_instances_are_compatible():
    rng = random.Random(99)
    for _ in range(10):
        obs, g, qmat = compatible_instance(rng)
        ic = kron_interconnection(g, qmat)
        assert check_linear_compatibility(obs.a, obs.c, ic, obs.p)


def test_horizon_one_is_always_compatible():
    obs = design_observer(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C)
    ic = kron_interconnection(LEADER_FOLLOWER_G, RationalMatrix([[1, 2], [3, 4]]))
    assert ic.horizon == 1
    assert check_linear_compatibility(obs.a, obs.c, ic, obs.p)


def test_compatibility_shape_check():
    ic = kron_interconnection(FOUR_AGENT_G, RationalMatrix.identity(1))
    with pytest.raises(DimensionMismatch):
        check_linear_compatibility(COUNTEREXAMPLE_A, COUNTEREXAMPLE_C, ic, 2)


def test_cube_compatibility_samples():
    assert check_cube_compatibility(validate_coupling(FOUR_AGENT_G))
    for seed in range(3):
        assert check_cube_compatibility(random_coupling(5, 3, seed), samples=5)
