"""Matrices, initial conditions and reported values from the worked examples.

Expected values here are only used for comparison; every check recomputes
the quantity from the inputs above it.
"""

from __future__ import annotations

from fractions import Fraction

from .matrixcore import Polynomial, RationalMatrix

# four-agent deadbeat coupling matrix, horizon 3
FOUR_AGENT_G = RationalMatrix([
    ["0.4", "-0.2", "3.2", "-2.4"],
    ["0.4", "-0.2", "0.2", "0.6"],
    ["0.2", "-0.6", "0.6", "0.8"],
    ["0.3", "-0.4", "0.9", "0.2"],
])
FOUR_AGENT_HORIZON = 3
FOUR_AGENT_ELL = tuple(Fraction(v) for v in ("0.1", "-0.8", "1.3", "0.4"))

# linear interconnection for q = 2, m = 2 that is not a Kronecker product
NON_KRON_GAMMA = RationalMatrix([
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [1, 1, -1, 0],
])

# leader-follower coupling: both agents are driven by agent 1
LEADER_FOLLOWER_G = RationalMatrix([[1, 0], [1, 0]])

COUNTEREXAMPLE_A = RationalMatrix([
    [0, -1, 1, 0],
    [-1, 0, 0, -1],
    [1, 0, 0, 0],
    [-1, -1, -1, 1],
])
COUNTEREXAMPLE_C = RationalMatrix([
    [0, -1, 1, -1],
    [-1, 1, 0, 1],
])
COUNTEREXAMPLE_P = 2
COUNTEREXAMPLE_H = RationalMatrix([
    [-1, "-5/4"],
    [1, "6/4"],
    [0, "-1/4"],
    [-2, "-7/4"],
])
COUNTEREXAMPLE_PHI_CHARPOLY = Polynomial.from_descending(
    ["1", "-3.5", "-1.5", "11.5", "-2.5", "-8", "-2", "0", "0"]
)

CHAOTIC_PARAMS = {"a": 1.0, "b": 1 / 3}
CHAOTIC_X0 = (1.0, -1.0, 1.0)
CHAOTIC_XHAT0 = (0.0, 2.0, 1.0)

CUBE_SYNC_INITIAL = (
    (0.5, 0.5, 0.5),
    (0.0, -1.0, 0.0),
    (-0.5, 0.0, -0.5),
    (-1.0, 0.5, 0.0),
)
CUBE_SYNC_HORIZON = 9
