"""Random instance generators shared by the test modules."""

from __future__ import annotations

import random

from deadbeat.coupling import random_coupling
from deadbeat.linear_observer import random_observable_pair
from deadbeat.matrixcore import (
    RationalMatrix,
    inverse,
    random_fraction,
    random_nonsingular_matrix,
    random_rational_matrix,
    rank,
)

# (n, m) shapes for which the set-chain design succeeds on random data
OBSERVABLE_SHAPES = [(1, 1), (2, 1), (2, 2), (3, 1), (4, 1), (4, 2)]


def random_horizon(q: int, rng: random.Random, r_max: int = 4) -> int:
    return 1 if q == 1 else rng.randint(1, min(q - 1, r_max))


def random_nilpotent(n: int, rng: random.Random) -> RationalMatrix:
    """V U V^-1 with U strictly upper triangular, so the index varies from 1 to n."""
    u = [[random_fraction(rng) if j > i and rng.random() < 0.7 else 0 for j in range(n)]
         for i in range(n)]
    v = random_nonsingular_matrix(n, rng, max_num=3, denominators=(1,))
    return v @ RationalMatrix(u, cols=n) @ inverse(v)


def random_full_row_rank(m: int, n: int, rng: random.Random) -> RationalMatrix:
    while True:
        c = random_rational_matrix(m, n, rng)
        if rank(c) == m:
            return c


def kronecker_sync_instance(rng: random.Random):
    """(A, C, L, G, Q) with A - LC nilpotent, n <= 4, m <= 2, q <= 5."""
    n = rng.randint(1, 4)
    m = rng.randint(1, min(2, n))
    q = rng.randint(1, 5)
    c = random_full_row_rank(m, n, rng)
    l = random_rational_matrix(n, m, rng)
    a = random_nilpotent(n, rng) + l @ c
    g = random_coupling(q, random_horizon(q, rng), rng.randrange(2**32))
    qmat = random_nonsingular_matrix(m, rng)
    return a, c, l, g, qmat


def compatible_instance(rng: random.Random):
    """Set-chain observer with nonsingular A, nonsingular Q and a random deadbeat G, q <= 5."""
    n, m = rng.choice(OBSERVABLE_SHAPES)
    obs = random_observable_pair(n, m, rng)
    q = rng.randint(2, 5)
    g = random_coupling(q, random_horizon(q, rng), rng.randrange(2**32))
    return obs, g, random_nonsingular_matrix(m, rng)
