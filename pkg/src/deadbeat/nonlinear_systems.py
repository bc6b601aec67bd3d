"""Two closed-form nonlinear systems with explicit deadbeat observers.

``chaotic``: f(x) = (1 + x2 - a x1^2, b x1 + x3, -b x1), h(x) = x3.
``cube``:    f(a, b, c) = (b, c^(1/3), a^3 + b^3),      h(x) = a.

Both observers have deadbeat horizon 3.  States are 1-D float arrays; all
cube roots use the real signed branch so that f is a bijection of R^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "FAMILIES",
    "SystemFamily",
    "ZeroB",
    "chaotic_family",
    "cube_family",
    "family_by_name",
    "signed_cbrt",
]

Map = Callable[[np.ndarray], np.ndarray]


class ZeroB(ValueError):
    pass


def signed_cbrt(x):
    """Real cube root, odd in x: sign(x) |x|^(1/3)."""
    return np.cbrt(x)


@dataclass(frozen=True)
class SystemFamily:
    name: str
    n: int
    m: int
    f: Map
    f_inv: Map
    h: Map
    observer_step: Callable[[np.ndarray, np.ndarray], np.ndarray]
    p: int
    params: dict = field(default_factory=dict)


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _scalar_output(y) -> float:
    y = np.asarray(y, dtype=float)
    return float(y.reshape(-1)[0]) if y.ndim else float(y)


def chaotic_family(a: float = 1.0, b: float = 1 / 3) -> SystemFamily:
    if b == 0:
        raise ZeroB("the chaotic map is only invertible for b != 0")

    def f(x):
        x1, x2, x3 = _vec(x)
        return np.array([1 + x2 - a * x1**2, b * x1 + x3, -b * x1])

    def f_inv(x):
        x1, x2, x3 = _vec(x)
        return np.array([-x3 / b, -1 + a * x3**2 / b**2 + x1, x2 + x3])

    def h(x):
        return _vec(x)[2:3]

    def observer_step(xhat, y):
        e1, e2, e3 = _vec(xhat)
        y = _scalar_output(y)
        shift = e3**2 - y**2
        return np.array([
            1 + e2 + e3 - y - a * (e1 + a / b**2 * shift) ** 2,
            b * e1 + a / b * shift + y,
            -b * e1 - a / b * shift,
        ])

    return SystemFamily("chaotic", 3, 1, f, f_inv, h, observer_step, p=3,
                        params={"a": a, "b": b})


def cube_family() -> SystemFamily:
    def f(x):
        a, b, c = _vec(x)
        return np.array([b, signed_cbrt(c), a**3 + b**3])

    def f_inv(x):
        a, b, c = _vec(x)
        return np.array([signed_cbrt(c - a**3), a, b**3])

    def h(x):
        return _vec(x)[0:1]

    def observer_step(xhat, y):
        # f applied to the single point (y, b, c - a^3 + y^3) of [xhat]_1^+ ∩ h^-1(y)
        a, b, c = _vec(xhat)
        y = _scalar_output(y)
        return np.array([b, signed_cbrt(c - a**3 + y**3), b**3 + y**3])

    return SystemFamily("cube", 3, 1, f, f_inv, h, observer_step, p=3)


FAMILIES = {"chaotic": chaotic_family, "cube": cube_family}


def family_by_name(name: str, params: dict | None = None) -> SystemFamily:
    try:
        factory = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown system family {name!r}; choose from {sorted(FAMILIES)}") from None
    return factory(**(params or {}))
