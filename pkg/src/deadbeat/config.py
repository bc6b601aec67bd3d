"""JSON scenario configs for the ``simulate`` command.

Example::

    {
      "name": "cube-array",
      "dynamics": {"kind": "family", "family": "cube"},
      "interconnection": {"kind": "cube", "g": [["0.4", "-0.2", "3.2", "-2.4"], ...]},
      "initial": [["0.5", "0.5", "0.5"], ...],
      "k_max": 20,
      "tol": 1e-7
    }

Matrices are nested lists of rational strings, or a single string in the
plain-text matrix format.  Dynamics kinds: ``linear`` (``a``, ``c`` and an
optional ``l``; without ``l`` the set-chain observer gain is designed) and
``family`` (``family`` name plus ``params``).  Interconnection kinds:
``kron`` (``g``, optional ``q_matrix``), ``raw`` (``gamma``, optional
``m``), ``cube`` (``g``) and ``tree`` (``parent`` list, 0-based, ``null``
for the root).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .array_sim import ArraySpec, FamilyDynamics, LinearDynamics, random_rational_states
from .coupling import validate_coupling
from .interconnect import (
    cube_interconnection,
    kron_interconnection,
    raw_linear_interconnection,
    tree_interconnection,
)
from .linear_observer import design_observer
from .matrixcore import RationalMatrix, as_fraction, parse_matrix
from .nonlinear_systems import FAMILIES, family_by_name

__all__ = ["ConfigError", "ScenarioConfig", "load_config"]

DYNAMICS_KINDS = ("linear", "family")
INTERCONNECTION_KINDS = ("kron", "raw", "cube", "tree")


class ConfigError(ValueError):
    """Malformed config; the message names the offending field."""


def _matrix(value: Any, where: str) -> RationalMatrix:
    try:
        if isinstance(value, str):
            return parse_matrix(value)
        if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
            raise ValueError("expected a list of rows or a matrix string")
        return RationalMatrix(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _matrix_json(m: RationalMatrix | None):
    return None if m is None else [[str(v) for v in row] for row in m.tolist()]


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}.{key}: missing")
    return d[key]


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    dynamics_kind: str
    interconnection_kind: str
    a: RationalMatrix | None = None
    c: RationalMatrix | None = None
    l: RationalMatrix | None = None
    family: str | None = None
    params: tuple[tuple[str, Fraction], ...] = ()
    g: RationalMatrix | None = None
    q_matrix: RationalMatrix | None = None
    gamma: RationalMatrix | None = None
    m: int | None = None
    parent: tuple[int | None, ...] | None = None
    initial: tuple[tuple[Fraction, ...], ...] | None = None
    k_max: int | None = None
    tol: float | None = None
    seed: int = 0
    output: str | None = None

    # -- parsing --------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: expected a JSON object")
        dyn = _require(data, "dynamics", "config")
        ic = _require(data, "interconnection", "config")
        if not isinstance(dyn, dict) or not isinstance(ic, dict):
            raise ConfigError("config: dynamics and interconnection must be objects")
        kw: dict[str, Any] = {"name": str(data.get("name", "scenario"))}

        kind = _require(dyn, "kind", "dynamics")
        if kind not in DYNAMICS_KINDS:
            raise ConfigError(f"dynamics.kind: expected one of {DYNAMICS_KINDS}, got {kind!r}")
        kw["dynamics_kind"] = kind
        if kind == "linear":
            kw["a"] = _matrix(_require(dyn, "a", "dynamics"), "dynamics.a")
            kw["c"] = _matrix(_require(dyn, "c", "dynamics"), "dynamics.c")
            if dyn.get("l") is not None:
                kw["l"] = _matrix(dyn["l"], "dynamics.l")
        else:
            kw["family"] = str(_require(dyn, "family", "dynamics"))
            if kw["family"] not in FAMILIES:
                raise ConfigError(f"dynamics.family: expected one of {sorted(FAMILIES)}, got {kw['family']!r}")
            params = dyn.get("params") or {}
            if not isinstance(params, dict):
                raise ConfigError("dynamics.params: expected an object")
            try:
                kw["params"] = tuple(sorted((k, as_fraction(v)) for k, v in params.items()))
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise ConfigError(f"dynamics.params: {exc}") from None

        ikind = _require(ic, "kind", "interconnection")
        if ikind not in INTERCONNECTION_KINDS:
            raise ConfigError(
                f"interconnection.kind: expected one of {INTERCONNECTION_KINDS}, got {ikind!r}")
        kw["interconnection_kind"] = ikind
        if ikind in ("kron", "cube"):
            kw["g"] = _matrix(_require(ic, "g", "interconnection"), "interconnection.g")
        if ikind == "kron" and ic.get("q_matrix") is not None:
            kw["q_matrix"] = _matrix(ic["q_matrix"], "interconnection.q_matrix")
        if ikind == "raw":
            kw["gamma"] = _matrix(_require(ic, "gamma", "interconnection"), "interconnection.gamma")
        if ikind == "tree":
            parent = _require(ic, "parent", "interconnection")
            if not isinstance(parent, list) or not all(p is None or isinstance(p, int) for p in parent):
                raise ConfigError("interconnection.parent: expected a list of integers or null")
            kw["parent"] = tuple(parent)
        if ic.get("m") is not None:
            kw["m"] = int(ic["m"])

        if data.get("initial") is not None:
            init = data["initial"]
            try:
                kw["initial"] = tuple(tuple(as_fraction(v) for v in s) for s in init)
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise ConfigError(f"initial: {exc}") from None
        for key, conv in (("k_max", int), ("tol", float), ("seed", int), ("output", str)):
            if data.get(key) is not None:
                try:
                    kw[key] = conv(data[key])
                except (TypeError, ValueError):
                    raise ConfigError(f"{key}: cannot read {data[key]!r}") from None
        return cls(**kw)

    def to_dict(self) -> dict:
        dyn: dict[str, Any] = {"kind": self.dynamics_kind}
        if self.dynamics_kind == "linear":
            dyn.update(a=_matrix_json(self.a), c=_matrix_json(self.c))
            if self.l is not None:
                dyn["l"] = _matrix_json(self.l)
        else:
            dyn["family"] = self.family
            dyn["params"] = {k: str(v) for k, v in self.params}
        ic: dict[str, Any] = {"kind": self.interconnection_kind}
        for key in ("g", "q_matrix", "gamma"):
            if getattr(self, key) is not None:
                ic[key] = _matrix_json(getattr(self, key))
        if self.parent is not None:
            ic["parent"] = list(self.parent)
        if self.m is not None:
            ic["m"] = self.m
        out: dict[str, Any] = {"name": self.name, "dynamics": dyn, "interconnection": ic}
        if self.initial is not None:
            out["initial"] = [[str(v) for v in s] for s in self.initial]
        for key in ("k_max", "tol", "output"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        out["seed"] = self.seed
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    # -- building -------------------------------------------------------

    def build_dynamics(self):
        if self.dynamics_kind == "linear":
            l = self.l if self.l is not None else design_observer(self.a, self.c).l_gain
            return LinearDynamics(self.a, self.c, l)
        params = {k: float(v) for k, v in self.params}
        try:
            return FamilyDynamics(family_by_name(self.family, params))
        except TypeError as exc:
            raise ConfigError(f"dynamics.params: {exc}") from None

    def build_interconnection(self, m: int):
        m = self.m if self.m is not None else m
        kind = self.interconnection_kind
        if kind == "kron":
            qmat = self.q_matrix if self.q_matrix is not None else RationalMatrix.identity(m)
            return kron_interconnection(validate_coupling(self.g), qmat)
        if kind == "cube":
            return cube_interconnection(validate_coupling(self.g))
        if kind == "raw":
            if self.gamma.rows % m:
                raise ConfigError(f"interconnection.gamma: {self.gamma.rows} rows not a multiple of m={m}")
            return raw_linear_interconnection(self.gamma, self.gamma.rows // m, m)
        return tree_interconnection(list(self.parent), m)

    def build(self) -> ArraySpec:
        dyn = self.build_dynamics()
        ic = self.build_interconnection(dyn.m)
        initial = self.initial
        if initial is None:
            if isinstance(dyn, LinearDynamics):
                initial = random_rational_states(ic.q, dyn.n, random.Random(self.seed))
            else:
                initial = np.random.default_rng(self.seed).uniform(-1, 1, (ic.q, dyn.n)).tolist()
        elif isinstance(dyn, FamilyDynamics):
            initial = [[float(v) for v in s] for s in initial]
        return ArraySpec(ic.q, dyn, ic, initial)


def load_config(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return ScenarioConfig.from_dict(data)
