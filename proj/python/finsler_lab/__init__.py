"""(alpha, beta)-metric toolkit: sprays, Berwald curvature, classification checks."""

import json
from typing import Any, Dict, Iterable, List, Optional, Union

from . import _core
from ._core import DomainError, FinslerError, Instance, InputError, check_names, tool_version

__all__ = [
    "DomainError",
    "FinslerError",
    "InputError",
    "Instance",
    "builtin",
    "builtin_names",
    "check_names",
    "family",
    "inspect",
    "load",
    "regularity",
    "sweep",
    "tool_version",
    "verify",
]

InstanceLike = Union[Instance, Dict[str, Any], str]


def load(source: Union[Dict[str, Any], str]) -> Instance:
    """Instance from a dict, a JSON string, or ``builtin:<name>``."""
    if isinstance(source, dict):
        return _core.parse_instance(json.dumps(source))
    if source.startswith("builtin:"):
        return builtin(source[len("builtin:"):])
    return _core.parse_instance(source)


def _inst(x: InstanceLike) -> Instance:
    return x if isinstance(x, Instance) else load(x)


def builtin_names() -> List[str]:
    return list(_core.builtin_names())


def builtin(name: str) -> Instance:
    return _core.parse_instance(_core.builtin_json(name))


def family(name: str, params: Optional[Dict[str, Any]] = None, c: float = 0.1, dim: int = 3) -> Dict[str, Any]:
    """Instance dict for a family phi with Euclidean alpha and radial beta."""
    return json.loads(_core.family_json(name, json.dumps(params or {}), c, dim))


def verify(
    instance: InstanceLike,
    checks: Iterable[str] = (),
    samples: int = 50,
    seed: int = _core.default_seed,
    tol: Optional[Dict[str, float]] = None,
) -> Dict[str, Any]:
    return json.loads(_core.verify(_inst(instance), list(checks), samples, seed, tol or {}))


def inspect(instance: InstanceLike, samples: int = 50, seed: int = _core.default_seed) -> Dict[str, Any]:
    return json.loads(_core.inspect(_inst(instance), samples, seed))


def regularity(instance: InstanceLike, b0_probe: float, grid_density: int = 64) -> Dict[str, Any]:
    return json.loads(_core.regularity(_inst(instance), b0_probe, grid_density))


def sweep(instance: InstanceLike, quantity: str, b2: Iterable[float], s: Iterable[float]) -> List[float]:
    return list(_core.sweep(_inst(instance), quantity, list(b2), list(s)))
