"""Named cut-continuous functionals of step graphons.

The registry maps names to factories so the CLI and the enumeration/counting
layers can refer to functionals by (name, params). Subgraph densities carry
an analytic block-value gradient for the variational solvers.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, UnknownFunctional
from .graphon import (
    StepGraphon,
    SubgraphPattern,
    subgraph_density,
    subgraph_density_gradient,
)


class Functional:
    """A functional on step graphons, optionally differentiable in the values."""

    name = "functional"

    def value(self, w: StepGraphon) -> float:
        raise NotImplementedError

    def gradient(self, w: StepGraphon) -> np.ndarray:
        """d value / d values with table entries treated as independent."""
        raise NotImplementedError

    @property
    def differentiable(self) -> bool:
        try:
            self.gradient  # noqa: B018
        except NotImplementedError:
            return False
        return type(self).gradient is not Functional.gradient


class SubgraphDensityFunctional(Functional):
    def __init__(self, pattern: SubgraphPattern, name: str | None = None):
        self.pattern = pattern
        self.name = name or f"subgraph_density_{pattern.num_vertices}v"

    def value(self, w: StepGraphon) -> float:
        return subgraph_density(self.pattern, w)

    def gradient(self, w: StepGraphon) -> np.ndarray:
        return subgraph_density_gradient(self.pattern, w)


class ConstantFunctional(Functional):
    def __init__(self, c: float):
        self.c = float(c)
        self.name = f"constant_{self.c:g}"

    def value(self, w: StepGraphon) -> float:
        return self.c

    def gradient(self, w: StepGraphon) -> np.ndarray:
        return np.zeros_like(w.values)


def _edge_factory(params):
    return SubgraphDensityFunctional(SubgraphPattern.edge(), "edge_density")


def _triangle_factory(params):
    return SubgraphDensityFunctional(SubgraphPattern.triangle(), "triangle_density")


def _cycle_factory(params):
    length = int(params.get("length", 4))
    if length < 3:
        raise InvalidInput("cycle length must be at least 3")
    return SubgraphDensityFunctional(
        SubgraphPattern.cycle(length), f"cycle{length}_density"
    )


def _subgraph_factory(params):
    try:
        vertices = int(params["vertices"])
        edges = tuple((int(u), int(v)) for u, v in params["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(
            "subgraph_density needs params {'vertices': k, 'edges': [[u,v],...]}"
        ) from exc
    return SubgraphDensityFunctional(SubgraphPattern(vertices, edges))


def _constant_factory(params):
    return ConstantFunctional(float(params.get("value", 0.0)))


_REGISTRY = {
    "edge_density": _edge_factory,
    "triangle_density": _triangle_factory,
    "cycle_density": _cycle_factory,
    "subgraph_density": _subgraph_factory,
    "constant": _constant_factory,
}


def register_functional(name: str, factory) -> None:
    """Register a factory(params_dict) -> Functional under a new name."""
    _REGISTRY[name] = factory


def functional_names():
    return sorted(_REGISTRY)


def make_functional(name: str, params: dict | None = None) -> Functional:
    if name not in _REGISTRY:
        raise UnknownFunctional(
            f"unknown functional {name!r}; known: {', '.join(functional_names())}"
        )
    return _REGISTRY[name](params or {})


def resolve_functional(tau, params: dict | None = None) -> Functional:
    """Accept a Functional, a registry name, or a bare callable."""
    if isinstance(tau, Functional):
        return tau
    if isinstance(tau, str):
        return make_functional(tau, params)
    if callable(tau):
        fn = tau

        class _Wrapped(Functional):
            name = getattr(fn, "__name__", "callable")

            def value(self, w: StepGraphon) -> float:
                return float(fn(w))

        return _Wrapped()
    raise InvalidInput("functional must be a name, a Functional, or a callable")
