"""Built-in problem domains: generators, interfaces, and ground-truth tracers.

A domain bundles an interface definition, a seeded problem generator, and a
ground-truth model tracer that yields the exact correct-action set (with
unordered-group structure and formula annotations) for every reachable
state. The tracers are the oracle for evaluation and the knowledge source
for the simulated ideal tutor.
"""

from __future__ import annotations

from .base import CorrectStep, Domain, Problem
from .fractions import FractionsDomain
from .mc_addition import McAdditionDomain

_REGISTRY: dict[str, Domain] = {}


def register(domain: Domain) -> Domain:
    _REGISTRY[domain.domain_id] = domain
    return domain


register(McAdditionDomain(zero_carry=False))
register(McAdditionDomain(zero_carry=True))
register(FractionsDomain())

DOMAIN_IDS = tuple(sorted(_REGISTRY))


def get_domain(domain_id: str) -> Domain:
    try:
        return _REGISTRY[domain_id]
    except KeyError:
        raise KeyError(
            f"unknown domain {domain_id!r}; known: {', '.join(DOMAIN_IDS)}"
        ) from None


__all__ = [
    "CorrectStep",
    "DOMAIN_IDS",
    "Domain",
    "FractionsDomain",
    "McAdditionDomain",
    "Problem",
    "get_domain",
    "register",
]
