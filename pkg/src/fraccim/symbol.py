"""Laplace-domain symbol m(z), source transforms and the scalar resolvent.

Transforming the equation in time turns the Caputo derivative and the
memory integral into the single shift

    m(z) = z**(alpha + beta) / (z**alpha + 1),

so that u_hat(z) = (m I + A)^{-1} (m/z u0 + m/z**beta f_hat(z)).
All powers use the principal branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .contour import FractionalOrders
from .errors import DomainError, ResolventSingular, SingularPoint


@dataclass(frozen=True)
class KernelValue:
    z: complex
    m: complex
    shift: complex  # 1 + z**(-alpha), multiplies the stiffness operator


def _check_nonzero(z):
    if np.any(np.asarray(z) == 0):
        raise SingularPoint("m(z) is singular at z = 0")


def kernel(z, orders: FractionalOrders) -> KernelValue:
    _check_nonzero(z)
    za = np.power(z, orders.alpha)
    m = np.power(z, orders.order_sum) / (za + 1.0)
    shift = 1.0 + 1.0 / za
    return KernelValue(z=z, m=m, shift=shift)


def sector_check(z, orders: FractionalOrders, debug: bool = False) -> bool:
    """True iff |arg z| is below the resolvent sector angle.

    With ``debug`` set, also asserts that m(z) lies in its image sector.
    """
    _check_nonzero(z)
    inside = abs(np.angle(z)) < orders.sector_angle
    if debug and inside:
        m = kernel(z, orders).m
        assert abs(np.angle(m)) < orders.symbol_angle, (z, m)
    return bool(inside)


@dataclass(frozen=True)
class PowerTerm:
    """One term ``coefficient * profile(x) * t**exponent`` of a source."""

    profile: Any
    coefficient: float
    exponent: float

    def __post_init__(self):
        if not self.exponent > -1.0:
            raise DomainError(f"exponent must exceed -1 for a Laplace transform, got {self.exponent}")


@dataclass(frozen=True)
class PowerLawSource:
    terms: tuple[PowerTerm, ...] = ()

    @classmethod
    def of(cls, *terms):
        return cls(tuple(PowerTerm(*t) if not isinstance(t, PowerTerm) else t for t in terms))


class TransformedSource:
    """Laplace transform of a :class:`PowerLawSource`, term by term.

    ``L{t**g} = Gamma(g + 1) / z**(g + 1)``. Spatial profiles are carried
    along untouched; callers that work on a mesh pass projected profiles to
    :meth:`evaluate`.
    """

    def __init__(self, terms: Sequence[PowerTerm]):
        self.terms = tuple(terms)
        self._scale = np.array([t.coefficient * math.gamma(t.exponent + 1.0) for t in self.terms])
        self._powers = np.array([-t.exponent - 1.0 for t in self.terms])

    def __len__(self):
        return len(self.terms)

    @property
    def profiles(self):
        return [t.profile for t in self.terms]

    def weights(self, z):
        """Per-term complex factors ``coefficient * Gamma(g+1) * z**(-g-1)``."""
        return self._scale * np.power(complex(z), self._powers)

    def evaluate(self, z, profiles=None):
        if profiles is None:
            profiles = self.profiles
        out = 0.0
        for w, p in zip(self.weights(z), profiles):
            out = out + w * p
        return out


def transform_source(src: PowerLawSource) -> TransformedSource:
    return TransformedSource(src.terms)


def scalar_resolvent(z, orders: FractionalOrders, u0, f_hat):
    """(m(z) + 1)^{-1} (m/z u0 + m/z**beta f_hat): the transform for A = 1."""
    m = kernel(z, orders).m
    den = m + 1.0
    if abs(den) <= 1e-14 * max(1.0, abs(m)):
        raise ResolventSingular(f"m(z) + 1 vanishes at z={z!r}")
    return (m / z * u0 + m / np.power(z, orders.beta) * f_hat) / den
