"""
Frequency sets that stay clear of the blind spots.

For ``eta`` in ``(0, 1/4)`` the safe cell is
``E~ = [-1/2 + eta, -eta] U [eta, 1/2 - eta]``, keeping away from the
singular frequencies ``{0, +-1/2}`` of ``B_m``.  Its image in the band is
``E = (2c/m)(E~ + Z) ∩ [-c, c]``.  Interval endpoints are kept as exact
fractions so measures come out exact for rational input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .kernel import KernelSpec, hat_derivative_min, periodize_hat


def _exact(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


def merge_intervals(intervals):
    """Sort and merge closed intervals that overlap or touch."""
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def measure(intervals) -> Fraction:
    return sum((b - a for a, b in merge_intervals(intervals)), Fraction(0))


@dataclass(frozen=True)
class BlindSpotSet:
    """Safe frequency sets for a given ``(c, m, eta)``.

    Attributes
    ----------
    E_tilde : tuple of (Fraction, Fraction)
        Safe part of the centred unit cell.
    E : tuple of (Fraction, Fraction)
        Safe part of the band ``[-c, c]``, sorted and disjoint.
    measure_E : Fraction
        Total length of ``E``; equals ``2c(1 - 4 eta)``.
    """

    c: Fraction
    m: int
    eta: Fraction
    E_tilde: tuple
    E: tuple
    measure_E: Fraction

    def intervals_float(self):
        return [(float(a), float(b)) for a, b in self.E]

    def contains_cell(self, xi) -> np.ndarray:
        """Whether ``xi`` folded into ``[-1/2, 1/2)`` lies in ``E~``."""
        x = np.asarray(xi, dtype=float)
        f = x - np.floor(x + 0.5)
        a = np.abs(f)
        eta = float(self.eta)
        return (a >= eta) & (a <= 0.5 - eta)

    def contains(self, u) -> np.ndarray:
        """Whether band frequencies ``u`` lie in ``E``."""
        u = np.asarray(u, dtype=float)
        hit = np.zeros(u.shape, dtype=bool)
        for a, b in self.E:
            hit |= (u >= float(a)) & (u <= float(b))
        return hit


def build_sets(c, m: int, eta) -> BlindSpotSet:
    """Safe sets for bandwidth ``c``, ``m`` cosets and margin ``eta``."""
    c, eta = _exact(c), _exact(eta)
    if not (0 < eta < Fraction(1, 4)):
        raise ValueError(f"eta must lie in (0, 1/4), got {eta}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    half = Fraction(1, 2)
    et = ((-half + eta, -eta), (eta, half - eta))
    scale = 2 * c / m
    pieces = []
    for n in range(-m - 1, m + 2):
        for a, b in et:
            lo, hi = max(scale * (a + n), -c), min(scale * (b + n), c)
            if lo <= hi:
                pieces.append((lo, hi))
    E = tuple(merge_intervals(pieces))
    return BlindSpotSet(c, int(m), eta, et, E, measure(E))


def coset_values(k: KernelSpec, m: int, xi):
    """``phi_p((2c/m)(xi + j))`` for j = 0..m-1; trailing axis indexes j."""
    x = np.asarray(xi, dtype=float)[..., None]
    return periodize_hat(k, (2 * k.c / m) * (x + np.arange(m)))


def omega(k: KernelSpec, m: int, xi):
    """Smallest gap between periodized kernel values over the ``m`` cosets."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    v = coset_values(k, m, xi)
    d = np.abs(v[..., :, None] - v[..., None, :])
    iu = np.triu_indices(m, 1)
    out = d[..., iu[0], iu[1]].min(axis=-1)
    return out if np.ndim(out) else float(out)


def delta_from_eta(k: KernelSpec, m: int, eta: float) -> float:
    """Guaranteed lower bound on ``omega`` over ``E~``.

    For ``xi`` in ``E~`` every coset point has modulus in
    ``[(2c/m) eta, c]`` and any two moduli differ by at least
    ``4 c eta / m``.  The mean value theorem then gives
    ``omega >= 4 c R eta / m`` with ``R`` the minimum of ``|phi_hat'|`` on
    that modulus range.
    """
    if not 0 < eta < 0.25:
        raise ValueError(f"eta must lie in (0, 1/4), got {eta}")
    c = k.c
    lo = 2 * c * eta / m
    R = hat_derivative_min(k, [(-c, -lo), (lo, c)])
    return 4 * c * R * eta / m


def show(bs: BlindSpotSet) -> str:
    lines = [f"[{float(a)!r},{float(b)!r}]" for a, b in bs.E]
    lines.append(f"measure {float(bs.measure_E)!r}")
    return "\n".join(lines)
