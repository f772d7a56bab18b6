"""
Irregular sampling sets: energy of the diffused sinc, gap and density bounds.

The energy ``int_0^L |(sinc(c.) * phi_t)(x)|^2 dt`` is bounded below near
the origin and decays like ``1/(1 + x^2)``.  Together with frame bounds
``A <= B`` of a sampling set these give a maximal gap ``R`` and bounds on
the lower and upper Beurling densities.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .kernel import KernelSpec, eval_hat, kappa, sup_hat_derivative


@dataclass(frozen=True)
class DecayConstants:
    """Lower and decay constants of the sinc-flow energy.

    Attributes
    ----------
    c_lower : float
        Energy lower bound on ``|x| <= pi/(2c)``.
    C_upper : float
        Constant with ``(1 + x^2) * energy <= C_upper`` for all ``x``.
    L : float
    E_phi : float
        ``sup |phi_hat'|`` on the band.
    tail : float
        The cubic term bounding ``x^2 * energy``.
    packaged_C, packaged_c : float or None
        Closed-form Gaussian constants, when the kernel is Gaussian.
    """

    c_lower: float
    C_upper: float
    L: float
    E_phi: float
    tail: float
    packaged_C: float | None = None
    packaged_c: float | None = None


@dataclass(frozen=True)
class SamplingSet:
    points: tuple
    window: tuple
    tag: str = ""

    def __post_init__(self):
        p = self.points
        if any(b <= a for a, b in zip(p, p[1:])):
            raise ValueError("points must be sorted and distinct")

    def density(self) -> float:
        a, b = self.window
        return len(self.points) / (b - a)


def sinc_flow_energy(k: KernelSpec, L: float, x, n_t: int = 64) -> np.ndarray:
    """``int_0^L |(1/2c) int_{-c}^{c} phi_hat^t(xi) e^{i x xi} dxi|^2 dt``."""
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    c = k.c
    x = np.atleast_1d(np.asarray(x, dtype=float))
    panels = max(2, math.ceil(np.max(np.abs(x), initial=0.0) * c / math.pi) + 2)
    g, gw = npleg.leggauss(32)
    edges = np.linspace(-c, c, panels + 1)
    half = (edges[1] - edges[0]) / 2
    xi = (edges[:-1, None] + half * (g[None, :] + 1)).ravel()
    wxi = np.tile(gw * half, panels)
    tn, tw = npleg.leggauss(n_t)
    t = L * (tn + 1) / 2
    tw = L * tw / 2
    phase = np.exp(1j * np.multiply.outer(xi, x))
    out = np.zeros(x.shape)
    for ti, wi in zip(t, tw):
        inner = (np.asarray(eval_hat(k, xi, ti)) * wxi) @ phase / (2 * c)
        out += wi * np.abs(inner) ** 2
    return out


def decay_constants(k: KernelSpec, L: float) -> DecayConstants:
    """Constants bounding the sinc-flow energy from below and above.

    ``C_upper = max(1, L) + tail`` where ``max(1, L)`` bounds the energy
    itself (each time slice has modulus at most 1) and ``tail`` bounds
    ``x^2`` times the energy by integrating by parts in frequency.
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    E = sup_hat_derivative(k)
    if not math.isfinite(E):
        raise ValueError(f"{k.family} kernel has unbounded derivative on the band")
    kap = kappa(k)
    c = k.c
    u = -math.log(kap)
    # 2 (kap^{2L} - 1) / (pi^2 ln kap), stable as kap -> 1
    c_lower = (2 / math.pi ** 2) * (-math.expm1(-2 * L * u) / u if u > 1e-12 else 2 * L)
    if E == 0:
        tail = L / c ** 2
    else:
        tail = kap / (3 * E) * ((1 / c + E * L / kap) ** 3 - 1 / c ** 3)
    pc = pC = None
    if k.family == "gaussian":
        s = k.param
        sc2 = (s * c) ** 2
        pC = 1 / c ** 3 + (1 + s * s * math.exp(sc2)) * L ** 3
        pc = 2 * (-math.expm1(-2 * L * sc2)) / (math.pi ** 2 * sc2)
    return DecayConstants(c_lower, max(1.0, L) + tail, L, E, tail, pC, pc)


def max_gap_bound(A: float, B: float, k: KernelSpec, L: float, packaged: bool = True):
    """Maximal gap and density bounds for a sampling set with frame bounds ``A <= B``.

    Returns
    -------
    (R, D_minus_lower, D_plus_upper)
        Every interval of length ``2R`` meets the set;
        ``D^- >= D_minus_lower`` and ``D^+ <= D_plus_upper``.
        Gaussian kernels use the closed-form constants unless
        ``packaged=False``.
    """
    if A <= 0:
        raise ValueError(f"A must be positive, got {A}")
    if B < A:
        raise ValueError(f"need B >= A, got A={A}, B={B}")
    dc = decay_constants(k, L)
    if packaged and dc.packaged_C is not None:
        C, lo = dc.packaged_C, dc.packaged_c
    else:
        C, lo = dc.C_upper, dc.c_lower
    c = k.c
    R = max(math.pi / c, (8 * c / math.pi) * (B / A) * (C / lo))
    d_minus = min(c / (2 * math.pi), (math.pi / (16 * c)) * (A / B) * (lo / C))
    d_plus = 4 * B / lo
    return R, d_minus, d_plus


def covering_number(S: SamplingSet, c: float) -> int:
    """Largest number of points in a closed interval of length ``pi/(2c)`` inside the window."""
    width = math.pi / (2 * c)
    a, b = S.window
    if b - a < width:
        raise ValueError("window shorter than pi/(2c)")
    pts = list(S.points)
    best = 0
    starts = [p for p in pts if p + width <= b] + [b - width]
    for s in starts:
        if s < a:
            continue
        n = bisect.bisect_right(pts, s + width) - bisect.bisect_left(pts, s)
        best = max(best, n)
    return best


def lu_vetterli_set(m: int, n: int, window=(0.0, 1e4)) -> SamplingSet:
    """Union of ``mZ`` and ``mnZ + k``, k = 1..(m-1)/2, inside ``window``."""
    if m % 2 == 0 or n % 2 == 0:
        raise ValueError("m and n must be odd")
    if m < 3:
        raise ValueError(f"m must be >= 3, got {m}")
    a, b = window
    pts = set()
    for step, offsets in ((m, [0]), (m * n, range(1, (m - 1) // 2 + 1))):
        for off in offsets:
            first = math.ceil((a - off) / step)
            last = math.floor((b - off) / step)
            pts.update(step * j + off for j in range(first, last + 1))
    return SamplingSet(tuple(sorted(pts)), (a, b), f"lu-vetterli m={m} n={n}")


def lu_vetterli_density(m: int, n: int) -> float:
    """Exact density ``1/m + (m-1)/(2mn)`` of the periodic set."""
    return 1 / m + (m - 1) / (2 * m * n)


def density_estimate(S: SamplingSet, period: float | None = None) -> dict:
    """Window density with a reliability flag (window at least one period long)."""
    a, b = S.window
    out = {"count": len(S.points), "length": b - a, "density": S.density()}
    if period is not None:
        out["reliable"] = (b - a) >= period
    return out


VERIFY_HEADER = ["x", "energy", "lower_ok", "upper_ok"]


def verify_rows(k: KernelSpec, L: float, xs):
    dc = decay_constants(k, L)
    e = sinc_flow_energy(k, L, xs)
    rows = []
    for x, v in zip(np.atleast_1d(xs), e):
        near = abs(x) <= math.pi / (2 * k.c)
        lower = ("1" if v >= dc.c_lower else "0") if near else "na"
        upper = "1" if (1 + x * x) * v <= dc.C_upper else "0"
        rows.append((float(x), float(v), lower, upper))
    return rows


def write_verify_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(VERIFY_HEADER)
    for x, v, lo, up in rows:
        w.writerow([format(x, ".17g"), format(v, ".17g"), lo, up])
