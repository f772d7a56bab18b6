"""
Diffusion kernels on the Fourier side.

A kernel is described by its Fourier transform ``phi_hat`` on the band
``[-c, c]``.  Admissible kernels satisfy ``phi_hat(0) = 1`` and
``0 < kappa <= phi_hat <= 1`` on the band; the time-``t`` state of the
semigroup is ``phi_hat ** t``.

Built-in families
-----------------
gaussian    phi_hat(xi) = exp(-sigma**2 * xi**2)      (heat flow)
fractional  phi_hat(xi) = exp(-|xi|**alpha), 0 < alpha <= 1
poisson     phi_hat(xi) = exp(-y * |xi|)              (harmonic extension)
tabulated   even, monotone-cubic interpolation of samples on [0, c]
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

FAMILIES = ("gaussian", "fractional", "poisson", "tabulated")


class KernelError(ValueError):
    """Raised for kernels outside the admissible class or invalid queries."""


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of a diffusion kernel.

    Use the ``gaussian``/``fractional``/``poisson``/``tabulated``
    constructors rather than calling the class directly.
    """

    family: str
    c: float
    param: float | None = None
    table_xi: tuple[float, ...] | None = None
    table_phi: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise KernelError(f"bandwidth c must be positive, got {self.c}")
        p = self.param
        if self.family == "gaussian":
            if p is None or p == 0 or not math.isfinite(p):
                raise KernelError("gaussian kernel needs sigma != 0")
        elif self.family == "fractional":
            if p is None or not (0 < p <= 1):
                raise KernelError("fractional kernel needs alpha in (0, 1]")
        elif self.family == "poisson":
            if p is None or not (p > 0 and math.isfinite(p)):
                raise KernelError("poisson kernel needs y > 0")
        else:
            self._check_table()

    def _check_table(self):
        xi, phi = self.table_xi, self.table_phi
        if xi is None or phi is None or len(xi) != len(phi) or len(xi) < 2:
            raise KernelError("tabulated kernel needs matching xi/phi samples")
        x = np.asarray(xi, dtype=float)
        y = np.asarray(phi, dtype=float)
        if x[0] != 0.0 or not np.all(np.diff(x) > 0):
            raise KernelError("tabulated xi must increase strictly from 0")
        if not math.isclose(x[-1], self.c, rel_tol=1e-12, abs_tol=0.0):
            raise KernelError(f"tabulated xi must end at c={self.c}, got {x[-1]}")
        if np.any(y <= 0):
            raise KernelError("tabulated phi_hat must be positive on [0, c]")
        if np.any(y > 1 + 1e-12) or abs(y[0] - 1.0) > 1e-12:
            raise KernelError("tabulated phi_hat must satisfy phi_hat(0)=1 <= 1")

    # -- constructors -----------------------------------------------------

    @classmethod
    def gaussian(cls, sigma: float, c: float) -> "KernelSpec":
        return cls("gaussian", float(c), float(sigma))

    @classmethod
    def fractional(cls, alpha: float, c: float) -> "KernelSpec":
        return cls("fractional", float(c), float(alpha))

    @classmethod
    def poisson(cls, y: float, c: float) -> "KernelSpec":
        return cls("poisson", float(c), float(y))

    @classmethod
    def tabulated(cls, xi, phi, c: float | None = None) -> "KernelSpec":
        xi = tuple(float(v) for v in xi)
        phi = list(float(v) for v in phi)
        if phi:
            # phi_hat(0) = 1 exactly
            if abs(phi[0] - 1.0) <= 1e-12:
                phi[0] = 1.0
            phi = [min(v, 1.0) if v <= 1 + 1e-12 else v for v in phi]
        if c is None:
            c = xi[-1] if xi else 0.0
        return cls("tabulated", float(c), None, xi, tuple(phi))

    @classmethod
    def from_csv(cls, path, c: float | None = None) -> "KernelSpec":
        """Load a two-column ``xi,phi_hat`` CSV (header required)."""
        with open(Path(path), newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            if header != ["xi", "phi_hat"]:
                raise KernelError(f"expected header 'xi,phi_hat', got {header}")
            rows = [(float(a), float(b)) for a, b in reader if a.strip()]
        xi, phi = zip(*rows)
        return cls.tabulated(xi, phi, c)

    def with_param(self, value: float) -> "KernelSpec":
        """Same family and band, different family parameter."""
        if self.family == "tabulated":
            raise KernelError("tabulated kernels have no scalar parameter")
        return KernelSpec(self.family, self.c, float(value))

    @cached_property
    def _pchip(self) -> PchipInterpolator:
        return PchipInterpolator(np.asarray(self.table_xi), np.asarray(self.table_phi),
                                 extrapolate=False)

    @property
    def smooth_at_zero(self) -> bool:
        """Whether phi_hat is differentiable at 0."""
        if self.family == "gaussian":
            return True
        if self.family == "tabulated":
            return abs(float(self._pchip(0.0, 1))) <= 1e-12
        return False

    def __repr__(self):
        if self.family == "tabulated":
            return f"KernelSpec(tabulated, c={self.c}, n={len(self.table_xi)})"
        return f"KernelSpec({self.family}, param={self.param}, c={self.c})"


def _tab_values(k: KernelSpec, xi):
    a = np.abs(np.asarray(xi, dtype=float))
    if np.any(a > k.c * (1 + 1e-14)):
        raise KernelError("tabulated kernel evaluated outside [-c, c]")
    return k._pchip(np.minimum(a, k.c))


def psi_exponent(k: KernelSpec, xi):
    """Exponent ``psi = -ln phi_hat``; nonnegative with ``psi(0) = 0``."""
    x = np.asarray(xi, dtype=float)
    if k.family == "gaussian":
        out = (k.param * x) ** 2
    elif k.family == "fractional":
        out = np.abs(x) ** k.param
    elif k.family == "poisson":
        out = k.param * np.abs(x)
    else:
        out = -np.log(_tab_values(k, x))
        out = np.maximum(out, 0.0)
    return out if np.ndim(out) else float(out)


def eval_hat(k: KernelSpec, xi, t: float = 1.0):
    """``phi_hat(xi) ** t`` for ``t >= 0``."""
    if t < 0:
        raise KernelError(f"time must be nonnegative, got {t}")
    out = np.exp(-t * np.asarray(psi_exponent(k, xi)))
    return out if np.ndim(out) else float(out)


def reduce_to_cell(xi, c: float):
    """Reduce frequencies modulo ``2c`` into the half-open cell ``[-c, c)``."""
    x = np.asarray(xi, dtype=float)
    r = x - 2 * c * np.floor((x + c) / (2 * c))
    # guard the rounding edge where r lands on +c
    r = np.where(r >= c, r - 2 * c, r)
    return r if np.ndim(r) else float(r)


def periodize_hat(k: KernelSpec, xi, t: float = 1.0):
    """The ``2c``-periodization of ``phi_hat ** t`` restricted to ``[-c, c)``."""
    return eval_hat(k, reduce_to_cell(xi, k.c), t)


def kappa(k: KernelSpec) -> float:
    """Floor ``kappa_phi = min phi_hat`` over the band."""
    if k.family == "tabulated":
        # pchip is shape preserving, so extrema sit at the nodes
        return float(min(k.table_phi))
    return float(eval_hat(k, k.c))


def hat_derivative(k: KernelSpec, xi):
    """Derivative of ``phi_hat`` (for xi != 0 in the non-smooth families)."""
    x = np.asarray(xi, dtype=float)
    s = np.sign(x)
    a = np.abs(x)
    if k.family == "gaussian":
        out = -2 * k.param ** 2 * x * np.exp(-(k.param * x) ** 2)
    elif k.family == "fractional":
        al = k.param
        with np.errstate(divide="ignore"):
            out = -s * al * a ** (al - 1) * np.exp(-a ** al)
    elif k.family == "poisson":
        out = -s * k.param * np.exp(-k.param * a)
    else:
        if np.any(a > k.c * (1 + 1e-14)):
            raise KernelError("tabulated kernel evaluated outside [-c, c]")
        out = s * k._pchip(np.minimum(a, k.c), 1)
    return out if np.ndim(out) else float(out)


def _abs_intervals(intervals):
    """Map intervals of xi to intervals of |xi| (merged where they overlap)."""
    pieces = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if a > b:
            raise KernelError(f"empty interval [{a}, {b}]")
        if a >= 0:
            pieces.append((a, b))
        elif b <= 0:
            pieces.append((-b, -a))
        else:
            pieces.append((0.0, max(-a, b)))
    return pieces


def hat_derivative_min(k: KernelSpec, intervals, grid: int = 100_001) -> float:
    """Minimum of ``|phi_hat'|`` over a union of closed intervals in [-c, c].

    Built-in families are unimodal in ``|xi|`` (the Gaussian derivative peaks at
    ``1/(sigma*sqrt 2)``, the others decrease), so the minimum over an interval
    sits at an endpoint.  Tabulated kernels are minimized on a dense grid.
    """
    intervals = list(intervals)
    if not intervals:
        raise KernelError("need at least one interval")
    for a, b in intervals:
        if a < -k.c * (1 + 1e-12) or b > k.c * (1 + 1e-12):
            raise KernelError(f"interval [{a}, {b}] not contained in [-c, c]")
        if a <= 0 <= b and not k.smooth_at_zero:
            raise KernelError(f"{k.family} kernel is not differentiable at 0")
    best = math.inf
    for lo, hi in _abs_intervals(intervals):
        if k.family == "tabulated":
            pts = np.linspace(lo, hi, grid)
        else:
            pts = np.array([lo, hi])
        best = min(best, float(np.min(np.abs(hat_derivative(k, pts)))))
    return best


def sup_hat_derivative(k: KernelSpec) -> float:
    """``sup |phi_hat'|`` over [-c, c] (infinite for fractional alpha < 1)."""
    if k.family == "gaussian":
        s = abs(k.param)
        peak = 1 / (s * math.sqrt(2))
        if peak <= k.c:
            return math.sqrt(2 / math.e) * s
        return abs(float(hat_derivative(k, k.c)))
    if k.family == "fractional":
        return math.inf if k.param < 1 else 1.0
    if k.family == "poisson":
        return k.param
    pts = np.linspace(0.0, k.c, 200_001)
    return float(np.max(np.abs(k._pchip(pts, 1))))
