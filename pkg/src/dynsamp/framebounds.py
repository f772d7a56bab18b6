"""
Analytic frame bounds.

Covers the Vandermonde machinery behind the lower bound on
``lambda_min(B_m)``, the Beckermann-Townsend type upper estimate, the lower
frame constant for spectra restricted to the safe set ``E``, its explicit
Gaussian form and the composite constant for finite-dimensional signal
models.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import combinations

import mpmath
import numpy as np

from . import blindspot, diffmatrix, pswf
from .kernel import KernelSpec, kappa


# ---------------------------------------------------------------------------
# Vandermonde bounds


@dataclass(frozen=True)
class VandermondeBound:
    """Lower bounds on the smallest singular value of a square Vandermonde matrix.

    ``alpha_tilde`` is ``None`` unless every node lies in ``(0, 1]``.
    """

    v: tuple
    alpha: float
    alpha_tilde: float | None
    sigma_F: float
    gamma_minus: float
    gamma_plus: float


def _pair_product(v) -> float:
    return math.prod(abs(a - b) for a, b in combinations(v, 2))


def vandermonde_matrix(v) -> np.ndarray:
    """Square matrix ``V[i, j] = v_j^i``."""
    v = np.asarray(v, dtype=float)
    return v[None, :] ** np.arange(len(v))[:, None]


def vandermonde_lower(v) -> VandermondeBound:
    v = tuple(float(x) for x in v)
    m = len(v)
    if m == 0:
        raise ValueError("need at least one node")
    if any(x == 0 for x in v):
        raise ValueError("nodes must be nonzero")
    if len(set(v)) != m:
        raise ValueError("nodes must be distinct")
    sig2 = sum(x ** (2 * k) for x in v for k in range(m))
    prod = _pair_product(v)
    alpha = ((m - 1) / sig2) ** ((m - 1) / 2) * prod
    at = None
    if all(0 < x <= 1 for x in v):
        at = math.exp(-0.5) * m ** (-(m - 1) / 2) * prod
    a = [abs(x) for x in v]
    return VandermondeBound(v, alpha, at, math.sqrt(sig2), min(a), max(a))


def psi_geom(N: int, t: float) -> float:
    """``(1 - t^2) / (1 - t^(2/N))``, equal to ``N`` at ``t = 1``."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if t == 1:
        return float(N)
    u = math.log(t)
    return math.expm1(2 * u) / math.expm1(2 * u / N)


def w_matrix(v, N: int) -> np.ndarray:
    """``(mN) x m`` matrix with entries ``v_j^((i-1)/N)``, i = 1..mN."""
    v = np.asarray(v, dtype=float)
    e = np.arange(len(v) * N)[:, None] / N
    return v[None, :] ** e


# ---------------------------------------------------------------------------
# bounds on lambda_min


def kappa_factor(kap: float, m: int) -> float:
    """``(1 - kap^(2/m)) / |ln kap|`` with its limit ``2/m`` as ``kap -> 1``."""
    if not 0 < kap <= 1:
        raise ValueError(f"kappa must lie in (0, 1], got {kap}")
    u = -math.log(kap)
    if u < 1e-8:
        return 2 / m
    return -math.expm1(-2 * u / m) / u


def coset_product(k: KernelSpec, m: int, xi: float) -> float:
    """Product of all pairwise gaps of the periodized kernel over the cosets."""
    vals = blindspot.coset_values(k, m, xi)
    return _pair_product(vals.tolist())


def lambda_min_lower(k: KernelSpec, m: int, xi: float) -> float:
    """Guaranteed lower bound on ``lambda_min(B_m(xi))``; 0 at blind spots."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    d = coset_product(k, m, xi)
    if d == 0:
        return 0.0
    log_b = (2 * math.log(d) + math.log(kappa_factor(kappa(k), m))
             - math.log(2 * math.e) - m * m * math.log(m))
    return math.exp(log_b)


def lambda_min_upper_BT(m: int, xi: float, alpha_exp: float) -> float:
    """Upper estimate on ``lambda_min`` for kernels with ``psi = s |xi|^alpha``.

    ``xi`` is folded into ``[-1/2, 1/2)`` first; the folded value must be
    nonzero.
    """
    if alpha_exp <= 0:
        raise ValueError(f"alpha must be positive, got {alpha_exp}")
    f = xi - math.floor(xi + 0.5)
    if f == 0:
        raise ValueError("the estimate degenerates at xi = 0")
    den = math.log(16) + 2 * alpha_exp * math.log(m / (2 * abs(f)))
    return 16 * m * math.exp(-(m - 1) * math.pi ** 2 / den)


def power_exponent(k: KernelSpec) -> float | None:
    """Exponent ``alpha`` with ``psi(xi) = s |xi|^alpha``, if the family has one."""
    return {"gaussian": 2.0, "fractional": k.param, "poisson": 1.0}.get(k.family)


# ---------------------------------------------------------------------------
# frame constants


def frame_A_safe_set(k: KernelSpec, m: int, delta: float):
    """Lower and upper frame constants for spectra restricted to ``E``.

    Returns
    -------
    (A, B) : tuple of float
        ``A = c/(4 e pi^2) delta^(m(m-1)) / m^(1+m^2) (1 - kappa^(2/m))/|ln kappa|``
        and ``B = c / (2 pi^2)``.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    c = k.c
    log_a = (math.log(c / (4 * math.e * math.pi ** 2)) + m * (m - 1) * math.log(delta)
             - (1 + m * m) * math.log(m) + math.log(kappa_factor(kappa(k), m)))
    return math.exp(log_a), c / (2 * math.pi ** 2)


def gaussian_R(sigma: float, c: float, eta: float) -> float:
    return 2 * sigma ** 2 * min(eta * math.exp(-(sigma * eta) ** 2),
                                c * math.exp(-(sigma * c) ** 2))


def gaussian_explicit_logA(sigma: float, c: float, m: int, eta: float) -> float:
    """Natural log of the explicit Gaussian lower frame constant."""
    if not 0 < eta < 0.25:
        raise ValueError(f"eta must lie in (0, 1/4), got {eta}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    s2 = sigma * sigma
    log_r = math.log(2 * s2) + min(math.log(eta) - s2 * eta * eta,
                                   math.log(c) - s2 * c * c)
    return (math.log(c / (2 * math.e * math.pi ** 2 * (2 * s2 * c * c + m)))
            + m * (m - 1) * (math.log(4 * c * eta) + log_r)
            - (1 - m + 2 * m * m) * math.log(m))


def gaussian_explicit_A(sigma: float, c: float, m: int, eta: float):
    """``(A, R)`` for the heat kernel with safe-set margin ``eta``."""
    log_a = gaussian_explicit_logA(sigma, c, m, eta)
    return math.exp(log_a), gaussian_R(sigma, c, eta)


def model_log_kappa(sigma: float, c: float, m: int, N: int, model: str,
                    remez_gamma: float | None = None, nonlinear: bool = False,
                    measE: float | None = None) -> float:
    """``ln`` of the frame constant for a finite-dimensional signal model.

    The Gaussian constant with ``eta = 1/8`` is divided by the square of
    the model's Remez constant on ``E``.  ``nonlinear`` doubles ``N`` for
    differences of sinc-translate signals.
    """
    if model == "SincTranslates" and remez_gamma is None:
        raise ValueError("SincTranslates needs remez_gamma")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if measE is None:
        measE = float(blindspot.build_sets(c, m, 0.125).measure_E)
    n_eff = 2 * N if (nonlinear and model == "SincTranslates") else N
    rc = pswf.remez_constant(model, c, n_eff, measE, remez_gamma)
    return gaussian_explicit_logA(sigma, c, m, 0.125) - 2 * rc.log_value


def model_kappa(sigma, c, m, N, model, remez_gamma=None, nonlinear=False, measE=None):
    """Frame constant as an ``mpmath.mpf`` (it routinely underflows doubles)."""
    return mpmath.exp(model_log_kappa(sigma, c, m, N, model, remez_gamma, nonlinear, measE))


# ---------------------------------------------------------------------------
# report


@dataclass
class FrameBoundReport:
    """All analytic constants for one configuration."""

    kernel: KernelSpec
    m: int
    eta: float
    delta: float
    A_lower: float
    B_upper: float
    B_unit: float = 1.0
    gaussian_A: float | None = None
    gaussian_R: float | None = None
    measure_E: float = 0.0
    model: str | None = None
    N: int | None = None
    log_kappa_model: float | None = None
    extra: dict = field(default_factory=dict)

    def lambda_min_lower(self, xi):
        return lambda_min_lower(self.kernel, self.m, xi)

    def lambda_min_upper(self, xi):
        a = power_exponent(self.kernel)
        return math.inf if a is None else lambda_min_upper_BT(self.m, xi, a)

    def as_text(self) -> str:
        k = self.kernel
        rows = [
            ("kernel", k.family),
            ("param", k.param),
            ("c", k.c),
            ("m", self.m),
            ("eta", self.eta),
            ("measure_E", self.measure_E),
            ("delta", self.delta),
            ("A_lower", self.A_lower),
            ("B_upper", self.B_upper),
            ("B_unit", self.B_unit),
        ]
        if self.gaussian_A is not None:
            rows += [("gaussian_A", self.gaussian_A), ("gaussian_R", self.gaussian_R)]
        if self.model is not None:
            rows += [("model", self.model), ("N", self.N),
                     ("log10_kappa_model", self.log_kappa_model / math.log(10))]
        rows += list(self.extra.items())
        return "\n".join(f"{key} = {_fmt(val)}" for key, val in rows)


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def report(k: KernelSpec, m: int, eta: float = 0.125, model: str | None = None,
           N: int | None = None, remez_gamma: float | None = None) -> FrameBoundReport:
    bs = blindspot.build_sets(k.c, m, eta)
    delta = blindspot.delta_from_eta(k, m, eta)
    A, B = frame_A_safe_set(k, m, delta)
    rep = FrameBoundReport(k, m, eta, delta, A, B, measure_E=float(bs.measure_E))
    if k.family == "gaussian":
        rep.gaussian_A, rep.gaussian_R = gaussian_explicit_A(k.param, k.c, m, eta)
        if model is not None:
            rep.model, rep.N = model, N
            rep.log_kappa_model = model_log_kappa(k.param, k.c, m, N, model, remez_gamma)
    return rep


SANDWICH_HEADER = ["xi", "lower_bound", "lambda_min", "upper_bound_bt", "m_cap"]


def sandwich_rows(k: KernelSpec, m: int, xis):
    """Rows ``(xi, lower, lambda_min, BT upper, m)`` over a frequency grid."""
    a = power_exponent(k)
    rows = []
    for xi in xis:
        lo = lambda_min_lower(k, m, xi)
        lam = diffmatrix.spectrum(diffmatrix.build_pick(k, m, xi))[0]
        f = xi - math.floor(xi + 0.5)
        up = math.inf if (a is None or f == 0) else lambda_min_upper_BT(m, xi, a)
        rows.append((float(xi), lo, lam, up, m))
    return rows


def write_sandwich_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SANDWICH_HEADER)
    for r in rows:
        w.writerow([diffmatrix.fmt(v) for v in r])
