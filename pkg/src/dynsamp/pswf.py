"""
Prolate spheroidal wave functions and Remez-type constants.

PSWFs ``psi_n`` are computed as eigenvectors of the prolate differential
operator in the orthonormal Legendre basis ``Pbar_k = sqrt(k + 1/2) P_k`` on
``[-1, 1]``.  In that basis the operator is symmetric with nonzero entries
only on the diagonal and at distance two, so each parity class is a
symmetric tridiagonal problem.

Eigenvalues of the time-band limiting operator are ``lambda_n =
(c / 2 pi) |mu_n|^2`` where ``mu_n psi_n(x) = int psi_n(y) exp(-i c x y) dy``.
``mu_n`` is evaluated by quadrature while it is well above rounding level.
Past that point ``lambda_n`` is continued with the exact ratio

    lambda_n / lambda_{n-1} = |<psi_n, psi_{n-1}'>| / |<psi_{n-1}, psi_n'>|,

which keeps full relative accuracy however small ``lambda_n`` gets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import eigh_tridiagonal

QUAD_LAMBDA_FLOOR = 1e-10
TAIL_TOL = 1e-12
MODELS = ("FourierPoly", "SincTranslates", "PSWF")


class TruncationError(RuntimeError):
    """Legendre truncation too short even after enlarging it."""


# ---------------------------------------------------------------------------
# special functions


def legendre(k: int, x):
    """Legendre polynomial ``P_k`` by the three-term recursion."""
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    x = np.asarray(x, dtype=float)
    p0, p1 = np.ones_like(x), x.copy()
    if k == 0:
        out = p0
    else:
        for n in range(1, k):
            p0, p1 = p1, ((2 * n + 1) * x * p1 - n * p0) / (n + 1)
        out = p1
    return out if out.ndim else float(out)


def legendre_normalized(k: int, x, c: float):
    """``sqrt((2k+1)/(2c)) P_k(x/c)``, orthonormal on ``[-c, c]``."""
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    return math.sqrt((2 * k + 1) / (2 * c)) * legendre(k, np.asarray(x, dtype=float) / c)


def _j0_j1(x):
    if abs(x) < 1e-2:
        x2 = x * x
        j0 = 1 - x2 / 6 + x2 * x2 / 120
        j1 = x / 3 - x * x2 / 30 + x * x2 * x2 / 840
    else:
        s, co = math.sin(x), math.cos(x)
        j0 = s / x
        j1 = s / (x * x) - co / x
    return j0, j1


def _sph_bessel_scalar(k: int, x: float) -> float:
    if x == 0:
        return 1.0 if k == 0 else 0.0
    sign = -1.0 if (x < 0 and k % 2) else 1.0
    x = abs(x)
    j0, j1 = _j0_j1(x)
    if k == 0:
        return sign * j0
    if k == 1:
        return sign * j1
    if x >= k:
        a, b = j0, j1
        for n in range(1, k):
            a, b = b, (2 * n + 1) / x * b - a
        return sign * b
    # Miller: downward recursion from far above k, normalized with
    # sum_n (2n+1) j_n(x)^2 = 1 and the sign of j0 or j1.
    top = k + int(math.sqrt(40 * k)) + 30 + int(x)
    f_hi, f = 0.0, 1e-30
    vals = {}
    total = 0.0
    for n in range(top, -1, -1):
        total += (2 * n + 1) * f * f
        if n <= k:
            vals[n] = f
        if n == 0:
            break
        f_lo = (2 * n + 1) / x * f - f_hi
        f_hi, f = f, f_lo
        if abs(f) > 1e150:
            f *= 1e-150
            f_hi *= 1e-150
            total *= 1e-300
            for key in vals:
                vals[key] *= 1e-150
    norm = math.sqrt(total)
    ref, got = (j0, vals[0]) if abs(j0) >= abs(j1) else (j1, vals[1])
    if (ref < 0) != (got < 0):
        norm = -norm
    return sign * vals[k] / norm


def spherical_bessel(k: int, x):
    """Spherical Bessel function ``j_k`` of the first kind."""
    if k < 0:
        raise ValueError(f"order must be >= 0, got {k}")
    x = np.asarray(x, dtype=float)
    out = np.array([_sph_bessel_scalar(k, float(v)) for v in x.ravel()]).reshape(x.shape)
    return out if out.ndim else float(out)


def finite_fourier_legendre(k: int, x, phase: bool = False):
    """``int_{-1}^{1} exp(i x y) P_k(y) dy = 2 i^k j_k(x)``.

    Returns the real amplitude ``2 j_k(x)``; with ``phase=True`` the complex
    value including ``i^k``.
    """
    amp = 2 * np.asarray(spherical_bessel(k, x))
    if phase:
        return (1j ** k) * amp
    return amp if amp.ndim else float(amp)


def spherical_bessel_bound(k: int, x):
    """Majorant ``e^{k+3/2} |x|^k / (sqrt 2 (2k+3)^{k+1})`` of ``|j_k|``."""
    x = np.abs(np.asarray(x, dtype=float))
    logc = (k + 1.5) - 0.5 * math.log(2) - (k + 1) * math.log(2 * k + 3)
    return np.exp(logc) * x ** k


# ---------------------------------------------------------------------------
# prolate basis


def _galerkin_bands(c: float, M: int):
    k = np.arange(M + 1, dtype=float)
    diag = k * (k + 1) + c * c * (2 * k * (k + 1) - 1) / ((2 * k + 3) * (2 * k - 1))
    off = c * c * (k + 1) * (k + 2) / ((2 * k + 3) * np.sqrt((2 * k + 1) * (2 * k + 5)))
    return diag, off


def _refine_tail(a, b, chi, v):
    """Recompute the decaying tail of a tridiagonal eigenvector.

    Beyond its largest component the eigenvector is the minimal solution
    of the three-term recurrence, so the backward continued fraction for
    ``v[i] / v[i-1]`` gives it to full relative accuracy, where the dense
    solver only resolves it down to roundoff of the largest entry.
    """
    v = v.copy()
    top = int(np.argmax(np.abs(v)))
    r = 0.0
    ratios = np.zeros(len(v))
    for i in range(len(v) - 1, top, -1):
        nxt = b[i] * r if i < len(b) else 0.0
        r = -b[i - 1] / ((a[i] - chi) + nxt)
        ratios[i] = r
    for i in range(top + 1, len(v)):
        v[i] = v[i - 1] * ratios[i]
    return v / np.linalg.norm(v)


def _eigvecs(c: float, N: int, M: int):
    diag, off = _galerkin_bands(c, M)
    D = np.zeros((N + 1, M + 1))
    chi = np.zeros(N + 1)
    ends = np.sqrt(np.arange(M + 1) + 0.5)
    for parity in (0, 1):
        idx = np.arange(parity, M + 1, 2)
        ns = np.arange(parity, N + 1, 2)
        if len(ns) == 0:
            continue
        w, v = eigh_tridiagonal(diag[idx], off[idx][:-1], select="i",
                                select_range=(0, len(ns) - 1))
        for i, n in enumerate(ns):
            d = np.zeros(M + 1)
            d[idx] = _refine_tail(diag[idx], off[idx][:-1], w[i], v[:, i])
            if d @ ends < 0:
                d = -d
            D[n], chi[n] = d, w[i]
    return D, chi


@dataclass(frozen=True, eq=False)
class ProlateBasis:
    """PSWFs ``psi_0..psi_N`` for bandwidth ``c``.

    Attributes
    ----------
    c : float
    N : int
    trunc : int
        Highest Legendre degree kept.
    coeffs : ndarray, shape (N+1, trunc+1)
        ``psi_n = sum_k coeffs[n, k] * sqrt(k + 1/2) P_k``.
    chi : ndarray
        Differential-operator eigenvalues, increasing.
    mu_abs, mu_phase : ndarray
        ``mu_n = mu_abs[n] * exp(i mu_phase[n])``.
    lam : ndarray
        ``lambda_n = (c / 2 pi) |mu_n|^2``, decreasing.
    """

    c: float
    N: int
    trunc: int
    coeffs: np.ndarray
    chi: np.ndarray
    mu_abs: np.ndarray
    mu_phase: np.ndarray
    lam: np.ndarray

    @property
    def mu(self) -> np.ndarray:
        return self.mu_abs * np.exp(1j * self.mu_phase)

    def legendre_coeffs(self, n: int) -> np.ndarray:
        """Coefficients of ``psi_n`` on the plain ``P_k``."""
        return self.coeffs[n] * np.sqrt(np.arange(self.trunc + 1) + 0.5)

    def evaluate(self, n: int, x):
        """``psi_n(x)`` for ``x`` in ``[-1, 1]``."""
        return npleg.legval(np.asarray(x, dtype=float), self.legendre_coeffs(n))

    def derivative(self, n: int, x):
        return npleg.legval(np.asarray(x, dtype=float), npleg.legder(self.legendre_coeffs(n)))


def _mu_quadrature(basis_eval, n, c, xg, wg, grid):
    vals = basis_eval(n, grid)
    x0 = grid[int(np.argmax(np.abs(vals)))]
    num = np.sum(wg * basis_eval(n, xg) * np.exp(-1j * c * x0 * xg))
    return num / basis_eval(n, x0)


def compute_basis(c: float, N: int) -> ProlateBasis:
    """PSWFs up to index ``N`` with their eigenvalues."""
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    M = max(2 * N, math.ceil(2 * c)) + 30
    for attempt in range(2):
        D, chi = _eigvecs(c, N, M)
        tail = np.max(np.abs(D[:, -2:]), axis=1)
        if np.all(tail <= TAIL_TOL * np.linalg.norm(D, axis=1)):
            break
        if attempt == 1:
            raise TruncationError(f"Legendre truncation {M} too short for c={c}, N={N}")
        M *= 2

    ends = np.sqrt(np.arange(M + 1) + 0.5)

    def ev(n, x):
        return npleg.legval(x, D[n] * ends)

    def dev(n, x):
        return npleg.legval(x, npleg.legder(D[n] * ends))

    xg, wg = npleg.leggauss(M + 40)
    grid = np.linspace(-1, 1, 2001)
    lam = np.zeros(N + 1)
    mu_abs = np.zeros(N + 1)
    from_quad = True
    for n in range(N + 1):
        if from_quad:
            mu = _mu_quadrature(ev, n, c, xg, wg, grid)
            lam_n = c / (2 * math.pi) * abs(mu) ** 2
            if lam_n >= QUAD_LAMBDA_FLOOR or n == 0:
                lam[n] = lam_n
                continue
            from_quad = False
        num = np.sum(wg * ev(n, xg) * dev(n - 1, xg))
        den = np.sum(wg * ev(n - 1, xg) * dev(n, xg))
        lam[n] = lam[n - 1] * abs(num / den)
    mu_abs = np.sqrt(2 * math.pi * lam / c)
    mu_phase = np.mod(-np.arange(N + 1) * math.pi / 2, 2 * math.pi)
    return ProlateBasis(float(c), int(N), int(M), D, chi, mu_abs, mu_phase, lam)


def prolate_hat(basis: ProlateBasis, n: int, xi):
    """Fourier transform of ``psi_n`` (extended to the line), zero off ``[-c, c]``.

    Uses ``psi_hat(xi) = (2 pi / (c mu_n)) psi_n(-xi / c)`` for the
    ``exp(-i x xi)`` transform.
    """
    c = basis.c
    xi = np.asarray(xi, dtype=float)
    inside = np.abs(xi) <= c
    u = np.clip(-xi / c, -1, 1)
    val = (2 * math.pi / (c * basis.mu[n])) * basis.evaluate(n, u)
    return np.where(inside, val, 0.0)


def beta_coeffs(basis: ProlateBasis, n: int) -> np.ndarray:
    """Coefficients of ``psi_hat_n`` on the orthonormal Legendre basis of ``[-c, c]``."""
    if not 0 <= n <= basis.N:
        raise ValueError(f"n must lie in [0, {basis.N}]")
    k = np.arange(basis.trunc + 1)
    sign = np.where(k % 2, -1.0, 1.0)
    return (2 * math.pi / basis.mu[n]) * sign * basis.coeffs[n] / math.sqrt(basis.c)


def beta_bound(c: float, lam_n: float, k) -> np.ndarray:
    """Majorant ``10 (e/(2k+3))^{k+1} / (c^{3/2} lambda_n)`` for ``|beta_k^n|``."""
    k = np.asarray(k, dtype=float)
    return 10.0 / (c ** 1.5 * lam_n) * np.exp((k + 1) * (1 - np.log(2 * k + 3)))


def lambda_sum_bound(c: float, N: int) -> float:
    """Closed-form ``Lambda_N`` meant to dominate ``sqrt(sum_{n<=N} 1/lambda_n)``."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    ec = math.e * c
    if N <= max(ec, 2):
        return math.sqrt(3 + ec)
    return (2 * (N + 1) / ec) ** ((2 * N + 1) / 2)


def q_operator(c: float, f, x, n_quad: int = 200):
    """Apply ``(Q f)(x) = int sin(c(x-y)) / (pi (x-y)) f(y) dy`` by quadrature."""
    y, w = npleg.leggauss(n_quad)
    x = np.asarray(x, dtype=float)
    kern = (c / math.pi) * np.sinc(c * (x[:, None] - y[None, :]) / math.pi)
    return kern @ (w * f(y))


# ---------------------------------------------------------------------------
# Remez-type constants


def remez_K(c: float, N: int, measE: float) -> int:
    """Polynomial degree used to transfer the Remez inequality to PSWF spans."""
    if measE <= 0:
        raise ValueError(f"measure of E must be positive, got {measE}")
    ec = math.e * c
    if N <= max(2, ec):
        return max(math.ceil(3200 * (3 + ec) / c ** 3), math.ceil(4 * ec / measE))
    return max(20, N, math.ceil(8 * (N + 1) / measE))


@dataclass(frozen=True)
class RemezConstant:
    """A Remez-type constant ``C`` with ``||f|| <= C ||f 1_E||``, kept as ``ln C``."""

    model: str
    N: int
    measE: float
    c: float
    log_value: float
    K: int | None = None
    gamma: float | None = None

    @property
    def log10_value(self) -> float:
        return self.log_value / math.log(10)

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709 else math.inf


def remez_constant(model: str, c: float, N: int, measE: float,
                   gamma: float | None = None) -> RemezConstant:
    """Remez constant for Fourier polynomials, sinc translates or PSWF spans.

    Bases above 1 correspond to ``|E| <= 2c``; larger ``measE`` is accepted
    as a formal extrapolation.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    if measE <= 0:
        raise ValueError(f"measure of E must be positive, got {measE}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if model == "FourierPoly":
        return RemezConstant(model, N, measE, c, (N + 0.5) * math.log(8 * c / measE))
    if model == "SincTranslates":
        if gamma is None:
            raise ValueError("SincTranslates needs the absolute constant gamma")
        return RemezConstant(model, N, measE, c, (N + 0.5) * math.log(gamma * c / measE),
                             gamma=gamma)
    K = remez_K(c, N, measE)
    return RemezConstant(model, N, measE, c, math.log(2) + K * math.log(8 * c / measE), K=K)


def _gauss_norm2(func, intervals, n_quad=64):
    x0, w0 = npleg.leggauss(n_quad)
    tot = 0.0
    for a, b in intervals:
        a, b = float(a), float(b)
        if b <= a:
            continue
        x = (b - a) / 2 * x0 + (a + b) / 2
        tot += (b - a) / 2 * np.sum(w0 * np.abs(func(x)) ** 2)
    return tot


def empirical_remez_ratio(f_hat, E) -> float:
    """``||f_hat 1_[-c,c]|| / ||f_hat 1_E||`` for a sampled spectrum.

    ``f_hat`` needs attributes ``c``, ``grid`` and ``values``; if it also
    carries a callable ``func`` the norms use Gauss-Legendre quadrature on
    each interval, otherwise the midpoint grid.  Returns ``inf`` when the
    restriction to ``E`` vanishes.
    """
    E = [(float(a), float(b)) for a, b in E]
    c = f_hat.c
    func = getattr(f_hat, "func", None)
    if func is not None:
        cuts = sorted({-c, c, *[v for ab in E for v in ab if -c < v < c]})
        full = _gauss_norm2(func, list(zip(cuts[:-1], cuts[1:])))
        part = _gauss_norm2(func, E)
    else:
        g = np.asarray(f_hat.grid)
        v = np.abs(np.asarray(f_hat.values)) ** 2
        inE = np.zeros(g.shape, dtype=bool)
        for a, b in E:
            inE |= (g >= a) & (g <= b)
        full, part = v.sum(), v[inE].sum()
    if part <= 0:
        return math.inf
    return math.sqrt(full / part)
