"""
Sampled diffusion matrices and their spectra.

For a kernel with exponent ``psi`` and ``m`` frequency cosets, the matrix
``B_m(xi)`` is the Gram matrix of the time-integrated kernel powers at the
coset points ``(2c/m)(xi + j')``.  Writing ``x_j = psi(coset point j)`` it has
the closed (Pick) form

    B_jk = (1 - exp(-(x_j + x_k))) / (x_j + x_k),

with value 1 on the diagonal of a zero exponent.  A Gauss-Legendre
evaluation of the time integral is provided as an independent route.

Conditioning of these matrices grows extremely fast with ``m`` and the
diffusion strength (beyond ``1e18`` for ``m = 5``), so when the closed form
is available and the double-precision spectrum is unreliable the
eigenvalues are recomputed in extended precision.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np

from .kernel import KernelSpec, periodize_hat, psi_exponent

FLOAT_CLAMP = 1e-14
REFINE_BELOW = 1e-9
MP_START_DPS = 32
MP_MAX_DPS = 256
JACOBI_MAX_M = 16

SWEEP_HEADER = ["m", "c", "sigma_or_param", "xi", "lambda_min", "lambda_max", "cond"]


@dataclass(frozen=True)
class CosetIndexMap:
    """Representatives ``j'`` of each residue ``j mod m`` in the centred cell.

    ``indices[j]`` is the unique ``j' = j (mod m)`` with
    ``(xi + j')/m`` in ``[-1/2, 1/2)``.
    """

    xi: float
    m: int
    indices: tuple[int, ...]

    def residue_pairs(self):
        return list(enumerate(self.indices))


def coset_indices(xi: float, m: int) -> CosetIndexMap:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    idx = tuple(j - m * math.floor((xi + j) / m + 0.5) for j in range(m))
    return CosetIndexMap(float(xi), int(m), idx)


def coset_points(c: float, m: int, xi: float) -> np.ndarray:
    """Frequencies ``(2c/m)(xi + j')`` inside ``[-c, c)``, ordered by residue."""
    cim = coset_indices(xi, m)
    return np.array([(2 * c / m) * (xi + jp) for jp in cim.indices])


def row_A(k: KernelSpec, m: int, xi: float, t: float) -> np.ndarray:
    """Row of periodized kernel powers ``phi_p^t((2c/m)(xi + j))``, j = 0..m-1."""
    if not 0 <= t:
        raise ValueError(f"t must be nonnegative, got {t}")
    pts = (2 * k.c / m) * (xi + np.arange(m))
    return np.atleast_1d(periodize_hat(k, pts, t))


# ---------------------------------------------------------------------------
# matrix construction


def pick_entry(s: float, horizon: float = 1.0) -> float:
    """``int_0^L exp(-t s) dt`` with the small-``s`` expansion."""
    u = horizon * s
    if u == 0:
        return float(horizon)
    if abs(u) < 1e-8:
        return horizon * (1 - u / 2 + u * u / 6)
    return horizon * (-math.expm1(-u) / u)


def pick_matrix(x, horizon: float = 1.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = len(x)
    out = np.empty((m, m))
    for j in range(m):
        for l in range(j, m):
            out[j, l] = out[l, j] = pick_entry(x[j] + x[l], horizon)
    return out


def _pick_matrix_mp(x, horizon):
    L = mpmath.mpf(horizon)
    xs = [mpmath.mpf(float(v)) for v in x]
    m = len(xs)
    out = [[None] * m for _ in range(m)]
    for j in range(m):
        for l in range(j, m):
            u = L * (xs[j] + xs[l])
            val = L if u == 0 else L * (-mpmath.expm1(-u) / u)
            out[j][l] = out[l][j] = val
    return out


@dataclass(frozen=True, eq=False)
class SampledDiffusionMatrix:
    """The matrix ``B_m(xi)`` together with the data it was built from.

    Attributes
    ----------
    m, xi, c : int, float, float
        Coset count, frequency and bandwidth.
    entries : ndarray
        Symmetric ``m x m`` matrix.
    coset_points : ndarray
        Coset frequencies ``(2c/m)(xi + j')``.
    exponents : ndarray or None
        ``psi`` at the coset points when the closed form was used; enables
        extended-precision spectra.
    horizon : float
        Length ``L`` of the time interval.
    """

    m: int
    xi: float
    c: float
    entries: np.ndarray
    coset_points: np.ndarray
    exponents: np.ndarray | None = None
    horizon: float = 1.0

    @cached_property
    def eig(self) -> np.ndarray:
        return eigenvalues(self)


def build_pick(k: KernelSpec, m: int, xi: float, horizon: float = 1.0) -> SampledDiffusionMatrix:
    """Closed-form ``B_m(xi)`` over the time interval ``[0, horizon]``."""
    pts = coset_points(k.c, m, xi)
    x = np.atleast_1d(psi_exponent(k, pts)).astype(float)
    return SampledDiffusionMatrix(m, float(xi), k.c, pick_matrix(x, horizon), pts, x, float(horizon))


def build_quadrature(k: KernelSpec, m: int, xi: float, n_t: int = 48,
                     horizon: float = 1.0) -> SampledDiffusionMatrix:
    """``B_m(xi)`` by Gauss-Legendre integration of ``A^T A`` over time."""
    if n_t < 2:
        raise ValueError(f"n_t must be >= 2, got {n_t}")
    nodes, weights = np.polynomial.legendre.leggauss(n_t)
    t = horizon * (nodes + 1) / 2
    w = horizon * weights / 2
    rows = np.array([row_A(k, m, xi, ti) for ti in t])
    entries = (rows * w[:, None]).T @ rows
    entries = (entries + entries.T) / 2
    pts = coset_points(k.c, m, xi)
    return SampledDiffusionMatrix(m, float(xi), k.c, entries, pts, None, float(horizon))


# ---------------------------------------------------------------------------
# eigenvalues


def jacobi_eigenvalues(a, tol, sqrt=math.sqrt, max_sweeps=100):
    """Cyclic Jacobi eigenvalues of a small symmetric matrix.

    Works on nested lists of any real type closed under ``+ - * /`` (floats
    or ``mpmath.mpf``) given a matching ``sqrt``.  An off-diagonal entry is
    annihilated whenever ``|a_pq| > tol * sqrt(|a_pp a_qq|)``, the threshold
    that gives relative accuracy on graded positive definite matrices.

    Returns
    -------
    list
        Eigenvalues in ascending order.
    """
    n = len(a)
    a = [list(row) for row in a]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0:
                    continue
                app, aqq = a[p][p], a[q][q]
                if abs(apq) <= tol * sqrt(abs(app * aqq)):
                    a[p][q] = a[q][p] = apq * 0
                    continue
                rotated = True
                theta = (aqq - app) / (2 * apq)
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = 1 / (abs(theta) + sqrt(theta * theta + 1))
                    if theta < 0:
                        t = -t
                cs = 1 / sqrt(t * t + 1)
                sn = t * cs
                for r in range(n):
                    if r != p and r != q:
                        arp, arq = a[r][p], a[r][q]
                        a[r][p] = a[p][r] = cs * arp - sn * arq
                        a[r][q] = a[q][r] = sn * arp + cs * arq
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = a[q][p] = apq * 0
        if not rotated:
            break
    return sorted(a[i][i] for i in range(n))


def _float_eigs(entries: np.ndarray) -> np.ndarray:
    if len(entries) > JACOBI_MAX_M:
        return np.linalg.eigvalsh(entries)
    return np.array(jacobi_eigenvalues(entries.tolist(), 2.0 ** -53))


def _mp_eigs(x, horizon):
    """Extended-precision spectrum of a Pick matrix.

    Doubles the working precision until the smallest eigenvalue clears the
    noise floor of that precision.  Returns floats and a flag telling
    whether the smallest eigenvalue is resolved.
    """
    dps = MP_START_DPS
    while True:
        with mpmath.workdps(dps):
            ev = jacobi_eigenvalues(_pick_matrix_mp(x, horizon), mpmath.mpf(10) ** (-dps),
                                    sqrt=mpmath.sqrt)
            floor = mpmath.mpf(10) ** (-(dps - 12)) * ev[-1]
            resolved = ev[0] > floor
            vals = np.array([float(v) for v in ev])
        if resolved or dps >= MP_MAX_DPS:
            return vals, resolved
        dps *= 2


def eigenvalues(B: SampledDiffusionMatrix) -> np.ndarray:
    """Sorted eigenvalues, refined in extended precision when needed.

    Eigenvalues that cannot be told apart from zero are returned as 0.
    """
    ev = _float_eigs(B.entries)
    top = ev[-1]
    x = B.exponents
    refinable = (x is not None and len(x) > 1 and len(set(x.tolist())) == len(x)
                 and top > 0)
    if refinable and ev[0] < REFINE_BELOW * top:
        ev, resolved = _mp_eigs(x, B.horizon)
        if not resolved:
            ev[0] = 0.0
        return ev
    ev = ev.copy()
    ev[np.abs(ev) <= FLOAT_CLAMP * top] = 0.0
    return ev


def spectrum(B: SampledDiffusionMatrix):
    """``(lambda_min, lambda_max, cond)``; ``cond`` is ``inf`` when singular."""
    ev = B.eig
    lo, hi = float(ev[0]), float(ev[-1])
    cond = hi / lo if lo > 0 else math.inf
    return lo, hi, cond


# ---------------------------------------------------------------------------
# sweeps


def _param_of(k: KernelSpec):
    return k.param if k.param is not None else float("nan")


def _cell(args):
    k, m, xi = args
    lo, hi, cond = spectrum(build_pick(k, m, xi))
    return (m, k.c, _param_of(k), float(xi), lo, hi, cond)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DYNSAMP_THREADS", "1")))
    except ValueError:
        return 1


def sweep(k: KernelSpec, ms, xis, params=None, workers: int | None = None):
    """Spectral summaries over a grid of ``m``, kernel parameter and ``xi``.

    Parameters
    ----------
    k : KernelSpec
        Base kernel; its parameter is replaced by each entry of ``params``.
    ms, xis : sequence
        Coset counts and frequencies.
    params : sequence, optional
        Kernel parameters (``sigma``, ``alpha`` or ``y``).  Defaults to the
        parameter of ``k``.
    workers : int, optional
        Process count; defaults to ``DYNSAMP_THREADS`` (1 if unset).

    Returns
    -------
    list of tuple
        Rows ``(m, c, param, xi, lambda_min, lambda_max, cond)`` ordered with
        ``m`` outermost, then parameter, then ``xi``.
    """
    ms, xis = list(ms), list(xis)
    kernels = [k] if params is None else [k.with_param(p) for p in params]
    if not ms or not xis or not kernels:
        raise ValueError("sweep grids must be non-empty")
    jobs = [(kk, int(m), float(xi)) for m in ms for kk in kernels for xi in xis]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_cell(j) for j in jobs]


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_sweep_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([fmt(v) for v in r])
