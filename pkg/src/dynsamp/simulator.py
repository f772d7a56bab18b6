"""
Forward space-time sampling and per-frequency reconstruction.

Spectra live on the midpoint grid ``u_p = -c + 2c (p + 1/2) / (mQ)``,
p = 0..mQ-1.  Reshaped to ``m x Q`` the row ``j`` holds the coset values
``f_hat((2c/m)(xi_q + j))`` with ``xi_q = (q + 1/2)/Q - m/2``, so column
``q`` is the vector ``f(xi_q)`` acted on by ``B_m(xi_q)``.

The samples ``f_t(m pi k / c)`` are the Fourier coefficients of the
1-periodic trace ``b(., t) = (c / m pi) A_m(., t) f(.)``; they are obtained
by an inverse DFT of ``b`` on the grid, directly, or by continuous
quadrature of the inverse Fourier integral.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import legendre as npleg

from . import pswf
from .diffmatrix import build_pick
from .kernel import KernelSpec, psi_exponent


@dataclass(frozen=True, eq=False)
class SignalSpectrum:
    """Samples of ``f_hat`` on the coset-aligned midpoint grid.

    ``func``, when present, evaluates ``f_hat`` anywhere in ``[-c, c]`` and
    is used by the continuous-quadrature oracles.
    """

    c: float
    m: int
    Q: int
    values: np.ndarray
    label: str | None = None
    func: object = None

    @property
    def grid(self) -> np.ndarray:
        return frequency_grid(self.c, self.m, self.Q)

    @property
    def du(self) -> float:
        return 2 * self.c / (self.m * self.Q)

    @property
    def xi(self) -> np.ndarray:
        return cell_grid(self.m, self.Q)

    def cosets(self) -> np.ndarray:
        """``m x Q`` array; column ``q`` is the vector ``f(xi_q)``."""
        return self.values.reshape(self.m, self.Q)

    def norm2_hat(self) -> float:
        """``||f_hat||^2`` by the midpoint rule."""
        return float(np.sum(np.abs(self.values) ** 2) * self.du)

    def norm2(self) -> float:
        """``||f||_2^2 = ||f_hat||^2 / (2 pi)``."""
        return self.norm2_hat() / (2 * math.pi)


@dataclass(frozen=True, eq=False)
class TraceData:
    """Trace ``b(xi_q, t_i)`` on one period times the time nodes."""

    c: float
    m: int
    Q: int
    xi: np.ndarray
    t: np.ndarray
    weights: np.ndarray
    b: np.ndarray
    horizon: float = 1.0


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    recovered: SignalSpectrum
    relative_error_on_E: float | None
    pinv_threshold: float
    per_xi_lambda_min: np.ndarray
    solved: np.ndarray
    truncated_cells: np.ndarray


def frequency_grid(c: float, m: int, Q: int) -> np.ndarray:
    return -c + 2 * c * (np.arange(m * Q) + 0.5) / (m * Q)


def cell_grid(m: int, Q: int) -> np.ndarray:
    return (np.arange(Q) + 0.5) / Q - m / 2


def time_nodes(n_t: int, horizon: float = 1.0, include_t0: bool = False):
    x, w = npleg.leggauss(n_t)
    t = horizon * (x + 1) / 2
    w = horizon * w / 2
    if include_t0:
        t, w = np.concatenate([[0.0], t]), np.concatenate([[0.0], w])
    return t, w


# ---------------------------------------------------------------------------
# signal models


def _check_grid(Q):
    if Q < 4:
        raise ValueError(f"Q must be >= 4, got {Q}")


def random_bandlimited_func(c: float, seed: int = 0, degree: int = 8):
    """Smooth random spectrum vanishing to sixth order at ``+-c``."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)

    def func(u):
        x = np.asarray(u, dtype=float) / c
        inside = np.abs(x) <= 1
        xc = np.clip(x, -1, 1)
        val = (math.pi / c) * (1 - xc * xc) ** 6 * npleg.legval(xc, a)
        return np.where(inside, val, 0.0)

    return func


def synthesize(model: str, c: float, m: int, Q: int, *, coeffs=None, nodes=None,
               N: int | None = None, basis=None, seed: int = 0) -> SignalSpectrum:
    """Spectrum of a signal from one of the finite-dimensional models.

    Parameters
    ----------
    model : {'moda', 'modb', 'modc', 'random'}
        ``moda``: combination of prolate spectra; ``modb``: sinc translates
        at ``nodes``; ``modc``: derivatives of ``sinc(c x)`` (a polynomial
        spectrum); ``random``: smooth random spectrum from ``seed``.
    coeffs : sequence, optional
        Model coefficients; random when omitted (from ``seed``).
    """
    _check_grid(Q)
    rng = np.random.default_rng(seed)

    def rand(n):
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)

    if model == "modb":
        if nodes is None:
            raise ValueError("modb needs nodes")
        nodes = np.asarray(nodes, dtype=float)
        a = np.asarray(coeffs if coeffs is not None else rand(len(nodes)), dtype=complex)

        def func(u):
            u = np.asarray(u, dtype=float)
            inside = np.abs(u) <= c
            val = (math.pi / c) * (np.exp(-1j * np.multiply.outer(u, nodes)) @ a)
            return np.where(inside, val, 0.0)

        label = f"modb nodes={nodes.tolist()}"
    elif model == "modc":
        if coeffs is None:
            coeffs = rand((N if N is not None else 3) + 1)
        a = np.asarray(coeffs, dtype=complex)
        if len(a) == 0:
            raise ValueError("modc needs at least one coefficient")

        def func(u):
            u = np.asarray(u, dtype=float)
            inside = np.abs(u) <= c
            val = (math.pi / c) * np.polynomial.polynomial.polyval(1j * u, a)
            return np.where(inside, val, 0.0)

        label = f"modc degree={len(a) - 1}"
    elif model == "moda":
        if coeffs is None:
            coeffs = rand((N if N is not None else 3) + 1)
        a = np.asarray(coeffs, dtype=complex)
        if basis is None or basis.N < len(a) - 1 or basis.c != c:
            basis = pswf.compute_basis(c, len(a) - 1)

        def func(u):
            return sum(a[n] * pswf.prolate_hat(basis, n, u) for n in range(len(a)))

        label = f"moda N={len(a) - 1}"
    elif model == "random":
        func = random_bandlimited_func(c, seed)
        label = f"random seed={seed}"
    else:
        raise ValueError(f"unknown model {model!r}")
    vals = np.asarray(func(frequency_grid(c, m, Q)), dtype=complex)
    return SignalSpectrum(float(c), int(m), int(Q), vals, label, func)


def restrict(spec: SignalSpectrum, blind) -> SignalSpectrum:
    """Zero the spectrum outside the safe set of a ``BlindSpotSet``."""
    keep = blind.contains_cell(spec.xi)
    vals = spec.cosets() * keep[None, :]
    return replace(spec, values=vals.ravel(), label=(spec.label or "") + " restricted",
                   func=None)


# ---------------------------------------------------------------------------
# forward map


def _coset_freqs(c, m, Q):
    return frequency_grid(c, m, Q).reshape(m, Q)


def trace(spec: SignalSpectrum, k: KernelSpec, n_t: int = 48, include_t0: bool = False,
          noise: float = 0.0, seed: int = 0, horizon: float = 1.0) -> TraceData:
    """Trace ``b(xi_q, t_i) = (c/(m pi)) sum_j phi_hat^t_i(u_jq) f_hat(u_jq)``.

    ``noise`` adds complex white noise with standard deviation ``noise``
    times the RMS of the clean trace.
    """
    if not math.isclose(spec.c, k.c):
        raise ValueError("spectrum and kernel must share the bandwidth c")
    c, m, Q = spec.c, spec.m, spec.Q
    t, w = time_nodes(n_t, horizon, include_t0)
    psi = _psi_cosets(k, c, m, Q)
    f = spec.cosets()
    b = (c / (m * math.pi)) * np.einsum("tjq,jq->tq", np.exp(-t[:, None, None] * psi), f)
    if noise > 0:
        rng = np.random.default_rng(seed)
        rms = math.sqrt(float(np.mean(np.abs(b) ** 2)))
        b = b + noise * rms * (rng.standard_normal(b.shape)
                               + 1j * rng.standard_normal(b.shape)) / math.sqrt(2)
    return TraceData(c, m, Q, cell_grid(m, Q), t, w, b, horizon)


def _psi_cosets(k, c, m, Q):
    return np.asarray(psi_exponent(k, _coset_freqs(c, m, Q)))


def _quad_samples(func, k, t, x, c):
    """``(1/2pi) int_{-c}^{c} f_hat(u) phi_hat^t(u) e^{i x u} du`` by panels.

    ``t`` may be a scalar or a 1-d array; rows of the result follow ``t``.
    """
    x = np.asarray(x, dtype=float)
    panels = max(4, math.ceil(np.max(np.abs(x), initial=0.0) * c / math.pi) + 4)
    g, gw = npleg.leggauss(24)
    edges = np.linspace(-c, c, panels + 1)
    half = (edges[1] - edges[0]) / 2
    u = (edges[:-1, None] + half * (g[None, :] + 1)).ravel()
    wu = np.tile(gw * half, panels)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    base = np.asarray(func(u)) * wu
    vals = base[None, :] * np.exp(-ts[:, None] * np.asarray(psi_exponent(k, u))[None, :])
    out = vals @ np.exp(1j * np.multiply.outer(u, x)) / (2 * math.pi)
    return out if np.ndim(t) else out[0]


def forward_samples(spec: SignalSpectrum, k: KernelSpec, t: float, k_range: int,
                    method: str = "fft") -> np.ndarray:
    """Samples ``f_t(m pi k / c)`` for ``k = -k_range..k_range``.

    ``method='fft'`` inverts the grid trace by DFT; ``'direct'`` sums the
    same grid explicitly; ``'quad'`` integrates the continuous spectrum
    (needs ``spec.func``) and serves as an independent oracle.
    """
    c, m, Q = spec.c, spec.m, spec.Q
    ks = np.arange(-k_range, k_range + 1)
    if method == "quad":
        if spec.func is None:
            raise ValueError("continuous quadrature needs spec.func")
        return _quad_samples(spec.func, k, t, m * math.pi * ks / c, c)
    b = trace_at(spec, k, t)
    xi = cell_grid(m, Q)
    if method == "fft":
        xi0 = 1 / (2 * Q) - m / 2
        return np.exp(2j * math.pi * ks * xi0) * np.fft.ifft(b)[ks % Q]
    if method == "direct":
        return np.exp(2j * math.pi * np.multiply.outer(ks, xi)) @ b / Q
    raise ValueError(f"unknown method {method!r}")


def trace_at(spec: SignalSpectrum, k: KernelSpec, t: float) -> np.ndarray:
    psi = _psi_cosets(k, spec.c, spec.m, spec.Q)
    return (spec.c / (spec.m * math.pi)) * np.sum(np.exp(-t * psi) * spec.cosets(), axis=0)


def spatial_energy(spec: SignalSpectrum, k: KernelSpec, k_range: int, n_t: int = 48,
                   horizon: float = 1.0) -> float:
    """``int_0^L sum_{|k|<=K} |f_t(m pi k / c)|^2 dt`` from explicit samples.

    Samples come from continuous quadrature of the spectrum, independent of
    the grid.
    """
    if spec.func is None:
        raise ValueError("spatial energy needs spec.func")
    t, w = time_nodes(n_t, horizon)
    ks = np.arange(-k_range, k_range + 1)
    x = spec.m * math.pi * ks / spec.c
    samples = _quad_samples(spec.func, k, t, x, spec.c)
    return float(w @ np.sum(np.abs(samples) ** 2, axis=1))


def frequency_energy(spec: SignalSpectrum, k: KernelSpec, horizon: float = 1.0) -> float:
    """``(c/(m pi))^2 int f(xi)^* B_m(xi) f(xi) dxi`` on the grid."""
    c, m, Q = spec.c, spec.m, spec.Q
    f = spec.cosets()
    tot = 0.0
    for q, xi in enumerate(cell_grid(m, Q)):
        col = f[:, q]
        if not np.any(col):
            continue
        B = build_pick(k, m, xi, horizon).entries
        tot += float(np.real(np.conj(col) @ B @ col))
    return (c / (m * math.pi)) ** 2 * tot / Q


def frame_quotient(spec: SignalSpectrum, k: KernelSpec, n_t: int | None = None,
                   horizon: float = 1.0) -> float:
    """Space-time sample energy over ``||f||_2^2``.

    The time integral uses the closed form of ``B_m``; ``n_t`` is accepted
    for interface symmetry and ignored.
    """
    n2 = spec.norm2()
    if n2 == 0:
        raise ValueError("zero signal")
    return frequency_energy(spec, k, horizon) / n2


def quotient_caps(spec: SignalSpectrum) -> dict:
    """Caps on the frame quotient under the two upper-bound normalizations.

    ``fest``: energy <= (c / 2 pi^2) ||f_hat||^2, i.e. quotient <= c / pi.
    ``unit``: energy <= ||f_hat||^2, i.e. quotient <= 2 pi.
    """
    return {"fest": spec.c / math.pi, "unit": 2 * math.pi}


# ---------------------------------------------------------------------------
# reconstruction


def reconstruct(td: TraceData, k: KernelSpec, E=None, tau: float = 1e-12,
                truth: SignalSpectrum | None = None) -> ReconstructionResult:
    """Per-frequency least-squares inversion of the trace.

    For each grid cell in the safe set (all cells when ``E`` is None) solve
    ``min_g int |A(xi, t) g - (m pi / c) b(xi, t)|^2 dt`` over the stored
    time nodes.  The weighted system is solved by SVD, discarding singular
    values below ``sqrt(tau)`` times the largest, which is the truncated
    pseudo-inverse of ``B_m`` with threshold ``tau``.
    """
    c, m, Q = td.c, td.m, td.Q
    cells = np.ones(Q, dtype=bool) if E is None else E.contains_cell(td.xi)
    psi = _psi_cosets(k, c, m, Q)
    sw = np.sqrt(td.weights)
    keep_t = td.weights > 0
    t, sw = td.t[keep_t], sw[keep_t]
    b = td.b[keep_t]
    idx = np.flatnonzero(cells)
    A = np.exp(-t[None, :, None] * psi.T[idx][:, None, :]) * sw[None, :, None]
    rhs = (m * math.pi / c) * b[:, idx].T * sw[None, :]
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    cut = np.sqrt(tau) * s[:, :1]
    keep = s >= cut
    inv = np.where(keep, 1 / np.where(keep, s, 1.0), 0.0)
    coef = np.einsum("qtk,qt->qk", U.conj(), rhs) * inv
    g = np.einsum("qkj,qk->qj", Vh.conj(), coef)

    rec = np.zeros((m, Q), dtype=complex)
    rec[:, idx] = g.T
    lam_min = np.full(Q, np.nan)
    lam_min[idx] = s[:, -1] ** 2
    truncated = np.zeros(Q, dtype=bool)
    truncated[idx] = ~np.all(keep, axis=1)
    recovered = SignalSpectrum(c, m, Q, rec.ravel(), "recovered")

    err = None
    if truth is not None:
        ref = truth.cosets()[:, cells]
        diff = rec[:, cells] - ref
        nref = np.linalg.norm(ref)
        err = float(np.linalg.norm(diff) / nref) if nref > 0 else float(np.linalg.norm(diff))
    return ReconstructionResult(recovered, err, tau, lam_min, cells, truncated)


# ---------------------------------------------------------------------------
# CSV I/O


def write_spectrum_csv(spec: SignalSpectrum, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["xi", "re", "im"])
    for u, v in zip(spec.grid, spec.values):
        w.writerow([format(u, ".17g"), format(v.real, ".17g"), format(v.imag, ".17g")])


def read_spectrum_csv(fh, c: float, m: int) -> SignalSpectrum:
    r = csv.reader(fh)
    if next(r) != ["xi", "re", "im"]:
        raise ValueError("expected header xi,re,im")
    rows = [(float(a), float(b), float(d)) for a, b, d in r]
    vals = np.array([b + 1j * d for _, b, d in rows])
    if len(vals) % m:
        raise ValueError("grid length not divisible by m")
    Q = len(vals) // m
    if not np.allclose([u for u, _, _ in rows], frequency_grid(c, m, Q), atol=1e-12):
        raise ValueError("grid does not match the midpoint grid for (c, m)")
    return SignalSpectrum(c, m, Q, vals, "csv")


def write_trace_csv(td: TraceData, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["xi", "t", "re", "im"])
    for i, t in enumerate(td.t):
        for q, xi in enumerate(td.xi):
            v = td.b[i, q]
            w.writerow([format(xi, ".17g"), format(t, ".17g"),
                        format(v.real, ".17g"), format(v.imag, ".17g")])
