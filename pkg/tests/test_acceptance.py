"""Acceptance criteria 1-14.

Each test records one PASS/FAIL line in ``RESULTS``; ``conftest.py`` prints
them at the end of the session.  Running this file directly prints the same
lines without pytest.
"""

import math
import time

import numpy as np
import pytest

from dynsamp import blindspot, cli, diffmatrix, framebounds, gapanalysis, pswf, simulator
from dynsamp.kernel import KernelSpec

RESULTS = {}

XI64 = np.linspace(-0.5, 0.5, 64, endpoint=False) + 1 / 128


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def gaussian(sigma, c=0.5):
    return KernelSpec.gaussian(sigma, c)


def test_criterion_01_pick_matches_quadrature():
    t0 = time.perf_counter()
    worst = 0.0
    for m in (2, 3, 5):
        for s in (0.5, 1, 5):
            k = gaussian(s)
            for xi in XI64:
                a = diffmatrix.build_pick(k, m, xi).entries
                b = diffmatrix.build_quadrature(k, m, xi, n_t=48).entries
                worst = max(worst, float(np.max(np.abs(a - b))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt <= 10
    record(1, ok, f"max |pick - quad| = {worst:.3e}, runtime {dt:.2f} s")
    assert ok


def test_criterion_02_eigenvalues_one_periodic():
    worst = 0.0
    for m in (2, 3, 5):
        for s in (0.5, 1, 5):
            k = gaussian(s)
            for xi in XI64:
                e0 = diffmatrix.eigenvalues(diffmatrix.build_pick(k, m, xi))
                e1 = diffmatrix.eigenvalues(diffmatrix.build_pick(k, m, xi + 1))
                worst = max(worst, float(np.max(np.abs(np.sort(e0) - np.sort(e1)))))
    ok = worst <= 1e-9
    record(2, ok, f"max spectral difference xi vs xi+1 = {worst:.3e}")
    assert ok


def test_criterion_03_exact_blind_spots():
    ratios = []
    for s in (0.5, 1, 5):
        k = gaussian(s)
        for m, xi in ((2, 0.5), (3, 0.0)):
            e = diffmatrix.eigenvalues(diffmatrix.build_pick(k, m, xi))
            ratios.append(float(e[0] / e[-1]))
    ok = max(ratios) <= 1e-12
    record(3, ok, f"max lambda_min/lambda_max at blind spots = {max(ratios):.3e}")
    assert ok


def test_criterion_04_sandwich():
    xis = np.concatenate([np.linspace(-0.45, -0.05, 32), np.linspace(0.05, 0.45, 32)])
    bad = 0
    total = 0
    for m in (2, 3, 5):
        for s in (1, 5, 50):
            k = gaussian(s)
            for xi, lo, lam, up, _ in framebounds.sandwich_rows(k, m, xis):
                lmax = diffmatrix.spectrum(diffmatrix.build_pick(k, m, xi))[1]
                total += 1
                if not (lo <= lam <= min(up, m) and lmax <= m + 1e-9):
                    bad += 1
    record(4, bad == 0, f"{bad} violations in {total} cells")
    assert bad == 0


def test_criterion_05_vandermonde():
    rng = np.random.default_rng(5)
    bad_alpha = 0
    for _ in range(200):
        m = int(rng.integers(1, 7))
        v = rng.uniform(0.05, 1.0, m)
        b = framebounds.vandermonde_lower(v)
        smin = np.linalg.svd(framebounds.vandermonde_matrix(v), compute_uv=False)[-1]
        if b.alpha > smin * (1 + 1e-12):
            bad_alpha += 1
    bad_w = 0
    for N in (1, 2, 4, 8):
        m = 3
        nu = 0.2
        v = np.sort(rng.uniform(nu, 1.0, m))
        b = framebounds.vandermonde_lower(v)
        W = framebounds.w_matrix(v, N)
        lo = b.alpha_tilde ** 2 * framebounds.psi_geom(N, nu)
        for _ in range(100):
            x = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            n2 = float(np.vdot(x, x).real)
            w2 = float(np.linalg.norm(W @ x) ** 2)
            if not (lo * n2 <= w2 * (1 + 1e-12) and w2 <= m * m * N * n2 * (1 + 1e-12)):
                bad_w += 1
    ok = bad_alpha == 0 and bad_w == 0
    record(5, ok, f"alpha violations {bad_alpha}/200, W_N sandwich violations {bad_w}/400")
    assert ok


def test_criterion_06_frame_identity():
    worst = 0.0
    for m in (2, 3):
        k = gaussian(1)
        for seed in range(10):
            spec = simulator.synthesize("random", 0.5, m, 256, seed=seed)
            freq = simulator.frequency_energy(spec, k)
            space = simulator.spatial_energy(spec, k, k_range=400)
            worst = max(worst, abs(freq - space) / freq)
    ok = worst <= 1e-6
    record(6, ok, f"max relative frequency/space mismatch over 20 signals = {worst:.3e}")
    assert ok


def test_criterion_07_safe_set_frame_inequality():
    c, m, eta = 0.5, 2, 0.125
    k = gaussian(1, c)
    bs = blindspot.build_sets(c, m, eta)
    A, B = framebounds.frame_A_safe_set(k, m, blindspot.delta_from_eta(k, m, eta))
    bad = 0
    lo_margin = math.inf
    for seed in range(20):
        spec = simulator.restrict(simulator.synthesize("random", c, m, 256, seed=seed), bs)
        q = simulator.frame_quotient(spec, k)
        n2 = spec.norm2()
        on_E = spec.norm2_hat()  # support already inside E
        lower = A * on_E / n2
        upper = B * spec.norm2_hat() / n2
        lo_margin = min(lo_margin, q / lower)
        if not (lower <= q <= upper):
            bad += 1
    record(7, bad == 0, f"{bad} violations in 20 signals (min quotient/lower = {lo_margin:.3e})")
    assert bad == 0


def test_criterion_08_round_trip():
    t0 = time.perf_counter()
    k = gaussian(1)
    worst = 0.0
    for m in (2, 3):
        bs = blindspot.build_sets(0.5, m, 0.125)
        for seed in range(5):
            spec = simulator.restrict(simulator.synthesize("random", 0.5, m, 256, seed=seed), bs)
            td = simulator.trace(spec, k, n_t=48)
            res = simulator.reconstruct(td, k, bs, tau=1e-12, truth=spec)
            worst = max(worst, res.relative_error_on_E)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt <= 30
    record(8, ok, f"max relative error on E = {worst:.3e}, runtime {dt:.2f} s")
    assert ok


@pytest.fixture(scope="module")
def bases():
    return {c: pswf.compute_basis(c, 20) for c in (0.5, 1.0, 5.0)}


def _orthonormality_error(basis):
    x, w = np.polynomial.legendre.leggauss(basis.trunc + 20)
    V = np.array([basis.evaluate(n, x) for n in range(basis.N + 1)])
    G = (V * w) @ V.T
    return float(np.max(np.abs(G - np.eye(basis.N + 1))))


def _q_residual(basis, n):
    x = np.linspace(-1, 1, 201)
    f = lambda y: basis.evaluate(n, y)
    r = pswf.q_operator(basis.c, f, x) - basis.lam[n] * f(x)
    return float(np.sqrt(np.trapezoid(r ** 2, x)))


def test_criterion_09_pswf_quality(bases):
    orth = max(_orthonormality_error(b) for b in bases.values())
    resid = max(_q_residual(b, n) for b in bases.values() for n in range(21))
    decreasing = all(np.all(np.diff(b.lam) < 0) for b in bases.values())
    lemma_fail = []
    for c, b in bases.items():
        for N in range(11):
            s = float(np.sum(1 / b.lam[: N + 1]))
            if not s <= pswf.lambda_sum_bound(c, N) ** 2:
                lemma_fail.append((c, N))
    ok = orth <= 1e-8 and resid <= 1e-6 and decreasing and not lemma_fail
    record(9, ok, f"orthonormality {orth:.1e}, Q_c residual {resid:.1e}, "
                  f"strictly decreasing {decreasing}, "
                  f"sum 1/lambda <= Lambda_N^2 fails at (c, N) = {lemma_fail}")
    assert orth <= 1e-8 and resid <= 1e-6 and decreasing
    assert not lemma_fail, f"eigenvalue-sum bound violated at {lemma_fail}"


def test_criterion_10_legendre_coefficient_bound(bases):
    viol = {}
    for c, b in bases.items():
        for n in range(11):
            beta = np.abs(pswf.beta_coeffs(b, n)[:41])
            bound = pswf.beta_bound(c, b.lam[n], np.arange(len(beta)))
            cnt = int(np.sum(beta > bound))
            if cnt:
                viol[c] = viol.get(c, 0) + cnt
    record(10, not viol, f"violations by c: {viol or 'none'}")
    assert not viol, f"coefficient bound violated: {viol}"


def _random_E(rng, c):
    """Union of 1-3 random disjoint intervals in [-c, c]."""
    n = int(rng.integers(1, 4))
    cuts = np.sort(rng.uniform(-c, c, 2 * n))
    return [(cuts[2 * i], cuts[2 * i + 1]) for i in range(n)
            if cuts[2 * i + 1] - cuts[2 * i] > 1e-3 * c]


def test_criterion_11_remez_empirics():
    rng = np.random.default_rng(11)
    c = 0.5
    bad = 0
    worst_gap = -math.inf
    done = 0
    while done < 500:
        E = _random_E(rng, c)
        if not E:
            continue
        N = int(rng.integers(0, 11))
        a = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
        spec = simulator.synthesize("modc", c, 2, 16, coeffs=a)
        measE = sum(b - a_ for a_, b in E)
        emp = math.log(pswf.empirical_remez_ratio(spec, E))
        bound = pswf.remez_constant("FourierPoly", c, N, measE).log_value
        worst_gap = max(worst_gap, emp - bound)
        bad += emp > bound
        done += 1
    bases = {}
    done = 0
    while done < 100:
        cc = float(rng.choice([0.5, 1.0, 5.0]))
        E = _random_E(rng, cc)
        if not E:
            continue
        N = int(rng.integers(0, 9))
        basis = bases.setdefault((cc, N), pswf.compute_basis(cc, N))
        a = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
        spec = simulator.synthesize("moda", cc, 2, 16, coeffs=a, basis=basis)
        measE = sum(b - a_ for a_, b in E)
        emp = math.log(pswf.empirical_remez_ratio(spec, E))
        bound = pswf.remez_constant("PSWF", cc, N, measE).log_value
        bad += emp > bound
        done += 1
    record(11, bad == 0, f"{bad} violations in 600 trials "
                         f"(max ln ratio - ln bound, polynomials = {worst_gap:.2f})")
    assert bad == 0


def test_criterion_12_gap_lemma_quadrature():
    bad = []
    for s in (0.5, 2.0):
        for L in (1.0, 4.0):
            k = gaussian(s)
            dc = gapanalysis.decay_constants(k, L)
            near = np.linspace(-math.pi, math.pi, 201)
            far = np.linspace(-50, 50, 2001)
            e_near = gapanalysis.sinc_flow_energy(k, L, near)
            e_far = gapanalysis.sinc_flow_energy(k, L, far)
            w = (1 + far ** 2) * e_far
            if np.min(e_near) < dc.c_lower:
                bad.append((s, L, "lower"))
            if np.max(w) > dc.C_upper:
                bad.append((s, L, "upper"))
            if np.max(w) > dc.packaged_C:
                bad.append((s, L, "packaged upper"))
            sc2 = (s * 0.5) ** 2
            C_ref = 8 + (1 + s * s * math.exp(sc2)) * L ** 3
            c_ref = 2 * (1 - math.exp(-2 * L * sc2)) / (math.pi ** 2 * sc2)
            if abs(dc.packaged_C - C_ref) > 1e-12 * C_ref or abs(dc.packaged_c - c_ref) > 1e-12 * c_ref:
                bad.append((s, L, "packaged arithmetic"))
    record(12, not bad, f"failures: {bad or 'none'}")
    assert not bad


def test_criterion_13_figure_sweeps(tmp_path):
    configs = {
        "fig1": ["--c", "0.5", "--xi", "0.45", "--m", "2,3,5", "--sigma", "1:200:1"],
        "fig2": ["--c", "0.5", "--sigma", "200", "--xi", "0.35:0.49:0.001", "--m", "2,3,5"],
    }
    problems = []
    for name, flags in configs.items():
        outs = []
        for run in range(2):
            p = tmp_path / f"{name}_{run}.csv"
            assert cli.main(["condnum", *flags, "--out", str(p)]) == 0
            outs.append(p.read_bytes())
        if outs[0] != outs[1]:
            problems.append(f"{name} not byte-identical")
        lines = outs[0].decode().splitlines()
        if lines[0] != "m,c,sigma_or_param,xi,lambda_min,lambda_max,cond":
            problems.append(f"{name} header")
        conds = [float(r.split(",")[-1]) for r in lines[1:]]
        if not all(math.isfinite(v) and v >= 1 for v in conds):
            problems.append(f"{name} has infinite or sub-unit condition numbers")
    expected_rows = {"fig1": 600, "fig2": 3 * 141}
    record(13, not problems, f"rows {expected_rows}; problems: {problems or 'none'}")
    assert not problems


def test_criterion_14_lu_vetterli_density():
    S = gapanalysis.lu_vetterli_set(3, 5, (0.0, 1e4))
    d = S.density()
    ok = abs(d - 0.4) <= 0.01 * 0.4
    record(14, ok, f"density over [0, 1e4] = {d:.5f} (target 0.4)")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
