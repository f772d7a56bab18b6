import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynsamp import blindspot, diffmatrix, framebounds as fb
from dynsamp.kernel import KernelSpec, kappa

G = KernelSpec.gaussian(1, 0.5)


def test_vandermonde_examples():
    b = fb.vandermonde_lower([1, 2])
    assert b.alpha == pytest.approx(1 / math.sqrt(7))
    # closed-form 2x2 singular values of [[1,1],[1,2]]
    smin = (3 - math.sqrt(5)) / 2
    assert smin == pytest.approx(0.381966, abs=1e-6)
    assert b.alpha <= smin
    one = fb.vandermonde_lower([0.3])
    assert one.alpha == 1.0
    for bad in ([0, 1], [1, 1]):
        with pytest.raises(ValueError):
            fb.vandermonde_lower(bad)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1), min_size=1, max_size=6, unique=True))
def test_vandermonde_alpha_tilde_below_alpha(v):
    b = fb.vandermonde_lower(v)
    smin = np.linalg.svd(fb.vandermonde_matrix(v), compute_uv=False)[-1]
    assert b.alpha <= smin * (1 + 1e-10) + 1e-300
    assert b.alpha_tilde <= b.alpha * (1 + 1e-12)


def test_psi_geom():
    for N in range(1, 11):
        assert fb.psi_geom(N, 1.0) == N
    assert fb.psi_geom(1, 0.3) == pytest.approx(1.0)
    assert fb.psi_geom(10 ** 6, 0.5) / 10 ** 6 == pytest.approx(0.75 / (2 * math.log(2)), abs=1e-5)
    with pytest.raises(ValueError):
        fb.psi_geom(3, 0.0)


def test_psi_geom_continuity_at_one():
    # the one-sided gap is about (N - 1) * 1e-7, so check the symmetric mean
    for N in (2, 5, 10):
        lo, hi = fb.psi_geom(N, 1 - 1e-7), fb.psi_geom(N, 1 + 1e-7)
        assert (lo + hi) / 2 == pytest.approx(N, abs=1e-9)
        assert abs(hi - N) <= 2 * (N - 1) * 1e-7


def test_lambda_min_lower_example():
    v = blindspot.coset_values(G, 2, 0.25)
    assert abs(v[0] - v[1]) == pytest.approx(0.11568, abs=1e-5)
    lo = fb.lambda_min_lower(G, 2, 0.25)
    assert lo == pytest.approx(1.36e-4, rel=1e-2)
    assert lo <= diffmatrix.spectrum(diffmatrix.build_pick(G, 2, 0.25))[0]
    assert fb.lambda_min_lower(G, 2, 0.5) == 0.0


def test_kappa_factor_limit():
    assert fb.kappa_factor(1 - 1e-10, 3) == pytest.approx(2 / 3, abs=1e-4)
    assert fb.kappa_factor(1.0, 2) == 1.0


def test_bt_upper():
    assert fb.lambda_min_upper_BT(2, 0.5, 2) == pytest.approx(
        float(32 * mpmath.exp(-mpmath.pi ** 2 / (8 * mpmath.log(2)))), rel=1e-14)
    assert fb.lambda_min_upper_BT(2, 0.5, 2) == pytest.approx(5.40, abs=5e-3)
    v = fb.lambda_min_upper_BT(2, 0.45, 2)
    for s in (0.5, 1, 10, 200):
        assert v > diffmatrix.spectrum(diffmatrix.build_pick(KernelSpec.gaussian(s, 0.5), 2, 0.45))[0]
    xs = np.linspace(0.01, 0.5, 50)
    vals = [fb.lambda_min_upper_BT(3, x, 2) for x in xs]
    # the estimate decreases as |xi| grows toward 1/2
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(ValueError):
        fb.lambda_min_upper_BT(2, 0.0, 2)


def test_frame_A_safe_set():
    A, B = fb.frame_A_safe_set(G, 2, 0.1)
    ref = 0.5 / (4 * math.e * math.pi ** 2) * 0.01 / 32 * (1 - math.exp(-0.25)) / 0.25
    assert A == pytest.approx(ref, rel=1e-12)
    assert A == pytest.approx(1.29e-6, rel=1e-2)
    assert B == pytest.approx(1 / (4 * math.pi ** 2))
    As = [fb.frame_A_safe_set(G, 3, d)[0] for d in (0.1, 0.01, 0.001)]
    assert As[0] > As[1] > As[2] > 0


def test_gaussian_explicit():
    A, R = fb.gaussian_explicit_A(1, 0.5, 2, 0.125)
    assert R == pytest.approx(2 * min(0.125 * math.exp(-1 / 64), 0.5 * math.exp(-0.25)))
    assert R == pytest.approx(0.2461, abs=1e-4)
    assert A > 0
    ref = (0.5 / (2 * math.e * math.pi ** 2 * (2 * 0.25 + 2))
           * (4 * 0.5 * R * 0.125) ** 2 / 2 ** (1 - 2 + 8))
    assert A == pytest.approx(ref, rel=1e-12)
    a_mid = fb.gaussian_explicit_A(1, 0.5, 3, 0.125)[0]
    assert fb.gaussian_explicit_A(1e-3, 0.5, 3, 0.125)[0] < a_mid
    assert fb.gaussian_explicit_A(1e3, 0.5, 3, 0.125)[0] < a_mid
    with pytest.raises(ValueError):
        fb.gaussian_explicit_A(1, 0.5, 2, 0.3)


def test_model_kappa():
    vals = [fb.model_log_kappa(1, 0.5, 2, N, "FourierPoly") for N in range(11)]
    assert np.all(np.diff(vals) < 0)
    k = fb.model_kappa(1, 0.5, 2, 0, "FourierPoly", measE=4.0)
    assert float(k) == pytest.approx(fb.gaussian_explicit_A(1, 0.5, 2, 0.125)[0], rel=1e-12)
    assert fb.model_kappa(1, 0.5, 2, 3, "PSWF") > 0
    with pytest.raises(ValueError):
        fb.model_log_kappa(1, 0.5, 2, 3, "SincTranslates")
    a = fb.model_log_kappa(1, 0.5, 2, 3, "SincTranslates", remez_gamma=10)
    b = fb.model_log_kappa(1, 0.5, 2, 3, "SincTranslates", remez_gamma=10, nonlinear=True)
    assert b < a


def test_w_matrix_riemann_sum_converges_to_B():
    m, xi = 2, 0.3
    B = diffmatrix.build_pick(G, m, xi)
    # nodes phi_hat^(1/m), so that exponents (i-1)/N sweep t/m over [0, 1)
    v = np.exp(-np.asarray(B.exponents) / m)
    errs = []
    for N in (100, 1000, 10000):
        W = fb.w_matrix(v, N)
        errs.append(np.max(np.abs(W.T @ W / (m * N) - B.entries)))
    assert errs[0] > errs[1] > errs[2]


def test_report_text():
    rep = fb.report(G, 2, 0.125, model="FourierPoly", N=2)
    text = rep.as_text()
    assert "A_lower = " in text and "B_upper = " in text and "gaussian_R = " in text
    assert rep.A_lower <= rep.B_upper
    assert rep.lambda_min_lower(0.25) <= rep.lambda_min_upper(0.25)


def test_sandwich_csv(tmp_path):
    rows = fb.sandwich_rows(G, 2, [0.1, 0.25, 0.5])
    assert rows[-1][1] == 0.0
    p = tmp_path / "s.csv"
    with open(p, "w", newline="") as fh:
        fb.write_sandwich_csv(rows, fh)
    assert p.read_text().splitlines()[0] == "xi,lower_bound,lambda_min,upper_bound_bt,m_cap"
