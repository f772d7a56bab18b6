"""Command-line entry point.

Exit status is 0 on success, 2 on invalid input and 1 when a numerical
routine gives up (for example an exhausted truncation retry).
"""

from __future__ import annotations

import argparse
import contextlib
import io
import math
import sys
from decimal import Decimal, InvalidOperation

import numpy as np

from . import blindspot, diffmatrix, framebounds, gapanalysis, pswf, simulator
from .kernel import KernelError, KernelSpec


class UsageError(ValueError):
    pass


def parse_grid(text: str) -> list[float]:
    """Parse ``a:b:s`` ranges and comma-separated values.

    Ranges start at ``a`` and step by ``s`` using exact decimal arithmetic;
    ``b`` is included only when hit exactly.
    """
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                bits = part.split(":")
                if len(bits) != 3:
                    raise UsageError(f"range {part!r} must look like start:end:step")
                a, b, s = (Decimal(v) for v in bits)
                if s <= 0:
                    raise UsageError(f"range step must be positive in {part!r}")
                n = int((b - a) // s) if b >= a else -1
                out.extend(float(a + i * s) for i in range(n + 1))
            else:
                out.append(float(Decimal(part)))
        except InvalidOperation:
            raise UsageError(f"not a number: {part!r}") from None
    return out


def parse_ints(text: str) -> list[int]:
    vals = parse_grid(text)
    if any(v != int(v) for v in vals):
        raise UsageError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _kernel(args, param=None) -> KernelSpec:
    fam = args.kernel
    if fam == "tabulated":
        if not args.table:
            raise UsageError("--kernel tabulated needs --table")
        return KernelSpec.from_csv(args.table, args.c)
    if param is None:
        param = {"gaussian": args.sigma, "fractional": args.alpha, "poisson": args.y}[fam]
        if isinstance(param, str):
            vals = parse_grid(param)
            if len(vals) != 1:
                raise UsageError("this subcommand takes a single kernel parameter")
            param = vals[0]
    return KernelSpec(fam, args.c, float(param))


def _add_kernel(p, sigma_default="1"):
    p.add_argument("--kernel", default="gaussian",
                   choices=["gaussian", "fractional", "poisson", "tabulated"])
    p.add_argument("--sigma", default=sigma_default)
    p.add_argument("--alpha", default="1")
    p.add_argument("--y", default="1")
    p.add_argument("--table", help="CSV with header xi,phi_hat")
    p.add_argument("--c", type=float, default=0.5)


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        # build in memory so a failure leaves no partial file
        buf = io.StringIO()
        yield buf
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _kv(key, val):
    if isinstance(val, float):
        val = format(val, ".17g")
    print(f"{key} = {val}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_condnum(args):
    ms = parse_ints(args.m)
    xis = parse_grid(args.xi)
    pname = {"gaussian": "sigma", "fractional": "alpha", "poisson": "y"}.get(args.kernel)
    params = parse_grid(getattr(args, pname)) if pname else None
    if not ms or not xis or (params is not None and not params):
        raise UsageError("empty grid")
    if any(m < 1 for m in ms):
        raise UsageError("m must be >= 1")
    k = _kernel(args, params[0] if params else None)
    rows = diffmatrix.sweep(k, ms, xis, params)
    with _output(args.out) as fh:
        diffmatrix.write_sweep_csv(rows, fh)


def cmd_bounds(args):
    k = _kernel(args)
    rep = framebounds.report(k, args.m, args.eta, args.model, args.N, args.gamma)
    print(rep.as_text())
    xis = parse_grid(args.xi)
    if not xis:
        raise UsageError("empty xi grid")
    rows = framebounds.sandwich_rows(k, args.m, xis)
    if args.csv:
        with _output(args.csv) as fh:
            framebounds.write_sandwich_csv(rows, fh)
    else:
        print()
        framebounds.write_sandwich_csv(rows, sys.stdout)


def cmd_roundtrip(args):
    k = _kernel(args)
    c, m = args.c, args.m
    nodes = None
    if args.nodes is not None:
        # node positions are given in units of the Nyquist step pi/c
        nodes = [v * math.pi / c for v in parse_grid(args.nodes)]
    if args.model == "modb" and not nodes:
        raise UsageError("--model modb needs --nodes")
    spec = simulator.synthesize(args.model, c, m, args.Q, nodes=nodes, N=args.N, seed=args.seed)
    bs = blindspot.build_sets(c, m, args.eta)
    _kv("model", spec.label)
    _kv("m", m)
    _kv("Q", args.Q)
    if args.t0_only:
        s = simulator.forward_samples(spec, k, 0.0, args.k_range, method="quad")
        norm = float(np.linalg.norm(s))
        _kv("t0_sample_norm", norm)
        _kv("signal_norm", math.sqrt(spec.norm2()))
        _kv("identifiable_at_t0", "no" if norm <= 1e-10 else "yes")
        return
    spec_E = simulator.restrict(spec, bs)
    td = simulator.trace(spec_E, k, args.n_t, noise=args.noise, seed=args.seed)
    res = simulator.reconstruct(td, k, bs, args.tau, truth=spec_E)
    delta = blindspot.delta_from_eta(k, m, args.eta)
    A, B = framebounds.frame_A_safe_set(k, m, delta)
    _kv("noise", args.noise)
    _kv("relative_error_on_E", res.relative_error_on_E)
    _kv("min_lambda_min_on_E", float(np.nanmin(res.per_xi_lambda_min)))
    _kv("truncated_cells", int(np.sum(res.truncated_cells)))
    _kv("A_analytic", A)
    _kv("B_analytic", B)
    if args.out:
        with _output(args.out) as fh:
            simulator.write_spectrum_csv(res.recovered, fh)
    if args.trace_out:
        with _output(args.trace_out) as fh:
            simulator.write_trace_csv(td, fh)


def cmd_pswf(args):
    if args.action == "remez":
        return cmd_remez(args)
    basis = pswf.compute_basis(args.c, args.N)
    with _output(args.out) as fh:
        fh.write("n,chi_n,lambda_n,abs_mu_n\n")
        for n in range(basis.N + 1):
            fh.write(",".join([str(n), format(float(basis.chi[n]), ".17g"),
                               format(float(basis.lam[n]), ".17g"),
                               format(float(basis.mu_abs[n]), ".17g")]) + "\n")


def cmd_remez(args):
    measE = args.measE
    if measE is None:
        measE = float(blindspot.build_sets(args.c, args.m, args.eta).measure_E)
    rc = pswf.remez_constant(args.model, args.c, args.N, measE, args.gamma)
    _kv("model", rc.model)
    _kv("N", rc.N)
    _kv("measure_E", float(measE))
    _kv("K", "na" if rc.K is None else rc.K)
    _kv("log10_constant", rc.log10_value)
    if args.trials and args.model == "FourierPoly":
        worst = _fourier_trials(args.c, args.N, args.m, args.eta, args.trials, args.seed)
        _kv("trials", args.trials)
        _kv("max_log10_empirical_ratio", worst)


def _fourier_trials(c, N, m, eta, trials, seed):
    """Worst empirical ratio for random polynomials in ``xi`` on the safe set."""
    bs = blindspot.build_sets(c, m, eta)
    E = bs.intervals_float()
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(trials):
        a = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
        spec = simulator.synthesize("modc", c, m, 64, coeffs=a)
        worst = max(worst, math.log10(pswf.empirical_remez_ratio(spec, E)))
    return worst


def cmd_gap(args):
    k = KernelSpec.gaussian(args.sigma, args.c)
    if args.action == "bound":
        R, dm, dp = gapanalysis.max_gap_bound(args.A, args.B, k, args.L)
        _kv("R", R)
        _kv("D_minus_lower", dm)
        _kv("D_plus_upper", dp)
        return
    xs = parse_grid(args.x)
    if not xs:
        raise UsageError("empty x grid")
    rows = gapanalysis.verify_rows(k, args.L, np.array(xs))
    with _output(args.out) as fh:
        gapanalysis.write_verify_csv(rows, fh)


def cmd_blindspot(args):
    print(blindspot.show(blindspot.build_sets(args.c, args.m, args.eta)))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynsamp", description="Space-time sampling toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("condnum", help="condition-number sweep of B_m(xi) as CSV")
    _add_kernel(p)
    p.add_argument("--m", default="2,3,5")
    p.add_argument("--xi", default="0.45")
    p.add_argument("--out")
    p.set_defaults(func=cmd_condnum)

    p = sub.add_parser("bounds", help="analytic frame constants and sandwich CSV")
    _add_kernel(p)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.125)
    p.add_argument("--xi", default="0.05:0.45:0.05")
    p.add_argument("--model", choices=pswf.MODELS)
    p.add_argument("--N", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("roundtrip", help="simulate samples and reconstruct")
    _add_kernel(p)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--Q", type=int, default=256)
    p.add_argument("--eta", type=float, default=0.125)
    p.add_argument("--n-t", dest="n_t", type=int, default=48)
    p.add_argument("--tau", type=float, default=1e-12)
    p.add_argument("--model", default="random", choices=["random", "moda", "modb", "modc"])
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--nodes", help="sinc-translate nodes in units of pi/c")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--t0-only", dest="t0_only", action="store_true")
    p.add_argument("--k-range", dest="k_range", type=int, default=20)
    p.add_argument("--out")
    p.add_argument("--trace-out", dest="trace_out")
    p.set_defaults(func=cmd_roundtrip)

    def remez_args(p):
        p.add_argument("--model", default="FourierPoly", choices=pswf.MODELS)
        p.add_argument("--c", type=float, default=0.5)
        p.add_argument("--N", type=int, default=10)
        p.add_argument("--m", type=int, default=2)
        p.add_argument("--eta", type=float, default=0.125)
        p.add_argument("--measE", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--trials", type=int, default=0)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("pswf", help="prolate eigenvalue table or Remez constant")
    p.add_argument("action", nargs="?", default="table", choices=["table", "remez"])
    remez_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pswf)

    p = sub.add_parser("remez", help="Remez-type constant with optional empirical check")
    remez_args(p)
    p.set_defaults(func=cmd_remez)

    p = sub.add_parser("gap", help="sinc-flow energy checks and maximal-gap bound")
    p.add_argument("action", choices=["verify", "bound"])
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--x", default="-50:50:0.5")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("blindspot", help="print the safe frequency set")
    p.add_argument("action", nargs="?", default="show", choices=["show"])
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.125)
    p.set_defaults(func=cmd_blindspot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args.func(args)
    except (UsageError, KernelError, ValueError) as e:
        print(f"dynsamp: error: {e}", file=sys.stderr)
        return 2
    except (pswf.TruncationError, ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"dynsamp: numerical failure: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
