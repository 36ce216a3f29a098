"""Command-line interface.

``smoothdiv compute`` evaluates one divergence on two state files,
``smoothdiv verify`` runs verification suites on sampled or given pairs and
``smoothdiv sweep`` tabulates a divergence over a random ensemble.

Exit codes: 0 success, 1 failed relation, 2 parse error, 3 domain error,
4 numerical failure.
"""
import argparse
import csv
import dataclasses
import hashlib
import json
import math
import sys

import numpy as np

from . import divergences as dv
from . import matcore as mc
from . import sdpsolve as sd
from . import verify as vf
from .divergences import SmoothingSpec
from .errors import ConvergenceFailure, NumericalFailure, SmoothdivError

FORMAT_VERSION = "1"
EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 1, 2, 3, 4

DIVERGENCES = ("umegaki", "dmax", "dtilde", "dtilde_dual", "dh", "dh_sdp", "dspec",
               "hockey", "renyi", "smooth", "hilbert", "dobs")


class ParseError(ValueError):
    """Malformed input file or argument; the message names the field."""


# ---------------------------------------------------------------------------
# serialization

def _num(x):
    """17 significant digits round-trip every double."""
    return float(f"{x:.17g}")


def jsonable(obj):
    """Recursively convert numpy values and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


def state_to_dict(rho, kind=None):
    """StateFile dictionary of a density matrix.

    ``kind`` defaults to ``'classical'`` for diagonal matrices.
    """
    rho = mc.as_state(rho)
    d = rho.shape[0]
    diag = np.allclose(rho, np.diag(np.diag(rho)), atol=0.0)
    kind = kind or ("classical" if diag else "density")
    if kind == "classical":
        data = [_num(x) for x in np.real(np.diag(rho))]
    else:
        data = [[[_num(z.real), _num(z.imag)] for z in row] for row in rho]
    return dict(format_version=FORMAT_VERSION, kind=kind, dim=d, data=data)


def state_from_dict(obj):
    """Parse a StateFile dictionary into a density matrix.

    Raises
    ------
    ParseError
        On a missing or malformed field.
    DomainError
        If the parsed matrix is not a state.
    """
    if not isinstance(obj, dict):
        raise ParseError("state file: top level must be an object")
    for key in ("format_version", "kind", "dim", "data"):
        if key not in obj:
            raise ParseError(f"state file: missing field {key!r}")
    if obj["format_version"] != FORMAT_VERSION:
        raise ParseError(f"state file: unsupported format_version {obj['format_version']!r}")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError("state file: field 'dim' must be a positive integer")
    data = obj["data"]
    try:
        if obj["kind"] == "classical":
            p = np.array(data, dtype=float)
            if p.shape != (dim,):
                raise ParseError(f"state file: field 'data' must have length {dim}")
            if abs(p.sum() - 1.0) > 1e-10:
                raise ParseError("state file: field 'data' must sum to 1 within 1e-10")
            rho = np.diag(p).astype(complex)
        elif obj["kind"] == "density":
            a = np.array(data, dtype=float)
            if a.shape != (dim, dim, 2):
                raise ParseError(f"state file: field 'data' must be a {dim}x{dim} array "
                                 "of [re, im] pairs")
            rho = a[..., 0] + 1j * a[..., 1]
        else:
            raise ParseError(f"state file: field 'kind' must be 'density' or 'classical', "
                             f"got {obj['kind']!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SmoothdivError):
            raise
        raise ParseError(f"state file: field 'data' is not numeric ({exc})") from None
    return mc.as_state(rho)


def write_state(path, rho, kind=None):
    with open(path, "w") as fh:
        json.dump(state_to_dict(rho, kind), fh, indent=1)
        fh.write("\n")


def read_state(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read state file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"state file {path!r}: invalid JSON ({exc.msg})") from None
    return state_from_dict(obj)


def digest(rho):
    """Short content hash of the serialized state."""
    blob = json.dumps(state_to_dict(rho, "density"), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# run configuration

@dataclasses.dataclass
class RunConfig:
    """Everything needed to reproduce a verification run."""

    suite: str = "all"
    seed: int = 0
    dims: tuple = (2,)
    samples: int = 5
    eps: tuple = vf.GridSpec().eps
    inner: int = 40
    alpha_upper: tuple = vf.GridSpec().alpha_upper
    alpha_lower: tuple = vf.GridSpec().alpha_lower
    tol: float = vf.SLACK_TOL
    rate: float = None
    n_max: int = 8
    out: str = None
    witnesses: bool = False
    rho: str = None
    sigma: str = None

    def grid(self):
        return vf.GridSpec(eps=tuple(self.eps), inner=self.inner,
                           alpha_upper=tuple(self.alpha_upper),
                           alpha_lower=tuple(self.alpha_lower))

    def to_dict(self):
        d = dataclasses.asdict(self)
        for k in ("dims", "eps", "alpha_upper", "alpha_lower"):
            d[k] = [float(x) if k != "dims" else int(x) for x in d[k]]
        return d


def _floats(text, field):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"--{field}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ParseError(f"--{field}: empty list")
    return vals


def _ints(text, field):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"--{field}: expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# compute

def compute(name, rho, sigma, eps=None, alpha=None, lam=None, metric="trace",
            normalisation="normalised", family="petz"):
    """Evaluate one divergence; returns (value, method, residuals)."""
    def need(x, flag):
        if x is None:
            raise ParseError(f"divergence {name!r} requires --{flag}")
        return x

    res = {}
    if name == "umegaki":
        return dv.umegaki(rho, sigma), "eigendecomposition", res
    if name == "dmax":
        return dv.dmax(rho, sigma), "generalized eigenvalue", res
    if name == "dtilde":
        return dv.dtilde_max(rho, sigma, need(eps, "eps")), "hockey-stick root (Brent)", res
    if name == "dtilde_dual":
        return (dv.dtilde_max_dual(rho, sigma, need(eps, "eps")),
                "Dinkelbach iteration on the dual", res)
    if name == "dh":
        t = dv.dh_test(rho, sigma, need(eps, "eps"))
        res["dual_gap"] = t.dual_gap
        res["tr_m_rho"] = t.type1
        return t.value, "Neyman-Pearson frontier", res
    if name == "dh_sdp":
        val, sol = sd.dh_sdp(rho, sigma, need(eps, "eps"), return_solution=True)
        return val, "interior-point SDP", _sdp_residuals(sol)
    if name == "dspec":
        return dv.dspec(rho, sigma, need(eps, "eps")), "spectral threshold search", res
    if name == "hockey":
        return dv.hockey_stick(rho, sigma, need(lam, "lam")), "positive part trace", res
    if name == "renyi":
        return dv.renyi(rho, sigma, need(alpha, "alpha"), family), f"{family} Renyi", res
    if name == "smooth":
        spec = SmoothingSpec(metric, normalisation, need(eps, "eps"))
        val, sol = sd.smooth_dmax(rho, sigma, spec, return_solution=True)
        method = "interior-point SDP" if sol is not None else "linear program or closed form"
        return val, method, _sdp_residuals(sol)
    if name == "hilbert":
        spec = SmoothingSpec(metric, "normalised", need(eps, "eps"))
        return sd.smooth_hilbert(rho, sigma, spec), "Brent search over SDP family", res
    if name == "dobs":
        return dv.dobs(rho, sigma), "Neyman-Pearson frontier search", res
    raise ParseError(f"unknown divergence {name!r}; choose from {', '.join(DIVERGENCES)}")


def _sdp_residuals(sol):
    if sol is None or not hasattr(sol, "gap"):
        return {}
    return dict(status=sol.status, gap=sol.gap, primal_residual=sol.primal_residual,
                dual_residual=sol.dual_residual, iterations=sol.iterations)


def cmd_compute(args, out):
    rho, sigma = read_state(args.rho), read_state(args.sigma)
    eps = args.eps[0] if args.eps else None
    alpha = args.alpha[0] if args.alpha else None
    value, method, residuals = compute(args.divergence, rho, sigma, eps=eps, alpha=alpha,
                                       lam=args.lam, metric=args.metric,
                                       normalisation=args.normalisation, family=args.family)
    params = dict(eps=eps, alpha=alpha, lam=args.lam)
    if args.divergence in ("smooth", "hilbert"):
        params.update(metric=args.metric, normalisation=args.normalisation)
    if args.divergence == "renyi":
        params["family"] = args.family
    report = dict(divergence=args.divergence,
                  inputs=dict(rho=digest(rho), sigma=digest(sigma)),
                  parameters={k: v for k, v in params.items() if v is not None},
                  value=value, method=method, residuals=residuals)
    json.dump(jsonable(report), out, indent=1)
    out.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def _pairs(cfg):
    if cfg.rho or cfg.sigma:
        if not (cfg.rho and cfg.sigma):
            raise ParseError("--rho and --sigma must be given together")
        return [(dict(pair_id="user", rho=cfg.rho, sigma=cfg.sigma),
                 read_state(cfg.rho), read_state(cfg.sigma))]
    if not cfg.dims or any(d < 1 or d > 16 for d in cfg.dims):
        raise ParseError("--dims: dimensions must lie in [1, 16]")
    if cfg.samples < 1:
        raise ParseError("--samples must be positive")
    pairs = vf.sample_pairs(cfg.dims, cfg.samples, cfg.seed)
    for label, _, _ in pairs:
        label["pair_id"] = f"{label['dim']}-{label['index']}"
    return pairs


def _exponent_report(cfg, pairs):
    report = vf.CheckReport("exponents")
    for label, rho, sigma in pairs:
        d = rho.shape[0]
        if d == 1:
            continue
        n_max = min(cfg.n_max, int(math.floor(math.log(mc.MAX_DIM) / math.log(d) + 1e-12)))
        if n_max < 3:
            continue
        if cfg.rate is not None:
            branches = [("error" if cfg.rate > dv.umegaki(rho, sigma) else "sc", cfg.rate)]
        else:
            D = dv.umegaki(rho, sigma)
            D2 = dv.renyi(rho, sigma, 2.0, "sandwiched")
            if not (math.isfinite(D2) and D2 > D):
                continue
            branches = [("error", 0.5 * (D + D2)), ("sc", 0.5 * D)]
        for branch, rate in branches:
            report.merge(vf.estimate_exponents(rho, sigma, rate, n_max=n_max, branch=branch,
                                               label=label))
    return report


def _apply_tol(report, tol):
    for rec in report.relations.values():
        if rec.tol == vf.SLACK_TOL:
            rec.tol = tol


def _embed_matrices(report, pairs):
    by_id = {label["pair_id"]: (rho, sigma) for label, rho, sigma in pairs}
    for rec in report.relations.values():
        w = rec.witness or {}
        pair = w.get("pair")
        if isinstance(pair, dict) and pair.get("pair_id") in by_id:
            rho, sigma = by_id[pair["pair_id"]]
            w["rho"] = state_to_dict(rho, "density")
            w["sigma"] = state_to_dict(sigma, "density")


def run_verify(cfg):
    """Run the configured suites; returns the report dictionary."""
    pairs = _pairs(cfg)
    grid = cfg.grid()
    suites = vf.SUITES if cfg.suite == "all" else (cfg.suite,)
    reports = []
    for suite in suites:
        if suite == "exponents":
            rep = _exponent_report(cfg, pairs)
        else:
            rep = vf.run_suite(suite, pairs, grid)
        _apply_tol(rep, cfg.tol)
        if cfg.witnesses:
            _embed_matrices(rep, pairs)
        reports.append(rep)
    return dict(config=dict(run=cfg.to_dict()),
                passed=all(r.passed for r in reports),
                suites={r.suite: r.to_dict() for r in reports})


def _config_from_args(args):
    if args.config:
        try:
            with open(args.config) as fh:
                run = json.load(fh)["config"]["run"]
            return RunConfig(**{k: v for k, v in run.items()
                                if k in RunConfig.__dataclass_fields__})
        except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ParseError(f"--config: cannot load run config ({exc})") from None
    cfg = RunConfig(suite=args.suite)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ParseError("--seed must be a 64-bit unsigned integer")
        cfg.seed = args.seed
    if args.dims:
        cfg.dims = tuple(_ints(args.dims, "dims"))
    if args.samples is not None:
        cfg.samples = args.samples
    if args.eps:
        cfg.eps = tuple(args.eps)
    if args.mu is not None:
        cfg.inner = args.mu
    if args.alpha:
        cfg.alpha_upper = tuple(a for a in args.alpha if a > 1)
        cfg.alpha_lower = tuple(a for a in args.alpha if 0 < a < 1)
        if not cfg.alpha_upper or not cfg.alpha_lower:
            raise ParseError("--alpha: need values both in (0, 1) and in (1, inf)")
    if args.tol is not None:
        cfg.tol = args.tol
    cfg.rate = args.rate
    cfg.out = args.out
    cfg.witnesses = args.witnesses
    cfg.rho, cfg.sigma = args.rho, args.sigma
    return cfg


def cmd_verify(args, out):
    cfg = _config_from_args(args)
    if args.config and args.out:
        cfg.out = args.out
    cfg.grid()  # validates the grids before any work
    report = run_verify(cfg)
    text = json.dumps(jsonable(report), indent=1) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    for name, rep in report["suites"].items():
        bad = [t for t, r in rep["relations"].items() if not r["passed"]]
        line = f"{name}: {'PASS' if rep['passed'] else 'FAIL'}"
        if bad:
            line += " (" + ", ".join(bad) + ")"
        print(line, file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# sweep

def cmd_sweep(args, out):
    if args.ensemble not in ("haar_pure", "hs_mixed", "classical_dirichlet"):
        raise ParseError(f"--ensemble: unknown ensemble {args.ensemble!r}")
    dims = _ints(args.dims, "dims") if args.dims else [2]
    seed = args.seed if args.seed is not None else 0
    samples = args.samples if args.samples is not None else 10
    eps_grid = args.eps or list(vf.GridSpec().eps)
    pairs = vf.sample_pairs(dims, samples, seed, kinds=(args.ensemble,))
    fh = open(args.out, "w", newline="") if args.out else out
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", "dim", "eps", "value", "method", "residual"])
        for label, rho, sigma in pairs:
            sub_seed = label["seeds"][0]
            for e in eps_grid:
                value, method, res = compute(args.divergence, rho, sigma, eps=e,
                                             alpha=args.alpha[0] if args.alpha else None,
                                             lam=args.lam, metric=args.metric,
                                             normalisation=args.normalisation,
                                             family=args.family)
                resid = res.get("dual_gap", res.get("gap", 0.0))
                writer.writerow([sub_seed, label["dim"], f"{e:.17g}", _fmt(value), method,
                                 _fmt(resid)])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def _fmt(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# entry point

def build_parser():
    p = argparse.ArgumentParser(prog="smoothdiv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def floats(field):
        return lambda text: _floats(text, field)

    def common(q):
        q.add_argument("--eps", type=floats("eps"), help="comma-separated smoothing parameters")
        q.add_argument("--alpha", type=floats("alpha"), help="comma-separated Renyi orders")
        q.add_argument("--lam", type=float, help="hockey-stick weight")
        q.add_argument("--metric", default="trace", choices=("trace", "purified"))
        q.add_argument("--normalisation", default="normalised",
                       choices=("normalised", "subnormalised"))
        q.add_argument("--family", default="petz", choices=("petz", "sandwiched"))
        q.add_argument("--out", help="output file (default: standard output)")

    c = sub.add_parser("compute", help="evaluate one divergence")
    c.add_argument("divergence", choices=DIVERGENCES)
    c.add_argument("--rho", required=True, help="state file of rho")
    c.add_argument("--sigma", required=True, help="state file of sigma")
    common(c)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("suite", nargs="?", default="all", choices=vf.SUITES + ("all",))
    v.add_argument("--rho", help="state file of rho (instead of sampling)")
    v.add_argument("--sigma", help="state file of sigma")
    v.add_argument("--eps", type=floats("eps"), help="outer smoothing grid")
    v.add_argument("--mu", type=int, help="points of the inner mu/delta/c grids")
    v.add_argument("--alpha", type=floats("alpha"), help="Renyi orders, both branches")
    v.add_argument("--dims", help="comma-separated dimensions")
    v.add_argument("--samples", type=int, help="pairs per dimension")
    v.add_argument("--seed", type=int, help="64-bit root seed")
    v.add_argument("--tol", type=float, help="slack tolerance of the inequalities")
    v.add_argument("--rate", type=float, help="rate for the exponent suite (bits per copy)")
    v.add_argument("--out", help="report path (default: standard output)")
    v.add_argument("--witnesses", action="store_true", help="embed witness matrices")
    v.add_argument("--config", help="re-run from the config embedded in a report")

    s = sub.add_parser("sweep", help="tabulate a divergence over a random ensemble")
    s.add_argument("divergence", choices=DIVERGENCES)
    s.add_argument("--ensemble", default="hs_mixed")
    s.add_argument("--dims")
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    common(s)
    return p


def main(argv=None, out=None):
    """Console entry point; returns the exit code."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    handlers = dict(compute=cmd_compute, verify=cmd_verify, sweep=cmd_sweep)
    try:
        return handlers[args.command](args, out)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NumericalFailure, ConvergenceFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SmoothdivError, ValueError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
