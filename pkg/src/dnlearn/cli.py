"""Command-line surface: experiments, baseline, 1-D oracle studies,
derivative checks, and report rendering."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .nets import (JetTerm, MlpSpec, forward, forward_jet, init_params,
                   objective_value, objective_value_and_grad)
from .oracle1d import RATE_DATASETS, Grid1d, dn_iterate_1d, robin_rate_study
from .reporting import (ConfigError, ExperimentConfig, load_config,
                        render_report, run_experiment)

GRADCHECK_TOLS = {"gradient": 1e-6, "laplacian": 1e-5, "parameter": 1e-5}


# ---------------------------------------------------------------------------
# Derivative suites
# ---------------------------------------------------------------------------

def _fd_gradient(fun, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def _fd_laplacian(fun, x, h=1e-5):
    f0 = fun(x)
    total = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        total += (fun(x + e) - 2.0 * f0 + fun(x - e)) / (h * h)
    return total


def _check_term(points, kind):
    n = points.shape[0]
    if kind == "ritz":
        def fn(u, gu, lu):
            value = float(np.mean(0.5 * np.sum(gu * gu, axis=1) - u))
            return value, np.full(n, -1.0 / n), gu / n, None
        return JetTerm(points=points, fn=fn, mode="grad")

    def fn(u, gu, lu):
        r = lu - u
        return float(np.mean(r * r)), -2.0 * r / n, None, 2.0 * r / n
    return JetTerm(points=points, fn=fn, mode="jet")


def gradcheck(cases: int = 100, seed: int = 0) -> dict[str, float]:
    """Worst relative finite-difference error of the three derivative paths
    over `cases` random (architecture, parameters, points) draws."""
    rng = np.random.default_rng(seed)
    specs = [MlpSpec(1, 5), MlpSpec(2, 8), MlpSpec(3, 6), MlpSpec(4, 10)]
    param_spec = MlpSpec(2, 6)
    worst = {"gradient": 0.0, "laplacian": 0.0, "parameter": 0.0}
    for case in range(cases):
        spec = specs[case % len(specs)]
        params = init_params(spec, seed=1000 + case)
        x = rng.uniform(-1.0, 1.0, size=2)
        jet = forward_jet(params, spec, x)
        f = lambda z: forward(params, spec, z)
        g_fd = _fd_gradient(f, x)
        l_fd = _fd_laplacian(f, x)
        g_err = np.max(np.abs(jet.grad - g_fd) / (1.0 + np.abs(jet.grad)))
        l_err = abs(jet.laplacian - l_fd) / (1.0 + abs(jet.laplacian))
        worst["gradient"] = max(worst["gradient"], float(g_err))
        worst["laplacian"] = max(worst["laplacian"], float(l_err))

        term = _check_term(rng.uniform(-1.0, 1.0, size=(8, 2)),
                           "ritz" if case % 2 == 0 else "residual")
        p = init_params(param_spec, seed=5000 + case)
        _, grad = objective_value_and_grad(p, param_spec, [term])
        h = 1e-6
        for i in range(p.size):
            e = np.zeros_like(p)
            e[i] = h
            fd = (objective_value(p + e, param_spec, [term])
                  - objective_value(p - e, param_spec, [term])) / (2.0 * h)
            p_err = abs(grad[i] - fd) / (1.0 + abs(fd))
            worst["parameter"] = max(worst["parameter"], float(p_err))
    return worst


def _cmd_gradcheck(args) -> int:
    worst = gradcheck(args.cases, args.seed)
    ok = True
    for kind in ("gradient", "laplacian", "parameter"):
        tol = GRADCHECK_TOLS[kind]
        passed = worst[kind] <= tol
        ok = ok and passed
        print(f"{kind}: worst relative error {worst[kind]:.3e} "
              f"(tolerance {tol:.0e}) {'ok' if passed else 'FAIL'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Oracle studies
# ---------------------------------------------------------------------------

def _cmd_oracle(args) -> int:
    if args.study == "robin-rate":
        data = RATE_DATASETS[args.dataset]
        betas = [10.0**k for k in range(1, 5)]
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["side", "beta", "distance", "used", "slope"])
            for side in ("dirichlet", "neumann"):
                study = robin_rate_study(betas, data, side=side)
                for beta, dist, used in zip(study.betas, study.distances, study.used):
                    writer.writerow([side, repr(beta), repr(dist), used,
                                     repr(study.slope)])
                print(f"{side}: fitted slope {study.slope:.4f} over beta in "
                      f"[{betas[0]:g}, {betas[-1]:g}]")
        print(f"wrote {args.out}")
        return 0

    grid = Grid1d(199)
    cases = [("symmetric", 1.0, 1.0, 0.5), ("contrast", 1.0, 1000.0, 1.0)]
    f = lambda x: np.sin(3.0 * np.asarray(x)) + 1.0
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case", "iteration", "trace"])
        for name, c1, c2, rho in cases:
            history = dn_iterate_1d(c1, c2, f, rho, 0.0, 8, grid)
            for k, value in enumerate(history):
                writer.writerow([name, k, repr(float(value))])
            print(f"{name}: trace after 8 iterations {history[-1]:.10f}")
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _split_pair(raw: str, caster, flag: str, count: int = 2):
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != count:
        raise ConfigError(f"invalid value for key {flag}: {raw!r}")
    try:
        return tuple(caster(p) for p in parts)
    except ValueError:
        raise ConfigError(f"invalid value for key {flag}: {raw!r}") from None


def _experiment_flags(sub, with_method: bool):
    sub.add_argument("--config", help="experiment config file (.ini)")
    sub.add_argument("--problem", help="circle | zigzag | checkerboard")
    sub.add_argument("--c", help="coefficient pair c1,c2")
    if with_method:
        sub.add_argument("--method", help="dnla_ritz | dnla_pinns | deepddm")
    sub.add_argument("--preset", default="desk", help="paper | desk")
    sub.add_argument("--rho", type=float, default=1.0)
    sub.add_argument("--max-outer", type=int, default=2)
    sub.add_argument("--repeats", type=int, default=5)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--outdir", default="runs")
    sub.add_argument("--epochs", help="override pair epochs_dirichlet,epochs_neumann")
    sub.add_argument("--counts", help="override triple n_interior,n_boundary,n_interface")
    sub.add_argument("--width", type=int, default=None)
    sub.add_argument("--hidden-layers", type=int, default=None)
    sub.add_argument("--stop-tol", type=float, default=None)
    sub.add_argument("--lr0", type=float, default=None)
    sub.add_argument("--weight-decay", type=float, default=None)
    sub.add_argument("--no-warm-start", action="store_true")


def _config_from_args(args, parser, method: str | None) -> ExperimentConfig:
    if args.config:
        return load_config(args.config)
    missing = [flag for flag, value in
               [("--problem", args.problem), ("--c", args.c),
                ("--method", method)] if not value]
    if missing:
        parser.error(f"missing {', '.join(missing)} (or use --config)")
    c1, c2 = _split_pair(args.c, float, "--c")
    kwargs = dict(problem=args.problem, c1=c1, c2=c2, method=method,
                  preset=args.preset, rho=args.rho, max_outer=args.max_outer,
                  repeats=args.repeats, seed=args.seed, outdir=args.outdir)
    if args.epochs:
        kwargs["epochs_dirichlet"], kwargs["epochs_neumann"] = \
            _split_pair(args.epochs, int, "--epochs")
    if args.counts:
        kwargs["n_interior"], kwargs["n_boundary"], kwargs["n_interface"] = \
            _split_pair(args.counts, int, "--counts", count=3)
    if args.width is not None:
        kwargs["width"] = args.width
    if args.hidden_layers is not None:
        kwargs["hidden_layers"] = args.hidden_layers
    if args.stop_tol is not None:
        kwargs["stop_tol"] = args.stop_tol
    if args.lr0 is not None:
        kwargs["lr0"] = args.lr0
    if args.weight_decay is not None:
        kwargs["weight_decay"] = args.weight_decay
    if args.no_warm_start:
        kwargs["warm_start"] = False
    return ExperimentConfig(**kwargs)


def _cmd_run(args, parser, method: str | None) -> int:
    cfg = _config_from_args(args, parser, method)
    rows = run_experiment(cfg, echo=print)
    if not rows:
        print("no metric rows produced", file=sys.stderr)
        return 1
    print(f"wrote {len(rows)} metric rows to {cfg.outdir}/metrics.csv")
    return 0


def _cmd_report(args) -> int:
    render_report(args.dir, echo=print)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnlearn",
        description="Neural Dirichlet-Neumann solvers for elliptic "
                    "interface problems, with a 1-D finite-difference oracle.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment")
    _experiment_flags(run_p, with_method=True)

    base_p = sub.add_parser("baseline", help="run the strong-form baseline")
    _experiment_flags(base_p, with_method=False)

    oracle_p = sub.add_parser("oracle", help="1-D finite-difference studies")
    oracle_p.add_argument("--study", choices=["robin-rate", "dn-iterate"],
                          default="robin-rate")
    oracle_p.add_argument("--dataset", choices=sorted(RATE_DATASETS),
                          default="poly")
    oracle_p.add_argument("--out", default="oracle_study.csv")

    grad_p = sub.add_parser("gradcheck", help="finite-difference derivative suites")
    grad_p.add_argument("--cases", type=int, default=100)
    grad_p.add_argument("--seed", type=int, default=0)

    report_p = sub.add_parser("report", help="aggregate metrics and render heatmaps")
    report_p.add_argument("--dir", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args, parser, args.method)
        if args.command == "baseline":
            return _cmd_run(args, parser, "deepddm")
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "gradcheck":
            return _cmd_gradcheck(args)
        if args.command == "report":
            return _cmd_report(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
