"""Command-line front end: weight generation, verification suites, sweeps,
and operator norm estimation.

    mwl gen     --config cfg.json --seed 7 --out weights/
    mwl verify  --suite all --seed 7 --out reports/
    mwl sweep   --quantity k_functional --seed 7 --out sweeps/
    mwl norm    --operator H --recipe scalar_a2 --p 2 --convention tilde

Exit status of `verify` is 0 iff every check passes.  The environment
variable MWL_THREADS caps worker threads for independent checks.
"""

import argparse
import os
import sys

import numpy as np

from .fields import (
    GridDomain,
    VectorField,
    ap_characteristic,
    gen_commuting_pair,
    gen_rotating_weight,
    identity_weight,
    load_weight_field,
    random_vector_field,
    save_weight_field,
    scalar_sample_a2,
    scalar_weight_field,
)
from .complex_interp import InterpParams, extremal_section, omega_complex, theta_norm_plain
from .couples import CoupleSpec, LogGrid, e_sweep, k_sweep
from .operators import hilbert_operator, martingale_operator, make_operator, \
    operator_norm_weighted, random_martingale_signs
from .reporting import RunConfig, write_csv
from .suites import SUITES, run_all, run_suite

__all__ = ["main"]


def _domain_from_config(config, n_points=None):
    dom = config.data["domain"]
    return GridDomain(n_points or dom["N"], length=dom.get("length", 1.0))


def _weight_from_recipe(recipe, config, domain=None):
    domain = domain or _domain_from_config(config)
    name = recipe if isinstance(recipe, str) else recipe["recipe"]
    spec = recipe if isinstance(recipe, dict) else {"recipe": recipe}
    seed = spec.get("seed", config.seed)
    n = spec.get("n", 2)
    if name == "identity":
        return identity_weight(domain, n)
    if name == "rotating":
        return gen_rotating_weight(seed, domain)
    if name == "scalar_a2":
        return scalar_weight_field(domain, scalar_sample_a2(domain))
    if name == "commuting":
        W0, W1 = gen_commuting_pair(seed, n, domain)
        return W0, W1
    raise ValueError(f"unknown weight recipe {name!r}")


def cmd_gen(args, config):
    out = args.out or config.out_dir
    os.makedirs(out, exist_ok=True)
    written = []
    for spec in config.data["recipes"]:
        result = _weight_from_recipe(spec, config)
        if isinstance(result, tuple):
            for k, W in enumerate(result):
                path = os.path.join(out, f"{spec['name']}_{k}.mwf.json")
                save_weight_field(path, W)
                written.append(path)
        else:
            path = os.path.join(out, f"{spec['name']}.mwf.json")
            save_weight_field(path, result)
            written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_verify(args, config):
    out = args.out or config.out_dir
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        report = run_suite(name, config)
        report.write(out, format=args.format if args.format != "csv" else "both")
        report.print_summary()
        ok = ok and report.passed
    print("verify:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def _sweep_couple(config):
    domain = _domain_from_config(config)
    w0 = scalar_sample_a2(domain)
    w1 = np.ones(domain.n_points)
    couple = CoupleSpec.scalar(domain, 2.0, 2.0, w0, w1)
    f = random_vector_field(config.rng("sweep", "f"), domain, 1)
    return domain, couple, f


def cmd_sweep(args, config):
    out = args.out or config.out_dir
    os.makedirs(out, exist_ok=True)
    grid = LogGrid.default(1e-6, 1e6, config.size("t_grid_points"))
    path = os.path.join(out, f"sweep_{args.quantity}.csv")

    if args.quantity == "k_functional":
        _, couple, f = _sweep_couple(config)
        sweep = k_sweep(f, couple, grid)
        write_csv(path, ["t", "k"], list(zip(grid.t, sweep.values)))
    elif args.quantity == "e_functional":
        _, couple, f = _sweep_couple(config)
        values, _ = e_sweep(f, couple, grid, alpha=1.0)
        write_csv(path, ["t", "e1"], list(zip(grid.t, values)))
    elif args.quantity == "ap":
        rows = []
        for exp in (8, 9, 10, 11, 12):
            domain = GridDomain(2 ** exp)
            W = scalar_weight_field(domain, scalar_sample_a2(domain))
            rows.append((2 ** exp, ap_characteristic(W, 2.0)))
        write_csv(path, ["N", "ap"], rows)
    elif args.quantity == "omega":
        domain = _domain_from_config(config)
        rng = config.rng("sweep", "omega")
        W0 = gen_rotating_weight(config.seed + 1, domain, spectral_range=(0.4, 5.0))
        W1 = gen_rotating_weight(config.seed + 2, domain, spectral_range=(0.4, 5.0))
        f = random_vector_field(rng, domain, 2)
        rows = []
        h = 1e-5
        for theta in config.data["theta_list"]:
            params = InterpParams(1.5, 3.0, theta)
            nt = theta_norm_plain(f, W0, W1, params)
            om = omega_complex(f, W0, W1, params, "plain", 1)
            Bp = extremal_section(f, W0, W1, params, theta + h, nt)
            Bm = extremal_section(f, W0, W1, params, theta - h, nt)
            fd = (Bp.values - Bm.values) / (2 * h)
            rel = float(np.linalg.norm(fd - om.values) / np.linalg.norm(om.values))
            rows.append((theta, float(np.linalg.norm(om.values)), rel))
        write_csv(path, ["theta", "omega_norm", "fd_rel_err"], rows)
    else:
        raise ValueError(f"unknown sweep quantity {args.quantity!r}")
    print(path)
    return 0


def cmd_norm(args, config):
    domain = _domain_from_config(config)
    if args.weight_file:
        W = load_weight_field(args.weight_file)
        domain = W.domain
    else:
        W = _weight_from_recipe(args.recipe, config, domain)
        if isinstance(W, tuple):
            W = W[0]
    if args.operator == "H":
        T = hilbert_operator()
    elif args.operator == "identity":
        T = make_operator(lambda f: f, "Id", domain, W.n,
                          adjoint_apply=lambda f: f)
    elif args.operator == "martingale":
        signs = random_martingale_signs(config.rng("norm"), domain.n_points)
        T = martingale_operator(signs)
    else:
        raise ValueError(f"unknown operator {args.operator!r}")
    method = args.method or ("exact2" if args.p == 2.0 else "sampled")
    est, cert = operator_norm_weighted(T, W, W, args.p, args.convention,
                                       method, seed=config.seed)
    print(f"||{args.operator}||_{{L^{args.p}({args.convention})}} = {est:.12g} "
          f"[{cert}]")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mwl",
        description="matrix-weighted L^p interpolation toolbox")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=["csv", "json"], default="json")

    p_gen = sub.add_parser("gen", help="generate weight-field files")
    common(p_gen)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    common(p_verify)
    p_verify.add_argument("--suite", default="all",
                          choices=sorted(SUITES) + ["all"])

    p_sweep = sub.add_parser("sweep", help="sweep a quantity to CSV")
    common(p_sweep)
    p_sweep.add_argument("--quantity", default="k_functional",
                         choices=["k_functional", "e_functional", "ap", "omega"])

    p_norm = sub.add_parser("norm", help="estimate a weighted operator norm")
    common(p_norm)
    p_norm.add_argument("--operator", default="H",
                        choices=["H", "identity", "martingale"])
    p_norm.add_argument("--recipe", default="scalar_a2")
    p_norm.add_argument("--weight-file")
    p_norm.add_argument("--p", type=float, default=2.0)
    p_norm.add_argument("--convention", choices=["plain", "tilde"],
                        default="tilde")
    p_norm.add_argument("--method", choices=["exact2", "sampled"])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    config = RunConfig.load(args.config, seed=args.seed, out_dir=args.out)
    handlers = {"gen": cmd_gen, "verify": cmd_verify,
                "sweep": cmd_sweep, "norm": cmd_norm}
    return handlers[args.command](args, config)


if __name__ == "__main__":
    sys.exit(main())
