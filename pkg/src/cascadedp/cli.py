"""Command-line entry point for reproducible, seeded experiment runs.

Subcommands: sample (dump one noise tree), calibrate (budget -> sigma),
perturb (privatize a CSV or synthetic vector), errors (Monte Carlo error
benchmark), scaling (sampler runtime vs size), levels (per-level variance
profile).  Every run is determined by its flags plus a seed (flag or the
CASCADEDP_SEED environment variable); numeric outputs are byte-identical
across reruns on the same platform, and every output file gets a
.meta.json sidecar carrying the config, seed, version, and config hash.
Wall-clock times from `scaling` are the one intentionally non-reproducible
quantity.

Exit codes: 0 success, 2 bad flags, 3 I/O failure, 4 validation or
numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import bt_perturb, iid_perturb
from .mechanism import perturb
from .metrics import MECHANISMS, Workload, mc_errors, mechanism_sigma, synthetic_data, variance_by_level
from .privacy import PrivacyBudget, calibrate_general, calibrate_iid, calibrate_tree
from .sampler import cascade_sample
from .validation import check_depth

__all__ = ["main", "run_scaling"]

ENV_SEED = "CASCADEDP_SEED"


# ---------------------------------------------------------------------------
# output helpers


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_with_sidecar(path: str, text: str, config: dict) -> None:
    out = Path(path)
    out.write_text(text)
    canonical = json.dumps(config, sort_keys=True)
    meta = {
        "config": config,
        "seed": config.get("seed"),
        "version": __version__,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
    }
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args) -> int:
    tree = cascade_sample(args.depth, args.sigma, args.seed)
    text = tree.to_json() + "\n"
    if args.out:
        _write_with_sidecar(args.out, text, _config_dict(args))
    else:
        sys.stdout.write(text)
    return 0


def _cmd_calibrate(args) -> int:
    budget = PrivacyBudget(args.epsilon, args.delta)
    if args.mode == "tree":
        cal = calibrate_tree(args.n, budget)
    elif args.mode == "iid":
        cal = calibrate_iid(budget)
    elif args.mode.startswith("general:"):
        cal = calibrate_general(float(args.mode.split(":", 1)[1]), budget)
    else:
        raise ValueError(f"unknown calibration mode {args.mode!r}")
    payload = {
        "mode": args.mode,
        "n": args.n,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "sigma": cal.sigma,
        "sigma_squared": cal.sigma_squared,
    }
    text = json.dumps(payload, sort_keys=True) + "\n"
    if args.out:
        _write_with_sidecar(args.out, text, _config_dict(args))
    else:
        sys.stdout.write(text)
    return 0


def _read_vector(path: str) -> np.ndarray:
    values = [float(line) for line in Path(path).read_text().split() if line.strip()]
    return np.asarray(values)


def _cmd_perturb(args) -> int:
    if (args.input is None) == (args.synthetic is None):
        raise ValueError("give exactly one of --input or --synthetic")
    budget = PrivacyBudget(args.epsilon, args.delta)
    rng = np.random.default_rng(args.seed)
    x = synthetic_data(args.synthetic, rng) if args.synthetic else _read_vector(args.input)

    if args.mechanism == "correlated":
        cal = mechanism_sigma("correlated", x.size, budget)
        release = perturb(x, cal, rng)
        values, meta = release.values, release.meta
    elif args.mechanism == "iid":
        release = iid_perturb(x, budget, rng)
        values, meta = release.values, release.meta
    else:
        release = bt_perturb(x, budget, rng)
        values, meta = release.noisy_nodes, release.meta

    meta = dict(meta, seed=args.seed)
    text = "\n".join(repr(float(v)) for v in values) + "\n"
    config = dict(_config_dict(args), mechanism_meta=meta)
    _write_with_sidecar(args.out, text, config)
    return 0


def _cmd_errors(args) -> int:
    budget = PrivacyBudget(args.epsilon, args.delta)
    if args.workload == "continuous":
        workload = Workload.continuous(args.n)
    elif args.workload == "nodal":
        workload = Workload.nodal(args.n)
    else:
        workload = Workload.random(args.n, args.queries, args.seed)
    report = mc_errors(
        args.mechanism,
        workload,
        budget,
        args.replicates,
        args.queries,
        args.seed,
        exhaustive=args.exhaustive,
    )
    rows = [
        [args.n, args.mechanism, "err_l2", report.err_l2, report.stderr_l2],
        [args.n, args.mechanism, "err_worst_expected", report.err_worst_expected, report.stderr_worst_expected],
        [args.n, args.mechanism, "err_expected_worst", report.err_expected_worst, report.stderr_expected_worst],
    ]
    text = _csv(["n", "mechanism", "metric", "value", "stderr"], rows)
    if args.out:
        _write_with_sidecar(args.out, text, _config_dict(args))
    else:
        sys.stdout.write(text)
    if args.gnuplot:
        gp = "\n".join(" ".join(repr(float(v)) for v in (r[0], r[3], r[4])) for r in rows) + "\n"
        _write_with_sidecar(args.gnuplot, gp, _config_dict(args))
    return 0


def run_scaling(k_min: int, k_max: int, repeats: int, rng) -> tuple[list[tuple[int, float]], float]:
    """Best-of-`repeats` wall-clock time of one full tree sample per size.

    Returns (rows, slope) where rows are (leaf count, seconds) and slope
    is the log-log regression slope; linear cost shows up as slope near 1.
    """
    check_depth(k_min, minimum=0)
    check_depth(k_max, minimum=k_min, cap=25)
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    cascade_sample(min(10, k_max), 1.0, rng)  # warm-up
    rows = []
    for k in range(k_min, k_max + 1):
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            cascade_sample(k, 1.0, rng)
            best = min(best, time.perf_counter() - t0)
        rows.append((1 << k, best))
    sizes = np.log2([r[0] for r in rows])
    times = np.log2([r[1] for r in rows])
    slope = float(np.polyfit(sizes, times, 1)[0])
    return rows, slope


def _cmd_scaling(args) -> int:
    rows, slope = run_scaling(args.kmin, args.kmax, args.repeats, args.seed)
    text = _csv(["n", "seconds"], [[n, t] for n, t in rows])
    if args.out:
        _write_with_sidecar(args.out, text, _config_dict(args))
    else:
        sys.stdout.write(text)
    sys.stdout.write(json.dumps({"loglog_slope": slope}, sort_keys=True) + "\n")
    return 0


def _cmd_levels(args) -> int:
    budget = PrivacyBudget(args.epsilon, args.delta)
    profile = variance_by_level(args.mechanism, args.depth, budget, args.replicates, args.seed)
    rows = [[args.mechanism, args.depth, lv.level, lv.mean_variance, lv.stderr] for lv in profile]
    text = _csv(["mechanism", "depth", "level", "variance", "stderr"], rows)
    if args.out:
        _write_with_sidecar(args.out, text, _config_dict(args))
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------


def _default_seed() -> int:
    return int(os.environ.get(ENV_SEED, "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascadedp", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("sample", help="draw one correlated noise tree as JSON")
    p.add_argument("--depth", "-k", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    add_common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("calibrate", help="noise scale for an (epsilon, delta) target")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mode", type=str, default="tree", help="tree | iid | general:<diag>")
    add_common(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("perturb", help="privatize a data vector")
    p.add_argument("--input", type=str, default=None, help="CSV, one value per line")
    p.add_argument("--synthetic", type=int, default=None, help="generate this many uniform counts")
    p.add_argument("--mechanism", choices=MECHANISMS, default="correlated")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("errors", help="Monte Carlo error benchmark")
    p.add_argument("--mechanism", choices=MECHANISMS, required=True)
    p.add_argument("--workload", choices=["continuous", "nodal", "random"], default="continuous")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--queries", type=int, default=5000)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--gnuplot", type=str, default=None)
    add_common(p)
    p.set_defaults(func=_cmd_errors)

    p = sub.add_parser("scaling", help="sampler runtime versus data size")
    p.add_argument("--kmin", type=int, default=10)
    p.add_argument("--kmax", type=int, default=20)
    p.add_argument("--repeats", type=int, default=3)
    add_common(p)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("levels", help="per-level variance profile")
    p.add_argument("--mechanism", choices=MECHANISMS, required=True)
    p.add_argument("--depth", "-k", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--replicates", type=int, default=500)
    add_common(p)
    p.set_defaults(func=_cmd_levels)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"cascadedp: I/O error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"cascadedp: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
