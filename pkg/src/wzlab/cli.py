"""Command-line workbench: analytics (rd), bound terms, simulations, self-test.

Exit codes: 0 success, 1 internal failure, 2 usage/config error. The master
seed resolves as --seed flag > WZLAB_SEED env > config file value.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import polar, presets
from .codecs import CodecConfig
from .errors import ConfigError, DomainError, InvalidRegime, MissingDataFile, WzLabError
from .harness import ExperimentConfig, run_excess_distortion, run_rd_sweep
from .lattice import LatticeParams, ShapingDensity, distortion_bound_terms, mod_reduce, shaping_posterior
from .rd import rd_gaussian, reverse_waterfill

_CODEC_KEYS = {
    "kind": str, "M": int, "sigma2_z": float, "sigma2_d": float,
    "level_info": list, "level_shaping": list, "A": float, "delta": float,
    "sigma2_desc": float, "n": int, "list_size": int, "encoder_mode": str,
    "dither_seed": int, "noise_seed": int, "list_passing": str,
}

_CONFIG_KEYS = {
    "experiment": str, "master_seed": int, "trials": int, "jobs": int,
    "out_dir": str, "codec": (str, dict), "sigma2_ey": float,
    "vector_kind": str, "sigma2_z": float, "grid": list, "mc_samples": int,
}


def _check_keys(doc: dict, allowed: dict, where: str):
    for key, val in doc.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")
        want = allowed[key]
        types = want if isinstance(want, tuple) else (want,)
        if float in types:
            types = types + (int,)
        if not isinstance(val, types):
            raise ConfigError(f"{where}.{key}: expected {want}, got {type(val).__name__}")


def load_experiment_config(doc: dict) -> ExperimentConfig:
    """Validate a JSON document (unknown keys rejected) into an ExperimentConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(doc, _CONFIG_KEYS, "config")
    doc = dict(doc)
    codec = doc.pop("codec", None)
    if isinstance(codec, str):
        if codec not in presets.PRESETS:
            raise ConfigError(
                f"unknown preset {codec!r}; available: {sorted(presets.PRESETS)}"
            )
        codec_cfg = presets.PRESETS[codec]
    elif isinstance(codec, dict):
        _check_keys(codec, _CODEC_KEYS, "codec")
        codec = dict(codec)
        for key in ("level_info", "level_shaping"):
            if key in codec:
                codec[key] = tuple(codec[key])
        codec_cfg = CodecConfig(**codec)
    else:
        codec_cfg = None
    if "grid" in doc:
        doc["grid"] = tuple(tuple(p) for p in doc["grid"])
    return ExperimentConfig(codec=codec_cfg, **doc)


def cmd_rd(args) -> int:
    if args.lambdas:
        lambdas = [float(v) for v in args.lambdas.split(",")]
        plan = reverse_waterfill(lambdas, args.d)
        print("component,lambda,rate_bits,distortion,active")
        for i, c in enumerate(plan.per_component):
            print(f"{i},{c.lambda_i!r},{c.rate_i!r},{c.distortion_i!r},{int(c.active)}")
        print(f"# level_lambda={plan.level_lambda!r} total_rate={plan.total_rate!r}")
    else:
        if args.sigma2 is None:
            raise ConfigError("rd needs --sigma2 or --lambdas")
        print(repr(rd_gaussian(args.sigma2, args.d)))
    return 0


def cmd_bound(args) -> int:
    lat = LatticeParams(A=args.A, M=args.M, sigma2_d=args.sigma2_d, sigma2_z=args.sigma2_z)
    terms = distortion_bound_terms(lat)
    print("sigma2_d,t_iz,shaping_excess,total")
    print(f"{terms['sigma2_d']!r},{terms['t_iz']!r},{terms['shaping_excess']!r},{terms['total']!r}")
    return 0


def cmd_sim(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    cfg = load_experiment_config(doc)
    seed = resolve_seed(args.seed, cfg.master_seed)
    updates = {"master_seed": seed}
    if args.out:
        updates["out_dir"] = args.out
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    import dataclasses

    cfg = dataclasses.replace(cfg, **updates)
    if cfg.experiment == "rdsweep":
        rep = run_rd_sweep(cfg)
        print(f"rdsweep: {len(rep.rows)} grid points -> {cfg.out_dir or '(no files)'}")
    else:
        rep = run_excess_distortion(cfg)
        print(
            f"{cfg.experiment}: trials={cfg.trials} E[delta]={rep.mean_delta:.6f} "
            f"stderr={rep.stderr:.6f} -> {cfg.out_dir or '(no files)'}"
        )
    return 0


def resolve_seed(flag_seed, config_seed: int) -> int:
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get("WZLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"WZLAB_SEED must be an integer, got {env!r}")
    return config_seed


def cmd_selftest(args) -> int:
    failures = 0

    def check(name, fn):
        nonlocal failures
        try:
            fn()
            print(f"PASS {name}")
        except Exception as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")

    def _mod():
        assert mod_reduce(3.7, 2.0) == -0.3 or abs(mod_reduce(3.7, 2.0) + 0.3) < 1e-12
        assert mod_reduce(-1.0, 2.0) == -1.0
        assert mod_reduce(1.0, 2.0) == -1.0

    def _uniformity():
        from scipy import integrate

        lat = LatticeParams(A=10.0, M=8, sigma2_d=0.5, sigma2_z=1.0)
        q = ShapingDensity.truncated_gaussian(0.5, 10.0)
        for j in range(8):
            val, _ = integrate.quad(
                lambda xp: shaping_posterior(xp, q, lat)[j] / 10.0, -5.0, 5.0,
                epsabs=1e-10, limit=200,
            )
            assert abs(val - 0.125) < 1e-6, f"P(u_{j}) = {val}"

    def _polar_ml():
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = 16
            fixed = np.full(n, -1, dtype=np.int8)
            fixed[rng.choice(n, size=6, replace=False)] = 0
            nfree = int((fixed < 0).sum())
            spec = polar.PolarSpec(n=n, list_size=1 << nfree, reliability=np.arange(n))
            llr = rng.normal(0, 2, n)
            cands, pms, _ = polar.scl_process(spec, fixed, llr, list_size=1 << nfree)
            free = np.where(fixed < 0)[0]
            best_pm = None
            for mask in range(1 << nfree):
                u = np.zeros(n, dtype=np.int8)
                u[free] = [(mask >> i) & 1 for i in range(nfree)]
                x = polar.polar_transform(u)
                t = (2 * x - 1).astype(float) * llr
                pen = float(np.sum(np.maximum(t, 0) + np.log1p(np.exp(-np.abs(t)))))
                if best_pm is None or pen < best_pm:
                    best_pm = pen
            # the top path must reproduce the brute-force optimum penalty
            x0 = polar.polar_transform(cands[0])
            t0 = (2 * x0 - 1).astype(float) * llr
            pen0 = float(np.sum(np.maximum(t0, 0) + np.log1p(np.exp(-np.abs(t0)))))
            assert abs(pen0 - best_pm) < 1e-9

    def _waterfill():
        plan = reverse_waterfill([1.0, 0.5], 0.5)
        assert abs(plan.level_lambda - 0.25) < 1e-12
        assert abs(plan.total_rate - 1.5) < 1e-12

    def _reliability():
        seq = polar.load_reliability(256)
        assert seq[0] == 255 and sorted(seq.tolist()) == list(range(256))

    check("mod-reduce endpoints", _mod)
    check("shaping uniformity", _uniformity)
    check("polar list search = brute force (n=16)", _polar_ml)
    check("reverse waterfill example", _waterfill)
    check("reliability data file", _reliability)
    print(f"selftest: {5 - failures}/5 passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wzlab",
        description="Dithered modulo-lattice Wyner-Ziv quantization workbench",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_rd = sub.add_parser("rd", help="rate-distortion functions and waterfilling")
    p_rd.add_argument("--sigma2", type=float, help="source (or conditional) variance")
    p_rd.add_argument("--lambdas", type=str, help="comma-separated eigenvalues")
    p_rd.add_argument("--d", type=float, required=True, help="target distortion")
    p_rd.set_defaults(fn=cmd_rd)

    p_b = sub.add_parser("bound", help="distortion upper-bound terms")
    p_b.add_argument("--sigma2-z", dest="sigma2_z", type=float, required=True)
    p_b.add_argument("--sigma2-d", dest="sigma2_d", type=float, required=True)
    p_b.add_argument("--A", type=float, required=True)
    p_b.add_argument("--M", type=int, required=True)
    p_b.set_defaults(fn=cmd_bound)

    p_s = sub.add_parser("sim", help="run a simulation described by a JSON config")
    p_s.add_argument("--config", required=True, help="path to the experiment JSON")
    p_s.add_argument("--out", help="output directory (overrides config)")
    p_s.add_argument("--seed", type=int, help="master seed (overrides env and config)")
    p_s.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    p_s.set_defaults(fn=cmd_sim)

    p_t = sub.add_parser("selftest", help="fast invariant suite")
    p_t.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError, InvalidRegime, MissingDataFile) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WzLabError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
