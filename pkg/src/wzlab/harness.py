"""Monte Carlo experiment runner: excess-distortion runs, RD sweeps, reports.

Determinism contract: per-trial randomness comes from
SeedSequence(master_seed, spawn_key=(trial,)), so results do not depend on
the worker fan-out and identical configurations reproduce identical report
bytes. Floats are written with shortest-roundtrip repr.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, polar
from .codecs import CodecConfig, cached_codec, run_trial
from .errors import ConfigError, InvalidRegime
from .lattice import (
    LatticeParams,
    ShapingDensity,
    achieved_rate,
    distortion_upper_bound,
    simulate_ideal_block,
)
from .rd import rd_gaussian
from .vector import example_2d_plan, example_2d_spec, run_vector_block


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: an excess-distortion run, a vector run, or an RD sweep."""

    experiment: str                      # "excess" | "vector" | "rdsweep"
    master_seed: int = 1
    trials: int = 100
    jobs: int = 0                        # 0 = all cores
    out_dir: str = None
    # excess
    codec: CodecConfig = None
    sigma2_ey: float = 0.0
    # vector
    vector_kind: str = "pcqmod"
    # rdsweep
    sigma2_z: float = 2.0
    grid: tuple = ()                     # ((M, A, sigma2_d), ...)
    mc_samples: int = 100_000

    def __post_init__(self):
        if self.experiment not in ("excess", "vector", "rdsweep"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.experiment == "excess" and self.codec is None:
            raise ConfigError("excess experiment requires a codec")


@dataclass
class Report:
    """Per-trial records plus aggregates and reproducibility metadata."""

    kind: str
    deltas: np.ndarray = None
    per_component: np.ndarray = None
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def mean_delta(self) -> float:
        return float(self.deltas.mean())

    @property
    def stderr(self) -> float:
        return float(self.deltas.std(ddof=0) / math.sqrt(self.deltas.size))

    def cdf_points(self):
        """Empirical Pr(Delta > d) at the sorted distinct per-trial values."""
        d = np.sort(self.deltas)
        thresholds = np.unique(d)
        # count of deltas strictly greater than each threshold
        exceed = d.size - np.searchsorted(d, thresholds, side="right")
        return thresholds, exceed / d.size


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_excess_csv(path, deltas):
    with open(path, "w") as fh:
        fh.write("trial,delta\n")
        for i, v in enumerate(deltas):
            fh.write(f"{i},{_fmt(float(v))}\n")


def write_cdf_csv(path, report: Report):
    th, pr = report.cdf_points()
    with open(path, "w") as fh:
        fh.write("d_threshold,prob_exceed\n")
        for t, p in zip(th, pr):
            fh.write(f"{_fmt(float(t))},{_fmt(float(p))}\n")


def write_rdsweep_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("M,A,sigma2_d,rate_bits,bound_distortion,mc_distortion,mc_stderr\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        str(r["M"]),
                        _fmt(float(r["A"])),
                        _fmt(float(r["sigma2_d"])),
                        _fmt(float(r["rate_bits"])),
                        _fmt(float(r["bound_distortion"])),
                        _fmt(float(r["mc_distortion"])),
                        _fmt(float(r["mc_stderr"])),
                    ]
                )
                + "\n"
            )


def write_meta(path, cfg: ExperimentConfig, extra=None):
    meta = {
        "config": asdict(cfg),
        "master_seed": cfg.master_seed,
        "package_version": __version__,
        "scl_kernel": polar.kernel_name(),
        "data_checksums": {polar.RELIABILITY_FILE: polar.RELIABILITY_SHA256},
    }
    if extra:
        meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v)}")


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial,)))


def _excess_chunk(args):
    cfg, lo, hi = args
    codec = cached_codec(cfg.codec)
    n = cfg.codec.n
    out = np.empty(hi - lo)
    fails = np.zeros(hi - lo, dtype=bool)
    for t in range(lo, hi):
        rng = trial_rng(cfg.master_seed, t)
        try:
            ey = (
                rng.normal(0.0, math.sqrt(cfg.sigma2_ey), n)
                if cfg.sigma2_ey > 0
                else np.zeros(n)
            )
            x = ey + rng.normal(0.0, math.sqrt(cfg.codec.sigma2_z), n)
            dith = None
            if cfg.codec.kind == "pcqmod":
                dith = -cfg.codec.A / 2 + cfg.codec.A * rng.random(n)
            res = run_trial(codec, x, ey, dither=dith)
        except Exception as exc:
            raise RuntimeError(f"codec failure at trial {t}") from exc
        out[t - lo] = res.delta
        fails[t - lo] = not all(res.shaping_recovered)
    return lo, out, fails


def _vector_chunk(args):
    cfg, lo, hi = args
    from .gauss import eigh

    spec = example_2d_spec()
    plan = example_2d_plan(cfg.vector_kind)
    n = plan.component_configs[0].n
    dec = eigh(spec.joint_cov())
    root = dec.V * np.sqrt(dec.lambdas)[None, :]
    out = np.empty(hi - lo)
    comps = np.empty((hi - lo, spec.dim_x))
    for t in range(lo, hi):
        rng = trial_rng(cfg.master_seed, t)
        try:
            g = rng.standard_normal((n, spec.dim_x + spec.dim_y))
            samples = g @ root.T
            x, y = samples[:, : spec.dim_x], samples[:, spec.dim_x :]
            dithers = []
            for c in plan.component_configs:
                if c is not None and c.kind == "pcqmod":
                    dithers.append(-c.A / 2 + c.A * rng.random(n))
                else:
                    dithers.append(None)
            _, _, delta, per_comp = run_vector_block(x, y, spec, plan, dithers=dithers)
        except Exception as exc:
            raise RuntimeError(f"vector codec failure at trial {t}") from exc
        out[t - lo] = delta
        comps[t - lo] = per_comp
    return lo, out, comps


def _chunks(cfg, trials):
    jobs = cfg.jobs if cfg.jobs > 0 else (os.cpu_count() or 1)
    jobs = min(jobs, trials)
    size = (trials + jobs - 1) // jobs
    return [(cfg, lo, min(lo + size, trials)) for lo in range(0, trials, size)], jobs


def _run_parallel(fn, cfg, trials):
    chunks, jobs = _chunks(cfg, trials)
    if jobs == 1:
        return [fn(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, chunks))


def run_excess_distortion(cfg: ExperimentConfig) -> Report:
    """Independent blocks through one codec; Report with per-trial distortions."""
    if cfg.experiment == "vector":
        return run_vector_experiment(cfg)
    if cfg.experiment != "excess":
        raise ConfigError("run_excess_distortion needs an excess/vector config")
    deltas = np.empty(cfg.trials)
    fail_count = 0
    for lo, vals, fails in _run_parallel(_excess_chunk, cfg, cfg.trials):
        deltas[lo : lo + vals.size] = vals
        fail_count += int(fails.sum())
    rep = Report(kind="excess", deltas=deltas)
    rep.meta = {
        "mean_delta": rep.mean_delta,
        "stderr": rep.stderr,
        "shaping_failures": fail_count,
    }
    _emit_excess(cfg, rep)
    return rep


def run_vector_experiment(cfg: ExperimentConfig) -> Report:
    deltas = np.empty(cfg.trials)
    comps = np.empty((cfg.trials, 2))
    for lo, vals, per in _run_parallel(_vector_chunk, cfg, cfg.trials):
        deltas[lo : lo + vals.size] = vals
        comps[lo : lo + vals.size] = per
    rep = Report(kind="excess", deltas=deltas, per_component=comps)
    rep.meta = {
        "mean_delta": rep.mean_delta,
        "stderr": rep.stderr,
        "component_means": comps.mean(axis=0).tolist(),
    }
    _emit_excess(cfg, rep)
    return rep


def _emit_excess(cfg, rep):
    if not cfg.out_dir:
        return
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_excess_csv(os.path.join(cfg.out_dir, "excess.csv"), rep.deltas)
    write_cdf_csv(os.path.join(cfg.out_dir, "cdf.csv"), rep)
    if rep.per_component is not None:
        for i in range(rep.per_component.shape[1]):
            comp = Report(kind="excess", deltas=rep.per_component[:, i])
            write_excess_csv(
                os.path.join(cfg.out_dir, f"excess_component{i + 1}.csv"), comp.deltas
            )
            write_cdf_csv(os.path.join(cfg.out_dir, f"cdf_component{i + 1}.csv"), comp)
    write_meta(os.path.join(cfg.out_dir, "meta.json"), cfg, extra=rep.meta)


def run_rd_sweep(cfg: ExperimentConfig) -> Report:
    """Analytic rate + distortion bound + ideal-selection Monte Carlo per grid point."""
    if cfg.experiment != "rdsweep":
        raise ConfigError("run_rd_sweep needs an rdsweep config")
    rows = []
    for idx, (M, A, s2d) in enumerate(cfg.grid):
        lat = LatticeParams(A=float(A), M=int(M), sigma2_d=float(s2d), sigma2_z=cfg.sigma2_z)
        q = ShapingDensity.truncated_gaussian(float(s2d), float(A))
        rate = achieved_rate(q, lat)
        try:
            bound = distortion_upper_bound(lat)
        except InvalidRegime:
            bound = float("nan")
        rng = trial_rng(cfg.master_seed, idx)
        y = np.zeros(cfg.mc_samples)
        z = rng.normal(0.0, math.sqrt(cfg.sigma2_z), cfg.mc_samples)
        x = y + z
        xhat, _, _ = simulate_ideal_block(q, lat, x, y, rng)
        err = (x - xhat) ** 2
        rows.append(
            {
                "M": int(M),
                "A": float(A),
                "sigma2_d": float(s2d),
                "rate_bits": rate,
                "bound_distortion": bound,
                "mc_distortion": float(err.mean()),
                "mc_stderr": float(err.std(ddof=0) / math.sqrt(err.size)),
            }
        )
    rep = Report(kind="rdsweep", deltas=np.array([r["mc_distortion"] for r in rows]), rows=rows)
    rep.meta = {"wz_reference": "rate = 0.5*log2(sigma2_z/D)"}
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        write_rdsweep_csv(os.path.join(cfg.out_dir, "rdsweep.csv"), rows)
        write_meta(os.path.join(cfg.out_dir, "meta.json"), cfg, extra=rep.meta)
    return rep


def wz_reference_rate(sigma2_z: float, distortion: float) -> float:
    return rd_gaussian(sigma2_z, distortion)
