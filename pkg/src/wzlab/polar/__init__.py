"""Multilevel polar coding machinery: transform, reliability order, bit roles, list search.

The list pass runs in a compiled extension when available; set WZLAB_PURE_PY=1
to force the numpy fallback (same results, slower). `kernel_name()` reports
which one is active.
"""

import hashlib
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..errors import AllocationOverflow, DomainError, MissingDataFile
from . import _kernel_py

MODE_MAX = _kernel_py.MODE_MAX
MODE_SAMPLE = _kernel_py.MODE_SAMPLE

RELIABILITY_FILE = "nr_reliability_1024.txt"
RELIABILITY_SHA256 = "cbb18dd202d1f85121cd0158731ef1916cf9233993dec03343f1935fa3d7ae73"

try:
    from . import _sclcore  # type: ignore
except ImportError:
    _sclcore = None
if os.environ.get("WZLAB_PURE_PY"):
    _sclcore = None


def kernel_name() -> str:
    return "compiled" if _sclcore is not None else "python"


def load_reliability(n: int) -> np.ndarray:
    """Universal reliability order restricted to indices < n, most reliable first.

    The shipped file carries the 1024-entry sequence of TS 38.212 Table
    5.3.1.2-1 (reversed to most-reliable-first); its checksum is pinned.
    """
    if n < 2 or n > 1024 or (n & (n - 1)) != 0:
        raise DomainError("n must be a power of two in [2, 1024]")
    try:
        raw = (
            resources.files(__package__)
            .joinpath("data", RELIABILITY_FILE)
            .read_bytes()
        )
    except (FileNotFoundError, OSError) as exc:
        raise MissingDataFile(f"reliability file {RELIABILITY_FILE} not found") from exc
    digest = hashlib.sha256(raw).hexdigest()
    if digest != RELIABILITY_SHA256:
        raise MissingDataFile(
            f"reliability file checksum mismatch: {digest} != {RELIABILITY_SHA256}"
        )
    seq = np.array(raw.split(), dtype=int)
    if seq.size != 1024 or sorted(seq.tolist()) != list(range(1024)):
        raise MissingDataFile("reliability file is not a permutation of 0..1023")
    return seq[seq < n]


@dataclass(frozen=True)
class PolarSpec:
    """Block length, list size, and reliability permutation (most reliable first)."""

    n: int = 256
    list_size: int = 8
    reliability: np.ndarray = None

    def __post_init__(self):
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise DomainError("n must be a power of two >= 2")
        rel = self.reliability
        if rel is None:
            rel = load_reliability(self.n)
        rel = np.asarray(rel, dtype=int)
        if sorted(rel.tolist()) != list(range(self.n)):
            raise DomainError("reliability must be a permutation of 0..n-1")
        if self.list_size < 1:
            raise DomainError("list_size must be positive")
        object.__setattr__(self, "reliability", rel)


def polar_transform(bits):
    """x = u F^{(x)m} over GF(2), natural order (involution). Accepts (n,) or (P, n)."""
    x = np.array(bits, dtype=np.int8, copy=True)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    n = x.shape[1]
    if n & (n - 1):
        raise DomainError("length must be a power of two")
    step = 1
    while step < n:
        for off in range(0, n, 2 * step):
            x[:, off : off + step] ^= x[:, off + step : off + 2 * step]
        step *= 2
    return x[0] if squeeze else x


@dataclass(frozen=True)
class LevelRoles:
    shaping_positions: np.ndarray
    info_positions: np.ndarray
    frozen_positions: np.ndarray


@dataclass(frozen=True)
class BitAllocation:
    """Per-level disjoint role sets covering 0..n-1; frozen bits are all-zero."""

    levels: tuple

    def counts(self):
        return [
            (lv.shaping_positions.size, lv.info_positions.size, lv.frozen_positions.size)
            for lv in self.levels
        ]


def allocate_roles(spec: PolarSpec, level_rates, shaping_counts) -> BitAllocation:
    """Assign roles by reliability: shaping first, then info, the rest frozen.

    level_rates are bits/sample per level (info_count = round(n * rate));
    shaping_counts are absolute counts per level.
    """
    if len(level_rates) != len(shaping_counts):
        raise DomainError("level_rates and shaping_counts must have equal length")
    levels = []
    for rate, n_shape in zip(level_rates, shaping_counts):
        n_info = int(round(spec.n * rate))
        n_shape = int(n_shape)
        if n_shape < 0 or n_info < 0 or n_shape + n_info > spec.n:
            raise AllocationOverflow(
                f"shaping {n_shape} + info {n_info} exceeds block length {spec.n}"
            )
        order = spec.reliability
        shaping = np.sort(order[:n_shape])
        info = np.sort(order[n_shape : n_shape + n_info])
        frozen = np.sort(order[n_shape + n_info :])
        levels.append(
            LevelRoles(
                shaping_positions=shaping, info_positions=info, frozen_positions=frozen
            )
        )
    return BitAllocation(levels=tuple(levels))


def fixed_vector(spec: PolarSpec, roles: LevelRoles, info_bits=None) -> np.ndarray:
    """Per-position forced values: 0 at frozen, message bits at info (if given), -1 free."""
    fixed = np.full(spec.n, -1, dtype=np.int8)
    fixed[roles.frozen_positions] = 0
    if info_bits is not None:
        bits = np.asarray(info_bits, dtype=np.int8)
        if bits.size != roles.info_positions.size:
            raise DomainError("info bit count does not match allocation")
        fixed[roles.info_positions] = bits
    return fixed


def scl_pass(channel_llrs, prior_metrics, fixed, list_size, mode, rand=None):
    """Dispatch one list pass to the compiled kernel or the numpy fallback."""
    llrs = np.ascontiguousarray(np.atleast_2d(np.asarray(channel_llrs, dtype=float)))
    pm = np.ascontiguousarray(np.asarray(prior_metrics, dtype=float))
    fixed = np.ascontiguousarray(np.asarray(fixed, dtype=np.int8))
    if llrs.shape[0] != pm.size:
        raise DomainError("one prior metric per incoming path required")
    if mode == MODE_SAMPLE and rand is None:
        raise DomainError("sample mode needs a uniform random matrix")
    if rand is not None:
        rand = np.ascontiguousarray(np.asarray(rand, dtype=float))
    if _sclcore is not None:
        return _sclcore.scl_pass(llrs, pm, fixed, int(list_size), int(mode), rand)
    return _kernel_py.scl_pass(llrs, pm, fixed, int(list_size), int(mode), rand)


def scl_process(
    spec: PolarSpec,
    fixed,
    channel_llrs,
    mode: int = MODE_MAX,
    prior_metrics=None,
    list_size=None,
    rand=None,
):
    """List search over the free positions of one polar level.

    fixed: per-position forced values (-1 = free; see `fixed_vector`).
    channel_llrs: (n,) or (P0, n) LLRs, one row per incoming candidate.
    Returns (u_candidates (P, n), metrics (P,), origins (P,)) sorted by metric
    (ties broken by incoming rank, then branch bit).
    """
    llrs = np.atleast_2d(np.asarray(channel_llrs, dtype=float))
    if llrs.shape[1] != spec.n:
        raise DomainError(f"LLR length {llrs.shape[1]} != block length {spec.n}")
    if prior_metrics is None:
        prior_metrics = np.zeros(llrs.shape[0])
    return scl_pass(
        llrs,
        prior_metrics,
        fixed,
        list_size if list_size is not None else spec.list_size,
        mode,
        rand,
    )
