"""Scalar modulo-lattice quantization with probabilistic shaping.

Implements the derived source on [-A/2, A/2), the M-ASK reproduction alphabet,
truncated-Gaussian shaping with its closed-form second moment and entropy, the
folded density d(x) with its extrema, numerically evaluated encoder/decoder
noise entropies, the achieved coding rate, and the closed-form upper bound on
the end-to-end distortion.

Interval convention: closed left, open right. All modulo reductions map into
[-A/2, A/2) bit-exactly, and the integer shift count is exposed where needed.
Entropies named *_nats are in nats; rates are in bits.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import (
    DegenerateShaping,
    DomainError,
    InvalidRegime,
    QuadratureFailure,
)

_W_FLOOR = 1e-300  # keeps logs finite when shaping weights underflow


def qfunc(x):
    """Gaussian tail probability Q(x) via the complementary error function."""
    return 0.5 * special.erfc(np.asarray(x) / math.sqrt(2.0))


def mod_reduce(x, A: float):
    """Reduce into [-A/2, A/2): x - k*A with the unique integer k."""
    if A <= 0:
        raise DomainError("A must be positive")
    x = np.asarray(x, dtype=float)
    k = np.floor(x / A + 0.5)
    r = x - k * A
    # floating point can land exactly on +A/2; fold it to the left endpoint
    hit = r >= A / 2
    r = np.where(hit, r - A, r)
    if x.ndim == 0:
        return float(r)
    return r


def mod_decompose(x, A: float):
    """Like mod_reduce but also returns the integer shift count k with x = r + k*A."""
    if A <= 0:
        raise DomainError("A must be positive")
    x = np.asarray(x, dtype=float)
    k = np.floor(x / A + 0.5)
    r = x - k * A
    hit = r >= A / 2
    r = np.where(hit, r - A, r)
    k = np.where(hit, k + 1, k)
    if x.ndim == 0:
        return float(r), int(k)
    return r, k.astype(np.int64)


@dataclass(frozen=True)
class LatticeParams:
    """Modulo interval A, ASK order M, target distortion sigma2_d, source noise sigma2_z.

    Derived: kappa = A/(2M) (half spacing), alpha = sqrt(1 - sigma2_d/sigma2_z)
    (inflation factor), c = 1 - 2Q(A/(2 sigma_d)) (truncation normalizer).
    """

    A: float
    M: int
    sigma2_d: float
    sigma2_z: float
    kappa: float = field(init=False)
    alpha: float = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        if self.A <= 0:
            raise DomainError("A must be positive")
        if self.M < 2 or (self.M & (self.M - 1)) != 0:
            raise DomainError("M must be a power of two >= 2")
        if not (0.0 < self.sigma2_d < self.sigma2_z):
            raise DomainError("need 0 < sigma2_d < sigma2_z")
        object.__setattr__(self, "kappa", self.A / (2 * self.M))
        object.__setattr__(
            self, "alpha", math.sqrt(1.0 - self.sigma2_d / self.sigma2_z)
        )
        object.__setattr__(
            self, "c", 1.0 - 2.0 * float(qfunc(self.A / (2.0 * math.sqrt(self.sigma2_d))))
        )


class ShapingDensity:
    """Density q on [-A/2, A/2) used for probabilistic shaping.

    Kinds: 'truncated_gaussian' (zero-mean, variance parameter sigma2_d,
    renormalized on the interval), 'uniform', or 'tabulated' (grid values,
    renormalized). Closed-form extrema and moments are only available for the
    symmetric unimodal kinds; tabulated densities get numerics only.
    """

    def __init__(self, kind: str, A: float, sigma2_d=None, table=None):
        if A <= 0:
            raise DomainError("A must be positive")
        self.kind = kind
        self.A = float(A)
        self.sigma2_d = sigma2_d
        if kind == "truncated_gaussian":
            if sigma2_d is None or sigma2_d <= 0:
                raise DomainError("truncated_gaussian requires sigma2_d > 0")
            self._c = 1.0 - 2.0 * float(qfunc(A / (2.0 * math.sqrt(sigma2_d))))
            self._norm = self._c * math.sqrt(2.0 * math.pi * sigma2_d)
        elif kind == "uniform":
            pass
        elif kind == "tabulated":
            vals = np.asarray(table, dtype=float)
            if vals.ndim != 1 or vals.size < 8 or np.any(vals < 0):
                raise DomainError("tabulated density needs a nonnegative 1-D table")
            step = A / vals.size
            self._grid = -A / 2 + step * np.arange(vals.size)
            self._vals = vals / (vals.sum() * step)
        else:
            raise DomainError(f"unknown shaping kind {kind!r}")
        total = self.integral()
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"density does not integrate to 1 (got {total!r})")

    @classmethod
    def truncated_gaussian(cls, sigma2_d: float, A: float) -> "ShapingDensity":
        return cls("truncated_gaussian", A, sigma2_d=sigma2_d)

    @classmethod
    def uniform(cls, A: float) -> "ShapingDensity":
        return cls("uniform", A)

    @classmethod
    def tabulated(cls, table, A: float) -> "ShapingDensity":
        return cls("tabulated", A, table=table)

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "truncated_gaussian":
            out = np.exp(-z * z / (2.0 * self.sigma2_d)) / self._norm
        elif self.kind == "uniform":
            out = np.full_like(z, 1.0 / self.A)
        else:
            step = self.A / self._vals.size
            idx = np.clip(((z + self.A / 2) / step).astype(int), 0, self._vals.size - 1)
            out = self._vals[idx]
        if out.ndim == 0:
            return float(out)
        return out

    def integral(self) -> float:
        if self.kind == "uniform":
            return 1.0
        if self.kind == "tabulated":
            return float(self._vals.sum() * self.A / self._vals.size)
        val, _ = integrate.quad(
            self.evaluate, -self.A / 2, self.A / 2, epsabs=1e-12, limit=200
        )
        return val

    def sample(self, rng: np.random.Generator, size: int):
        """Exact sampling from q (inverse CDF for the analytic kinds)."""
        u = rng.random(size)
        if self.kind == "uniform":
            return -self.A / 2 + self.A * u
        if self.kind == "truncated_gaussian":
            sd = math.sqrt(self.sigma2_d)
            edge = special.erf(self.A / (2.0 * sd * math.sqrt(2.0)))
            return sd * math.sqrt(2.0) * special.erfinv((2.0 * u - 1.0) * edge)
        step = self.A / self._vals.size
        cdf = np.concatenate([[0.0], np.cumsum(self._vals) * step])
        cdf /= cdf[-1]
        idx = np.searchsorted(cdf, u, side="right") - 1
        idx = np.clip(idx, 0, self._vals.size - 1)
        frac = (u - cdf[idx]) / np.maximum(cdf[idx + 1] - cdf[idx], 1e-300)
        return -self.A / 2 + (idx + frac) * step


@dataclass(frozen=True)
class DerivedSample:
    x_prime: float
    y_prime: float
    dither: float
    raw_x: float
    raw_y: float
    raw_z: float


def derive_source(x: float, y: float, dither: float, p: LatticeParams) -> DerivedSample:
    """Map (x, y) into the interval model: x' = (alpha*x + dither) mod A, same for y."""
    if not (-p.A / 2 <= dither < p.A / 2):
        raise DomainError("dither must lie in [-A/2, A/2)")
    xp = mod_reduce(p.alpha * x + dither, p.A)
    yp = mod_reduce(p.alpha * y + dither, p.A)
    return DerivedSample(
        x_prime=float(xp), y_prime=float(yp), dither=float(dither),
        raw_x=float(x), raw_y=float(y), raw_z=float(x - y),
    )


def ask_alphabet(p: LatticeParams) -> np.ndarray:
    """The M equally spaced reproduction points -A/2 + (2k+1) kappa, k = 0..M-1."""
    k = np.arange(p.M)
    return -p.A / 2 + (2 * k + 1) * p.kappa


def shaping_posterior(x_prime, q: ShapingDensity, p: LatticeParams) -> np.ndarray:
    """P(u | x') proportional to q((u - x') mod A) over the ASK points.

    Accepts a scalar or an array of x' values; returns shape (..., M), each row
    summing to 1.
    """
    xp = np.asarray(x_prime, dtype=float)
    pts = ask_alphabet(p)
    w = q.evaluate(mod_reduce(pts - xp[..., None], p.A))
    tot = w.sum(axis=-1, keepdims=True)
    if np.any(tot <= 0):
        raise DegenerateShaping("all shaping weights underflowed to zero")
    return w / tot


def fold_density(x, q: ShapingDensity, p: LatticeParams):
    """d(x) = 2 kappa * sum_k q((x + 2 k kappa) mod A); periodic with period 2 kappa."""
    xa = np.asarray(x, dtype=float)
    shifts = 2.0 * p.kappa * np.arange(p.M)
    vals = q.evaluate(mod_reduce(xa[..., None] + shifts, p.A)).sum(axis=-1)
    out = 2.0 * p.kappa * vals
    if xa.ndim == 0:
        return float(out)
    return out


def bound_extrema(q: ShapingDensity, p: LatticeParams):
    """(d_min, d_max) = 1 -/+ (A/M) q(0) for symmetric unimodal q."""
    if q.kind not in ("truncated_gaussian", "uniform"):
        raise DomainError("closed-form extrema require a symmetric unimodal density")
    q0 = q.evaluate(0.0)
    d_min = 1.0 - (p.A / p.M) * q0
    d_max = 1.0 + (p.A / p.M) * q0
    if d_min <= 0:
        raise InvalidRegime(
            f"d_min = {d_min:g} <= 0: M too small for the bound machinery"
        )
    return d_min, d_max


def tg_second_moment(p: LatticeParams) -> float:
    """E_q[Z^2] for truncated-Gaussian shaping (exact closed form)."""
    s2 = p.sigma2_d
    return s2 * (
        1.0
        - p.A
        * math.exp(-p.A * p.A / (8.0 * s2))
        / (p.c * math.sqrt(2.0 * math.pi * s2))
    )


def tg_entropy_q(p: LatticeParams) -> float:
    """h_q(Z) in nats for truncated-Gaussian shaping (exact closed form)."""
    s2 = p.sigma2_d
    pz = tg_second_moment(p)
    return 0.5 * math.log(2.0 * math.pi * math.e * s2 * p.c * p.c) - 0.5 * (
        1.0 - pz / s2
    )


def entropy_ztilde_numeric(q: ShapingDensity, p: LatticeParams, tol: float = 1e-8) -> float:
    """h(Ztilde) = -int (q/d) ln(q/d) over the interval, by adaptive quadrature."""

    def integrand(z):
        dz = fold_density(z, q, p)
        pz = q.evaluate(z) / dz
        if pz <= 0:
            return 0.0
        return -pz * math.log(pz)

    val, err = integrate.quad(
        integrand, -p.A / 2, p.A / 2, epsabs=tol, limit=400
    )
    if err > 10 * max(tol, 1e-12):
        raise QuadratureFailure(f"entropy quadrature error estimate {err:g} above tolerance")
    return val


def _grid_circle(p: LatticeParams, n_grid: int):
    step = p.A / n_grid
    pts = mod_reduce(step * np.arange(n_grid), p.A)
    return pts, step


def wrapped_noise_density(q: ShapingDensity, p: LatticeParams, n_grid: int = 1 << 14):
    """Density of Z' = (Ztilde + alpha*Z) mod A sampled on a uniform grid.

    Returns (points, values) with points in [-A/2, A/2) (unordered circle grid;
    use np.argsort(points) for plotting). The convolution of q/d with the
    wrapped Gaussian of variance alpha^2 sigma2_z is done spectrally.
    """
    pts, step = _grid_circle(p, n_grid)
    qv = q.evaluate(pts)
    dv = fold_density(pts, q, p)
    with np.errstate(invalid="ignore", divide="ignore"):
        ztilde = np.where(dv > 0, qv / np.maximum(dv, 1e-300), 0.0)
    s2 = p.alpha * p.alpha * p.sigma2_z
    if s2 <= 0:
        return pts, ztilde
    sd = math.sqrt(s2)
    kmax = int(math.ceil(8.0 * sd / p.A)) + 1
    wrap = np.zeros_like(pts)
    for k in range(-kmax, kmax + 1):
        t = pts + k * p.A
        wrap += np.exp(-t * t / (2.0 * s2))
    wrap /= math.sqrt(2.0 * math.pi * s2)
    conv = np.fft.irfft(np.fft.rfft(ztilde) * np.fft.rfft(wrap), n=n_grid) * step
    return pts, np.maximum(conv, 0.0)


def _grid_entropy(values: np.ndarray, step: float) -> float:
    pos = values[values > 0]
    return float(-(pos * np.log(pos)).sum() * step)


def entropy_zprime_numeric(
    q: ShapingDensity, p: LatticeParams, tol: float = 1e-6, n_grid: int = 1 << 14
) -> float:
    """h(Z') in nats from the wrapped convolved density, Richardson-checked."""
    _, coarse = wrapped_noise_density(q, p, n_grid)
    _, fine = wrapped_noise_density(q, p, 2 * n_grid)
    h_coarse = _grid_entropy(coarse, p.A / n_grid)
    h_fine = _grid_entropy(fine, p.A / (2 * n_grid))
    if abs(h_fine - h_coarse) > tol:
        raise QuadratureFailure(
            f"wrapped-density entropy not converged: {h_coarse!r} vs {h_fine!r}"
        )
    return h_fine


def achieved_rate(q: ShapingDensity, p: LatticeParams) -> float:
    """Coding rate (h(Z') - h(Ztilde)) / ln 2 in bits per sample."""
    return (entropy_zprime_numeric(q, p) - entropy_ztilde_numeric(q, p)) / math.log(2.0)


def distortion_upper_bound(p: LatticeParams) -> float:
    """Closed-form upper bound on E[(X - Xhat)^2] for truncated-Gaussian shaping.

    Terms: the target sigma2_d, the modulo-shift cross term T_IZ, and the
    shaping excess alpha^2 (P_qz / d_min - sigma2_d). Requires d_min > 0.
    """
    terms = distortion_bound_terms(p)
    return terms["total"]


def distortion_bound_terms(p: LatticeParams) -> dict:
    """The individual terms of the distortion bound, for reporting."""
    q = ShapingDensity.truncated_gaussian(p.sigma2_d, p.A)
    d_min, _ = bound_extrema(q, p)  # raises InvalidRegime when d_min <= 0
    s2z = p.sigma2_z
    pz = tg_second_moment(p)
    t_iz = (4.0 / (p.c * d_min)) * (
        1.5 * p.A * s2z * math.exp(-p.A * p.A / (8.0 * s2z))
        / math.sqrt(2.0 * math.pi * s2z)
        + (s2z + p.A * p.A / 4.0) * float(qfunc(p.A / (2.0 * math.sqrt(s2z))))
    )
    excess = p.alpha * p.alpha * (pz / d_min - p.sigma2_d)
    return {
        "sigma2_d": p.sigma2_d,
        "t_iz": t_iz,
        "shaping_excess": excess,
        "total": p.sigma2_d + t_iz + excess,
    }


def _envelope_floor(q: ShapingDensity, p: LatticeParams) -> float:
    if q.kind in ("truncated_gaussian", "uniform"):
        d_min = 1.0 - (p.A / p.M) * q.evaluate(0.0)
        if d_min > 0:
            return d_min
    grid = np.linspace(-p.A / 2, p.A / 2, 4096, endpoint=False)
    return float(fold_density(grid, q, p).min()) * (1.0 - 1e-9)


def sample_ztilde(q: ShapingDensity, p: LatticeParams, seed: int, size: int = 1):
    """Draw from p(z) = q(z)/d(z) by rejection with envelope q/d_min."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    floor = _envelope_floor(q, p)
    if floor <= 0:
        raise InvalidRegime("fold density has nonpositive minimum; cannot build envelope")
    out = np.empty(size)
    have = 0
    while have < size:
        need = size - have
        cand = q.sample(rng, int(need * 1.5) + 16)
        accept = rng.random(cand.size) < floor / fold_density(cand, q, p)
        took = cand[accept][:need]
        out[have : have + took.size] = took
        have += took.size
    if size == 1:
        return float(out[0])
    return out


def simulate_ideal_block(
    q: ShapingDensity, p: LatticeParams, x: np.ndarray, y: np.ndarray, rng: np.random.Generator
):
    """Rate-unconstrained reference pipeline: per-sample symbol draw from P(u|x').

    Returns (xhat, u, diagnostics). The decoder side is genie-free: u is known,
    z' = (u - y') mod A, xhat = y + alpha z'.
    """
    n = x.size
    d = -p.A / 2 + p.A * rng.random(n)
    xp = mod_reduce(p.alpha * x + d, p.A)
    yp = mod_reduce(p.alpha * y + d, p.A)
    post = shaping_posterior(xp, q, p)
    cum = np.cumsum(post, axis=1)
    draw = rng.random(n)
    idx = (draw[:, None] >= cum).sum(axis=1)
    u = ask_alphabet(p)[idx]
    zp = mod_reduce(u - yp, p.A)
    xhat = y + p.alpha * zp
    return xhat, u, {"x_prime": xp, "y_prime": yp, "z_prime": zp}
