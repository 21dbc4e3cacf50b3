"""Closed-form quadratic-Gaussian rate-distortion functions and reverse waterfilling.

All public rates are in bits. D exactly equal to the source variance sits on
the zero-rate side of the case split.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def rd_gaussian(sigma2: float, D: float) -> float:
    """R(D) = max(0, 0.5 log2(sigma2 / D)) for a Gaussian source under MSE."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    if D <= 0:
        raise DomainError("D must be positive")
    if D >= sigma2:
        return 0.0
    return 0.5 * math.log2(sigma2 / D)


def rd_conditional(sigma2_x_given_y: float, D: float) -> float:
    """Conditional RD function; identical form with the conditional variance."""
    return rd_gaussian(sigma2_x_given_y, D)


def forward_channel_params(sigma2: float, D: float):
    """Test-channel synthesis Xhat = gain*X + Zhat: returns (gain, sigma2_zhat)."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    if D <= 0:
        raise DomainError("D must be positive")
    if D >= sigma2:
        return 0.0, 0.0
    gain = 1.0 - D / sigma2
    return gain, gain * D


@dataclass(frozen=True)
class ComponentPlan:
    lambda_i: float
    rate_i: float
    distortion_i: float
    active: bool


@dataclass(frozen=True)
class WaterfillPlan:
    level_lambda: float
    per_component: tuple

    @property
    def total_rate(self) -> float:
        return sum(c.rate_i for c in self.per_component)

    @property
    def total_distortion(self) -> float:
        return sum(c.distortion_i for c in self.per_component)


def reverse_waterfill(lambdas, D: float) -> WaterfillPlan:
    """Choose the water level lam with sum(min(lambda_i, lam)) = D.

    Active components (lambda_i > lam) get rate 0.5 log2(lambda_i/lam) and
    distortion lam; the rest are described at zero rate with distortion
    lambda_i. The level is found by monotone bisection to 1e-12 relative.
    """
    lam_arr = np.asarray(lambdas, dtype=float)
    if lam_arr.ndim != 1 or lam_arr.size == 0:
        raise DomainError("lambdas must be a nonempty 1-D sequence")
    if np.any(lam_arr <= 0):
        raise DomainError("all lambdas must be positive")
    if D <= 0:
        raise DomainError("D must be positive")

    total = float(lam_arr.sum())
    if D >= total:
        comps = tuple(
            ComponentPlan(lambda_i=float(l), rate_i=0.0, distortion_i=float(l), active=False)
            for l in lam_arr
        )
        return WaterfillPlan(level_lambda=float(lam_arr.max()), per_component=comps)

    lo = float(lam_arr.min()) * 1e-15
    hi = float(lam_arr.max())
    # sum(min(lambda_i, lam)) is nondecreasing in lam, so bisection converges;
    # iterate to the floating-point fixed point (well past 1e-12 relative).
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if float(np.minimum(lam_arr, mid).sum()) < D:
            lo = mid
        else:
            hi = mid
    level = 0.5 * (lo + hi)

    comps = []
    for l in lam_arr:
        if l > level:
            comps.append(
                ComponentPlan(
                    lambda_i=float(l),
                    rate_i=0.5 * math.log2(l / level),
                    distortion_i=level,
                    active=True,
                )
            )
        else:
            comps.append(
                ComponentPlan(lambda_i=float(l), rate_i=0.0, distortion_i=float(l), active=False)
            )
    return WaterfillPlan(level_lambda=level, per_component=tuple(comps))


@dataclass(frozen=True)
class WzChannelParams:
    """Description channel U = X + Zcheck for the scalar Wyner-Ziv test channel."""

    sigma2_x_given_y: float
    sigma2_check: float
    distortion: float


def wz_test_channel(sigma2_x_given_y: float, D: float) -> WzChannelParams:
    """Description-noise variance giving MSE exactly D: s2c = s2 D / (s2 - D)."""
    if sigma2_x_given_y <= 0:
        raise DomainError("sigma2_x_given_y must be positive")
    if D <= 0 or D >= sigma2_x_given_y:
        raise DomainError("need 0 < D < sigma2_x_given_y")
    s2c = sigma2_x_given_y * D / (sigma2_x_given_y - D)
    return WzChannelParams(
        sigma2_x_given_y=sigma2_x_given_y, sigma2_check=s2c, distortion=D
    )


def wz_estimate(u, ex_given_y, params: WzChannelParams):
    """MMSE combine E[X | U, Y] = (s2*U + s2c*E[X|Y]) / (s2 + s2c)."""
    s2 = params.sigma2_x_given_y
    s2c = params.sigma2_check
    return (s2 * np.asarray(u) + s2c * np.asarray(ex_given_y)) / (s2 + s2c)
