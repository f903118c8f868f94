"""Weight parameters, the smooth time profile, and radial cutoffs.

The C-infinity gluing h(s) = e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)}) supplies
every transition: the time profile (0 on [0,1/4] and [3/4,1], 3 on
[3/8,5/8]), the radial plateau cutoff theta_R (1 inside R-1, 0 outside R)
and the annular cutoff mu (0 inside radius 1, 1 outside radius 2).  h has
closed-form first and second derivatives, whose exact sup-norms are located
once by golden-section search and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_PHI_PLATEAU = 3.0
_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _glue_h(s):
    """h(s) = sigma(-u(s)) with u = 1/s - 1/(1-s); 0 at s<=0, 1 at s>=1."""
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = np.atleast_1d(s)
    out = np.empty_like(s)
    out[s <= 0.0] = 0.0
    out[s >= 1.0] = 1.0
    mid = (s > 0.0) & (s < 1.0)
    sm = s[mid]
    u = 1.0 / sm - 1.0 / (1.0 - sm)
    with np.errstate(over="ignore"):
        out[mid] = np.where(u > 700, 0.0, np.where(u < -700, 1.0, 1.0 / (1.0 + np.exp(np.clip(u, -700, 700)))))
    return out.reshape(shape)


def _glue_h_d1(s):
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = np.atleast_1d(s)
    out = np.zeros_like(s)
    mid = (s > 0.0) & (s < 1.0)
    sm = s[mid]
    h = _glue_h(sm)
    du = -1.0 / sm**2 - 1.0 / (1.0 - sm) ** 2
    out[mid] = -du * h * (1.0 - h)
    return out.reshape(shape)


def _glue_h_d2(s):
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = np.atleast_1d(s)
    out = np.zeros_like(s)
    mid = (s > 0.0) & (s < 1.0)
    sm = s[mid]
    h = _glue_h(sm)
    du = -1.0 / sm**2 - 1.0 / (1.0 - sm) ** 2
    ddu = 2.0 / sm**3 - 2.0 / (1.0 - sm) ** 3
    hw = h * (1.0 - h)
    out[mid] = -ddu * hw + du * du * hw * (1.0 - 2.0 * h)
    return out.reshape(shape)


def _golden_max(f, a: float, b: float, iters: int = 90) -> float:
    """Max of f on [a, b] by golden-section refinement over a coarse bracket."""
    grid = np.linspace(a, b, 4001)
    vals = f(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    x1 = hi - _GOLD * (hi - lo)
    x2 = lo + _GOLD * (hi - lo)
    f1, f2 = float(f(np.array([x1]))[0]), float(f(np.array([x2]))[0])
    for _ in range(iters):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLD * (hi - lo)
            f2 = float(f(np.array([x2]))[0])
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLD * (hi - lo)
            f1 = float(f(np.array([x1]))[0])
    return max(f1, f2)


@lru_cache(maxsize=None)
def _glue_sup_derivatives() -> tuple:
    sup1 = _golden_max(_glue_h_d1, 0.0, 1.0)
    sup2 = _golden_max(lambda s: np.abs(_glue_h_d2(s)), 0.0, 1.0)
    return sup1, sup2


@dataclass(frozen=True)
class TimeProfile:
    """Smooth phi : [0,1] -> R with closed-form derivatives and exact sups.

    kinds: "paper_phi" (0/3 plateaus with smooth transitions), "constant"
    (phi == level), "zero".
    """

    kind: str
    level: float = 0.0
    sup_d1: float = field(init=False, default=0.0)
    sup_d2: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.kind not in ("paper_phi", "constant", "zero"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "paper_phi":
            s1, s2 = _glue_sup_derivatives()
            # transitions are h scaled by 3 over width 1/8
            object.__setattr__(self, "sup_d1", _PHI_PLATEAU * 8.0 * s1)
            object.__setattr__(self, "sup_d2", _PHI_PLATEAU * 64.0 * s2)

    @staticmethod
    def zero() -> "TimeProfile":
        return TimeProfile("zero")

    @staticmethod
    def constant(level: float) -> "TimeProfile":
        return TimeProfile("constant", float(level))

    @staticmethod
    def paper() -> "TimeProfile":
        return TimeProfile("paper_phi")

    @property
    def max_value(self) -> float:
        if self.kind == "paper_phi":
            return _PHI_PLATEAU
        if self.kind == "constant":
            return self.level
        return 0.0

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "constant":
            return np.full_like(t, self.level)
        up = _glue_h((t - 0.25) * 8.0)
        down = _glue_h((0.75 - t) * 8.0)
        return _PHI_PLATEAU * np.where(t < 0.5, up, down)

    def d1(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind in ("zero", "constant"):
            return np.zeros_like(t)
        up = 8.0 * _glue_h_d1((t - 0.25) * 8.0)
        down = -8.0 * _glue_h_d1((0.75 - t) * 8.0)
        return _PHI_PLATEAU * np.where(t < 0.5, up, down)

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind in ("zero", "constant"):
            return np.zeros_like(t)
        up = 64.0 * _glue_h_d2((t - 0.25) * 8.0)
        down = 64.0 * _glue_h_d2((0.75 - t) * 8.0)
        return _PHI_PLATEAU * np.where(t < 0.5, up, down)


@dataclass(frozen=True)
class WeightSpec:
    """(alpha, R, phi, d): the Carleman weight exp(alpha |j/R + phi(t) e_1|^2)."""

    alpha: float
    R: float
    phi: TimeProfile
    d: int
    c_rule: float = 2.0  # constant in the alpha >= c R log R regime rule

    def __post_init__(self):
        if self.alpha < 0 or self.R <= 0:
            raise ValueError("need alpha >= 0 and R > 0")
        if self.d < 1:
            raise ValueError("d >= 1 required")

    @staticmethod
    def from_rule(R: float, phi: TimeProfile, d: int, c_rule: float = 2.0) -> "WeightSpec":
        return WeightSpec(c_rule * R * math.log(R), R, phi, d, c_rule)

    @property
    def meets_alpha_rule(self) -> bool:
        """Whether alpha >= c_rule * R log R (the evolution-regime condition)."""
        return self.alpha >= self.c_rule * self.R * math.log(self.R) - 1e-12


def weight_log_magnitude(spec: WeightSpec, coords, phi_t) -> np.ndarray:
    """alpha * |j/R + phi(t) e_1|^2 for coordinate arrays and phi values.

    coords: sequence of d broadcastable coordinate arrays; phi_t broadcasts
    against them (scalar for one time, or a leading time axis).
    """
    shifted = coords[0] / spec.R + phi_t
    total = shifted**2
    for k in range(1, spec.d):
        total = total + (coords[k] / spec.R) ** 2
    return spec.alpha * total


def weight_at(j, t, spec: WeightSpec):
    """The weight at one site/time as a LogScalar (sign +)."""
    from .logscalar import LogScalar

    j = np.atleast_1d(np.asarray(j, dtype=float))
    phi_t = float(spec.phi.value(np.asarray(t, dtype=float)))
    coords = [np.array(j[k]) for k in range(spec.d)]
    return LogScalar.from_log(float(weight_log_magnitude(spec, coords, phi_t)))


@dataclass(frozen=True)
class CutoffSet:
    """Radial plateau cutoffs theta_R and mu built from the same gluing."""

    R: float
    smoothing_tag: str = "exp_glue"

    def theta(self, r):
        """1 for |x| <= R-1, 0 for |x| >= R, smooth monotone in between."""
        r = np.asarray(r, dtype=float)
        return _glue_h(self.R - r)

    def mu(self, r):
        """0 for |x| <= 1, 1 for |x| >= 2."""
        r = np.asarray(r, dtype=float)
        return _glue_h(r - 1.0)
