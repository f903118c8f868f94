"""Truncated Z^d windows, complex lattice fields, the discrete Laplacian,
log-domain weighted norms, and ring masses."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import RingOutsideWindowError
from .logscalar import NEG_INF, LogScalar, tree_logsumexp

_LOG_FLOOR = -745.0  # below exp() underflow; stands in for log(0) in arrays


@dataclass(frozen=True)
class LatticeWindow:
    """Sites j in Z^d with max_k |j_k| <= M; out-of-window neighbors read as 0."""

    d: int
    M: int
    boundary_policy: str = "zero_padding"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension d must be >= 1")
        if self.M < 2:
            raise ValueError("half-width M must be >= 2")
        if self.boundary_policy != "zero_padding":
            raise ValueError("only zero_padding boundaries are supported")

    @property
    def shape(self) -> tuple:
        return (2 * self.M + 1,) * self.d

    @property
    def site_count(self) -> int:
        return (2 * self.M + 1) ** self.d

    @cached_property
    def axes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def coordinate(self, k: int) -> np.ndarray:
        """Coordinate j_k broadcast over the window shape."""
        shape = [1] * self.d
        shape[k] = 2 * self.M + 1
        return self.axes.reshape(shape)

    @cached_property
    def radius_sq(self) -> np.ndarray:
        """Euclidean |j|^2 per site."""
        out = np.zeros(self.shape)
        for k in range(self.d):
            out = out + self.coordinate(k).astype(float) ** 2
        return out

    def index_of(self, j) -> tuple:
        return tuple(int(jk) + self.M for jk in np.atleast_1d(j))


@dataclass(frozen=True)
class LatticeField:
    """One time slice of a complex field on a window."""

    window: LatticeWindow
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.window.shape:
            raise ValueError(f"values shape {self.values.shape} != window {self.window.shape}")
        if not np.all(np.isfinite(self.values.real)) or not np.all(np.isfinite(self.values.imag)):
            raise ValueError("field values must be finite")

    @staticmethod
    def from_values(window: LatticeWindow, values) -> "LatticeField":
        return LatticeField(window, np.asarray(values, dtype=complex))

    @staticmethod
    def delta(window: LatticeWindow, j=None) -> "LatticeField":
        values = np.zeros(window.shape, dtype=complex)
        idx = window.index_of(j if j is not None else [0] * window.d)
        values[idx] = 1.0
        return LatticeField(window, values)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def __getitem__(self, j):
        return self.values[self.window.index_of(j)]


@dataclass(frozen=True)
class Potential:
    """Bounded potential on a window; sup_norm is the exact sup of |values|."""

    window: LatticeWindow
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[-self.window.d:] != self.window.shape:
            raise ValueError("potential shape incompatible with window")

    @property
    def is_time_dependent(self) -> bool:
        return self.values.ndim == self.window.d + 1

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @staticmethod
    def zero(window: LatticeWindow) -> "Potential":
        return Potential(window, np.zeros(window.shape))

    @staticmethod
    def alternating(window: LatticeWindow, amplitude: float = 1.0) -> "Potential":
        """V_j = amplitude * (-1)^(j_1+...+j_d); sup norm exactly |amplitude|."""
        parity = np.zeros(window.shape)
        for k in range(window.d):
            parity = parity + window.coordinate(k)
        return Potential(window, amplitude * np.where(parity % 2 == 0, 1.0, -1.0))


def laplacian_values(values: np.ndarray, d: int) -> np.ndarray:
    """(Delta_d u)_j = sum_k (u_{j+e_k} + u_{j-e_k} - 2 u_j), zero padding."""
    out = (-2.0 * d) * values
    for k in range(values.ndim - d, values.ndim):
        lo = [slice(None)] * values.ndim
        hi = [slice(None)] * values.ndim
        lo[k] = slice(None, -1)
        hi[k] = slice(1, None)
        out[tuple(lo)] += values[tuple(hi)]
        out[tuple(hi)] += values[tuple(lo)]
    return out


def discrete_laplacian(u: LatticeField) -> LatticeField:
    return LatticeField(u.window, laplacian_values(u.values.astype(complex, copy=True), u.window.d))


def log_abs_sq(values: np.ndarray) -> np.ndarray:
    """log |v|^2 per entry with -inf-safe floor for exact zeros."""
    mag_sq = np.abs(values) ** 2
    with np.errstate(divide="ignore"):
        out = np.log(mag_sq)
    return np.where(mag_sq == 0.0, NEG_INF, out)


def weighted_l2(u, log_weights, time_rule=None) -> LogScalar:
    """sqrt( sum_j w_j^2 |u_j|^2 ), wholly in the log domain.

    u: LatticeField, or ndarray of values; for space-time input (leading time
    axis) pass time_rule=(nodes, weights) or a QuadratureRule and log_weights
    either per-site or per (node, site).
    """
    values = u.values if isinstance(u, LatticeField) else np.asarray(u)
    lw = np.asarray(log_weights, dtype=float)
    if time_rule is None:
        total = tree_logsumexp(2.0 * lw + log_abs_sq(values))
        return LogScalar.from_log(0.5 * total) if total != NEG_INF else LogScalar.zero()
    if hasattr(time_rule, "weights"):
        t_weights = np.asarray(time_rule.weights, dtype=float)
    else:
        t_weights = np.asarray(time_rule[1], dtype=float)
    per_node = np.empty(len(t_weights))
    for n in range(len(t_weights)):
        lw_n = lw[n] if lw.ndim == values.ndim else lw
        per_node[n] = tree_logsumexp(2.0 * lw_n + log_abs_sq(values[n]))
    total = tree_logsumexp(per_node + np.log(t_weights))
    return LogScalar.from_log(0.5 * total) if total != NEG_INF else LogScalar.zero()


def ring_mask(window: LatticeWindow, R: float) -> np.ndarray:
    """Sites with R-2 <= |j| <= R+1 (Euclidean norm)."""
    if R + 1 >= window.M:
        raise RingOutsideWindowError(f"ring R={R} needs R+1 < M={window.M}")
    r_sq = window.radius_sq
    return ((R - 2) ** 2 <= r_sq) & (r_sq <= (R + 1) ** 2)


def ring_mass(u, R: float, time_weights: np.ndarray | None = None) -> LogScalar:
    """lambda(R): ell^2 mass on the ring, time-integrated for space-time input.

    u: LatticeField (stationary variant), or (Trajectory-like) object exposing
    window and a values array with leading time axis plus time_weights.
    """
    if isinstance(u, LatticeField):
        mask = ring_mask(u.window, R)
        total = tree_logsumexp(log_abs_sq(u.values[mask]))
        return LogScalar.from_log(0.5 * total) if total != NEG_INF else LogScalar.zero()
    window, values = u.window, u.values
    if time_weights is None:
        raise ValueError("space-time ring_mass needs time integration weights")
    mask = ring_mask(window, R)
    per_node = np.array([tree_logsumexp(log_abs_sq(values[n][mask])) for n in range(values.shape[0])])
    with np.errstate(divide="ignore"):
        log_tw = np.log(time_weights)
    total = tree_logsumexp(per_node + log_tw)
    return LogScalar.from_log(0.5 * total) if total != NEG_INF else LogScalar.zero()


def boundary_mass_fraction(values: np.ndarray, window: LatticeWindow) -> float:
    """Mass fraction in the outer shell max_k |j_k| > M-2.

    Reported with every experiment; runs above 1e-12 * ||u||^2 are flagged so
    window-truncation error is visible instead of silent.
    """
    inf_norm = np.zeros(window.shape)
    for k in range(window.d):
        inf_norm = np.maximum(inf_norm, np.abs(window.coordinate(k)))
    shell = inf_norm > window.M - 2
    mag_sq = np.abs(values) ** 2
    total = float(np.sum(mag_sq))
    if total == 0.0:
        return 0.0
    shell_mass = mag_sq[..., shell] if values.ndim > window.d else mag_sq[shell]
    return float(np.sum(shell_mass)) / total
