"""Conjugated evolution operators S and A, their identities, and the
weighted-inequality machinery.

Conventions: space-time fields live on a Gauss-Legendre time grid over [0,1]
with spatial axes trailing; time factors of test functions are polynomials so
every time derivative used by operator composition is closed-form.

Numerical scale: with alpha = c R log R the hopping coefficients
cosh/sinh((2 alpha/R)((j_k +- 1/2)/R + phi)) reach e^40 and beyond.  Those
magnitudes are representable, but two consequences shape this module:

* (S + A) collapses hop coefficients to e^{-b} and e^{+b}; forming it as
  Sf + Af in floats would lose the e^{-b} side to cancellation, so the
  combined operator is applied with the collapsed exponentials directly.
* Symmetry/skew defects are assembled bond by bond, where the coefficient
  pairing cosh(b^+_{j,k}) == cosh(b^-_{j+e_k,k}) that makes S symmetric holds
  bit-exactly; a formula error shows up at full coefficient scale while the
  correct operator is not drowned by magnitude-amplified roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteError, SupportViolationError, ToleranceExceededError
from .lattice import LatticeWindow, laplacian_values
from .logscalar import LogScalar, tree_logsumexp
from .profiles import TimeProfile, WeightSpec, _glue_h, weight_log_magnitude
from .quadrature import QuadratureRule, gauss_legendre


def make_time_grid(n_nodes: int = 24) -> QuadratureRule:
    return gauss_legendre(n_nodes, 0.0, 1.0)


@dataclass
class SpaceTimeField:
    """Complex field on (time nodes) x (window sites) with closed-form
    time derivatives where available."""

    window: LatticeWindow
    grid: QuadratureRule
    values: np.ndarray
    dvalues: np.ndarray | None = None
    ddvalues: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.grid.nodes)

    def norm_sq(self) -> float:
        per_node = np.sum(np.abs(self.values) ** 2, axis=tuple(range(1, self.values.ndim)))
        return float(np.dot(self.grid.weights, per_node))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())


def inner(F: SpaceTimeField, G: SpaceTimeField) -> complex:
    """Time-quadrature of the ell^2 pairing sum_j F_j conj(G_j)."""
    prod = F.values * np.conj(G.values)
    per_node = np.sum(prod, axis=tuple(range(1, prod.ndim)))
    return complex(np.dot(F.grid.weights, per_node))


def _shift(values: np.ndarray, axis: int, step: int) -> np.ndarray:
    """out[..., j, ...] = values[..., j+step, ...] with zero padding."""
    out = np.zeros_like(values)
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if step == 1:
        src[axis] = slice(1, None)
        dst[axis] = slice(None, -1)
    elif step == -1:
        src[axis] = slice(None, -1)
        dst[axis] = slice(1, None)
    else:
        raise ValueError("step must be +-1")
    out[tuple(dst)] = values[tuple(src)]
    return out


class OperatorCoefficients:
    """All t- and site-dependent coefficient arrays for one (spec, window, grid).

    Shapes broadcast as (T, *window.shape); axis k of the lattice is ndarray
    axis 1+k.  b^+-_k is (2 alpha/R)((j_k +- 1/2)/R + phi(t) delta_{1k}).
    """

    def __init__(self, spec: WeightSpec, window: LatticeWindow, grid: QuadratureRule):
        if spec.d != window.d:
            raise ValueError("spec dimension != window dimension")
        self.spec = spec
        self.window = window
        self.grid = grid
        d = window.d
        t = grid.nodes
        tshape = (len(t),) + (1,) * d
        self.phi_t = np.asarray(spec.phi.value(t)).reshape(tshape)
        self.phi_d1 = np.asarray(spec.phi.d1(t)).reshape(tshape)
        self.phi_d2 = np.asarray(spec.phi.d2(t)).reshape(tshape)
        scale = 2.0 * spec.alpha / spec.R
        self.bp, self.bm, self.a0 = [], [], []
        for k in range(d):
            jk = window.coordinate(k).astype(float)[np.newaxis, ...]
            phi_k = self.phi_t if k == 0 else 0.0
            self.bp.append(scale * ((jk + 0.5) / spec.R + phi_k))
            self.bm.append(scale * ((jk - 0.5) / spec.R + phi_k))
            self.a0.append(scale * (jk / spec.R + phi_k))
        j1 = window.coordinate(0).astype(float)[np.newaxis, ...]
        x1 = j1 / spec.R + self.phi_t
        self.theta = 2.0 * spec.alpha * x1 * self.phi_d1
        self.theta_dot = 2.0 * spec.alpha * (x1 * self.phi_d2 + self.phi_d1**2)
        self.b_dot = scale * self.phi_d1  # d/dt of b^+-_0; zero for k >= 1

    def spatial_axis(self, k: int) -> int:
        return 1 + k


def apply_s(F: SpaceTimeField, co: OperatorCoefficients, want_derivative: bool = False) -> SpaceTimeField:
    """Sf = i d_t f - 2d f + sum_k cosh(b+_k) f_{j+e_k} + cosh(b-_k) f_{j-e_k}."""
    if F.dvalues is None:
        raise ValueError("apply_s needs closed-form time derivatives on the input")
    d = co.window.d
    vals = 1j * F.dvalues - (2.0 * d) * F.values
    for k in range(d):
        ax = co.spatial_axis(k)
        vals = vals + np.cosh(co.bp[k]) * _shift(F.values, ax, +1)
        vals = vals + np.cosh(co.bm[k]) * _shift(F.values, ax, -1)
    dvals = None
    if want_derivative:
        if F.ddvalues is None:
            raise ValueError("derivative of Sf needs second derivatives of f")
        dvals = 1j * F.ddvalues - (2.0 * d) * F.dvalues
        for k in range(d):
            ax = co.spatial_axis(k)
            dvals = dvals + np.cosh(co.bp[k]) * _shift(F.dvalues, ax, +1)
            dvals = dvals + np.cosh(co.bm[k]) * _shift(F.dvalues, ax, -1)
            if k == 0:
                dvals = dvals + co.b_dot * np.sinh(co.bp[k]) * _shift(F.values, ax, +1)
                dvals = dvals + co.b_dot * np.sinh(co.bm[k]) * _shift(F.values, ax, -1)
    return SpaceTimeField(F.window, F.grid, vals, dvals)


def apply_a(F: SpaceTimeField, co: OperatorCoefficients, want_derivative: bool = False) -> SpaceTimeField:
    """Af = -2i alpha (j_1/R + phi) phi' f - sum_k sinh(b+_k) f_{j+e_k} + sinh(b-_k) f_{j-e_k}."""
    d = co.window.d
    vals = -1j * co.theta * F.values
    for k in range(d):
        ax = co.spatial_axis(k)
        vals = vals - np.sinh(co.bp[k]) * _shift(F.values, ax, +1)
        vals = vals + np.sinh(co.bm[k]) * _shift(F.values, ax, -1)
    dvals = None
    if want_derivative:
        if F.dvalues is None:
            raise ValueError("derivative of Af needs first derivatives of f")
        dvals = -1j * (co.theta_dot * F.values + co.theta * F.dvalues)
        for k in range(d):
            ax = co.spatial_axis(k)
            dvals = dvals - np.sinh(co.bp[k]) * _shift(F.dvalues, ax, +1)
            dvals = dvals + np.sinh(co.bm[k]) * _shift(F.dvalues, ax, -1)
            if k == 0:
                dvals = dvals - co.b_dot * np.cosh(co.bp[k]) * _shift(F.values, ax, +1)
                dvals = dvals + co.b_dot * np.cosh(co.bm[k]) * _shift(F.values, ax, -1)
    return SpaceTimeField(F.window, F.grid, vals, dvals)


def apply_s_plus_a(F: SpaceTimeField, co: OperatorCoefficients) -> SpaceTimeField:
    """(S+A)f with the hop coefficients collapsed to e^{-b+} and e^{+b-}.

    Algebraically identical to apply_s + apply_a; numerically it preserves the
    exponentially small e^{-b} couplings that float subtraction of cosh and
    sinh would destroy.
    """
    if F.dvalues is None:
        raise ValueError("apply_s_plus_a needs time derivatives on the input")
    d = co.window.d
    if any(np.max(co.bm[k]) > 700 for k in range(d)):
        raise NonFiniteError("collapsed hop coefficient overflows float range")
    vals = 1j * F.dvalues - 1j * co.theta * F.values - (2.0 * d) * F.values
    for k in range(d):
        ax = co.spatial_axis(k)
        vals = vals + np.exp(-co.bp[k]) * _shift(F.values, ax, +1)
        vals = vals + np.exp(co.bm[k]) * _shift(F.values, ax, -1)
    return SpaceTimeField(F.window, F.grid, vals)


def conjugation_oracle(F: SpaceTimeField, spec: WeightSpec) -> SpaceTimeField:
    """e^W (i d_t + Delta_d)(e^{-W} f) evaluated pointwise in the log domain.

    W differences between neighbors are taken in extended precision on an
    enlarged window, so the oracle's route to the hop exponents
    W_j - W_{j +- e_k} is independent of the half-shift formula under test.
    """
    window, grid = F.window, F.grid
    d, M = window.d, window.M
    t = grid.nodes
    phi_t = np.asarray(spec.phi.value(t), dtype=np.longdouble).reshape((len(t),) + (1,) * d)
    phi_d1 = np.asarray(spec.phi.d1(t), dtype=np.longdouble).reshape((len(t),) + (1,) * d)
    ext_axes = np.arange(-(M + 1), M + 2, dtype=np.longdouble)
    alpha = np.longdouble(spec.alpha)
    R = np.longdouble(spec.R)
    W_ext = np.zeros((len(t),) + (2 * M + 3,) * d, dtype=np.longdouble)
    for k in range(d):
        shape = [1] * (d + 1)
        shape[1 + k] = 2 * M + 3
        coord = ext_axes.reshape(shape)
        shifted = coord / R + (phi_t if k == 0 else np.longdouble(0.0))
        W_ext = W_ext + shifted**2
    W_ext = alpha * W_ext
    core = (slice(None),) + (slice(1, -1),) * d
    W = W_ext[core]
    j1 = window.coordinate(0).astype(np.longdouble)[np.newaxis, ...]
    w_dot = 2.0 * alpha * (j1 / R + phi_t) * phi_d1

    vals_ld = F.values.astype(np.clongdouble)
    dvals_ld = F.dvalues.astype(np.clongdouble)
    out = 1j * dvals_ld - 1j * w_dot * vals_ld - (2.0 * d) * vals_ld
    for k in range(d):
        ax = 1 + k
        sl_plus = list(core)
        sl_plus[ax] = slice(2, None)
        sl_minus = list(core)
        sl_minus[ax] = slice(None, -2)
        delta_plus = W - W_ext[tuple(sl_plus)]
        delta_minus = W - W_ext[tuple(sl_minus)]
        out = out + np.exp(delta_plus) * _shift(vals_ld, ax, +1)
        out = out + np.exp(delta_minus) * _shift(vals_ld, ax, -1)
    return SpaceTimeField(window, grid, out.astype(complex))


def symmetry_defects(f: SpaceTimeField, g: SpaceTimeField, co: OperatorCoefficients) -> tuple:
    """(symmetric defect of S, skew defect of A), normalized by ||f|| ||g||.

    Bond-grouped assembly: the hop contribution is
        (cosh b+_k(j) - cosh b-_k(j+e_k)) * (f_{j+e_k} g*_j - f_j g*_{j+e_k})
    summed over bonds, which is the exact regrouping of <Sf,g> - <f,Sg>; the
    analogous sinh expression covers <Af,g> + <f,Ag>.  The remaining S part is
    the time boundary term i int (sum_j f g*)' dt, quadrature-exact for
    polynomial time factors.  Diagonal terms cancel identically and are
    omitted.
    """
    d = co.window.d
    w = f.grid.weights
    conj_g = np.conj(g.values)
    sym = 0.0 + 0.0j
    skew = 0.0 + 0.0j
    for k in range(d):
        ax = co.spatial_axis(k)
        lo = [slice(None)] * f.values.ndim
        hi = [slice(None)] * f.values.ndim
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        cross_fg = f.values[hi] * conj_g[lo]  # f_{j+e_k} g*_j
        cross_gf = f.values[lo] * conj_g[hi]  # f_j g*_{j+e_k}
        bp_lo = np.broadcast_to(co.bp[k], f.values.shape)[lo]
        bm_hi = np.broadcast_to(co.bm[k], f.values.shape)[hi]
        sym_bond = (np.cosh(bp_lo) - np.cosh(bm_hi)) * (cross_fg - cross_gf)
        skew_bond = (np.sinh(bm_hi) - np.sinh(bp_lo)) * (cross_gf + cross_fg)
        axes = tuple(range(1, f.values.ndim))
        sym += complex(np.dot(w, np.sum(sym_bond, axis=axes)))
        skew += complex(np.dot(w, np.sum(skew_bond, axis=axes)))
    # i * int (d/dt sum_j f g*) dt : the only non-cancelling S contribution
    ddt = f.dvalues * conj_g + f.values * np.conj(g.dvalues)
    axes = tuple(range(1, f.values.ndim))
    sym += 1j * complex(np.dot(w, np.sum(ddt, axis=axes)))
    scale = f.norm() * g.norm()
    if scale == 0.0:
        return 0.0, 0.0
    return abs(sym) / scale, abs(skew) / scale


def commutator_quadratic_form(f: SpaceTimeField, co: OperatorCoefficients) -> float:
    """The four-term closed form of <[S,A]f, f> (time-integrated).

    With phi constant the last two terms vanish and the rest is a sum of
    squares, the stationary-positivity mechanism.
    """
    spec = co.spec
    d = co.window.d
    w = f.grid.weights
    axes = tuple(range(1, f.values.ndim))
    mag_sq = np.abs(f.values) ** 2
    sinh_front = math.sinh(2.0 * spec.alpha / spec.R**2)

    t1_density = np.zeros_like(mag_sq)
    t2_density = np.zeros_like(mag_sq)
    for k in range(d):
        ax = co.spatial_axis(k)
        t1_density += np.sinh(co.a0[k]) ** 2 * mag_sq
        centered = 0.5 * (_shift(f.values, ax, +1) - _shift(f.values, ax, -1))
        t2_density += np.abs(centered) ** 2
    term1 = 4.0 * sinh_front * float(np.dot(w, np.sum(t1_density, axis=axes)))
    term2 = 4.0 * sinh_front * float(np.dot(w, np.sum(t2_density, axis=axes)))
    term3 = float(np.dot(w, np.sum(co.theta_dot * mag_sq, axis=axes)))
    im_hop = np.imag(_shift(f.values, co.spatial_axis(0), +1) * np.conj(f.values))
    t4_density = (8.0 * spec.alpha / spec.R) * co.phi_d1 * np.cosh(co.bp[0]) * im_hop
    term4 = float(np.dot(w, np.sum(t4_density, axis=axes)))
    return term1 + term2 + term3 + term4


def commutator_lhs(f: SpaceTimeField, co: OperatorCoefficients) -> float:
    """<(SA - AS) f, f> by direct operator composition.

    Coefficient time derivatives are closed-form, so S(Af) uses the exact
    d_t(Af); no finite differencing enters.
    """
    af = apply_a(f, co, want_derivative=True)
    saf = apply_s(af, co)
    sf = apply_s(f, co)
    asf = apply_a(sf, co)
    comm = SpaceTimeField(f.window, f.grid, saf.values - asf.values)
    val = inner(comm, f)
    return float(val.real)


def random_tensor_field(window: LatticeWindow, grid: QuadratureRule, rng,
                        support_margin: int = 3, t_degree: int = 3,
                        site_mask: np.ndarray | None = None) -> SpaceTimeField:
    """psi(t) h_j with psi = t^2 (1-t)^2 times a random polynomial.

    h is complex Gaussian, zeroed within support_margin of the window edge
    (and outside site_mask when given); closed-form psi', psi'' ride along so
    operator compositions stay finite-difference-free.
    """
    P = np.polynomial.Polynomial
    bump = P([0.0, 0.0, 1.0, -2.0, 1.0])  # t^2 (1-t)^2
    coeffs = rng.standard_normal(t_degree + 1) + 1j * rng.standard_normal(t_degree + 1)
    psi = bump * P(coeffs)
    h = rng.standard_normal(window.shape) + 1j * rng.standard_normal(window.shape)
    inf_norm = np.zeros(window.shape)
    for k in range(window.d):
        inf_norm = np.maximum(inf_norm, np.abs(window.coordinate(k)))
    h[inf_norm > window.M - support_margin] = 0.0
    if site_mask is not None:
        h = h * site_mask
    t = grid.nodes
    values = np.multiply.outer(psi(t), h)
    dvalues = np.multiply.outer(psi.deriv(1)(t), h)
    ddvalues = np.multiply.outer(psi.deriv(2)(t), h)
    return SpaceTimeField(window, grid, values, dvalues, ddvalues)


def _check_report(check: str, params: dict, defect: float, tolerance: float) -> dict:
    return {"check": check, "params": params, "defect": defect,
            "tolerance": tolerance, "pass": bool(defect <= tolerance)}


def symmetry_check(spec: WeightSpec, window: LatticeWindow, trials: int, seed: int,
                   n_nodes: int = 24, tolerance: float = 1e-9) -> dict:
    """Max over trials of the S-symmetry and A-skewness defects."""
    grid = make_time_grid(n_nodes)
    co = OperatorCoefficients(spec, window, grid)
    worst_sym = worst_skew = 0.0
    worst_trial = -1
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        f = random_tensor_field(window, grid, rng)
        g = random_tensor_field(window, grid, rng)
        s_def, a_def = symmetry_defects(f, g, co)
        if max(s_def, a_def) > max(worst_sym, worst_skew):
            worst_trial = trial
        worst_sym = max(worst_sym, s_def)
        worst_skew = max(worst_skew, a_def)
    report = {
        "symmetry": _check_report("S_symmetry", {"d": spec.d, "R": spec.R, "alpha": spec.alpha,
                                                 "phi": spec.phi.kind, "trials": trials, "seed": seed},
                                  worst_sym, tolerance),
        "skewness": _check_report("A_skewness", {"d": spec.d, "R": spec.R, "alpha": spec.alpha,
                                                 "phi": spec.phi.kind, "trials": trials, "seed": seed},
                                  worst_skew, tolerance),
    }
    if not (report["symmetry"]["pass"] and report["skewness"]["pass"]):
        raise ToleranceExceededError(
            f"symmetry/skewness defect above {tolerance} (trial {worst_trial})",
            trial=worst_trial, defect=max(worst_sym, worst_skew))
    return report


def commutator_check(spec: WeightSpec, window: LatticeWindow, trials: int, seed: int,
                     n_nodes: int = 24, rel_tolerance: float = 1e-8) -> dict:
    """|<(SA-AS)f,f> - closed form| <= tol * (|lhs| + ||f||^2) per trial,
    plus the Cauchy-Schwarz consequence ||Sf+Af||^2 >= <(SA-AS)f,f>."""
    grid = make_time_grid(n_nodes)
    co = OperatorCoefficients(spec, window, grid)
    worst_ratio = 0.0
    worst_trial = -1
    cs_ok = True
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        f = random_tensor_field(window, grid, rng)
        lhs = commutator_lhs(f, co)
        rhs = commutator_quadratic_form(f, co)
        scale = abs(lhs) + f.norm_sq()
        ratio = abs(lhs - rhs) / scale
        if ratio > worst_ratio:
            worst_ratio, worst_trial = ratio, trial
        sf = apply_s(f, co)
        af = apply_a(f, co)
        total = SpaceTimeField(window, grid, sf.values + af.values)
        if total.norm_sq() < lhs - rel_tolerance * scale:
            cs_ok = False
    params = {"d": spec.d, "R": spec.R, "alpha": spec.alpha, "phi": spec.phi.kind,
              "trials": trials, "seed": seed}
    report = {
        "identity": _check_report("commutator_identity", params, worst_ratio, rel_tolerance),
        "lower_bound": {"check": "norm_dominates_commutator", "params": params, "pass": cs_ok},
    }
    if not report["identity"]["pass"] or not cs_ok:
        raise ToleranceExceededError(
            f"commutator defect above {rel_tolerance} (trial {worst_trial})",
            trial=worst_trial, defect=worst_ratio)
    return report


def conjugation_check(spec: WeightSpec, window: LatticeWindow, trials: int, seed: int,
                      n_nodes: int = 24) -> dict:
    """(S+A)f against the pointwise log-domain conjugation oracle.

    Returns the max over trials of the defect normalized two ways: by ||f||
    (meaningful when the hop scale stays near machine range, e.g. phi == 0)
    and by the conjugated field's own norm (the scale-free form).
    """
    grid = make_time_grid(n_nodes)
    co = OperatorCoefficients(spec, window, grid)
    worst_abs = worst_rel = 0.0
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        f = random_tensor_field(window, grid, rng)
        lhs = apply_s_plus_a(f, co)
        rhs = conjugation_oracle(f, spec)
        diff = SpaceTimeField(window, grid, lhs.values - rhs.values)
        nd = diff.norm()
        worst_abs = max(worst_abs, nd / f.norm())
        worst_rel = max(worst_rel, nd / max(lhs.norm(), rhs.norm()))
    return {
        "defect_over_norm_f": worst_abs,
        "defect_relative": worst_rel,
        "params": {"d": spec.d, "R": spec.R, "alpha": spec.alpha, "phi": spec.phi.kind,
                   "trials": trials, "seed": seed},
    }


# ---------------------------------------------------------------------------
# log-domain hyperbolic helpers and the proof's hiding inequalities


def log_sinh(x: float) -> float:
    if x <= 0:
        raise ValueError("log_sinh needs x > 0")
    if x < 1e-4:
        return math.log(x) + math.log1p(x * x / 6.0)
    if x > 350.0:
        return x - math.log(2.0)
    return math.log(math.sinh(x))


def log_cosh(x: float) -> float:
    x = abs(x)
    if x > 350.0:
        return x - math.log(2.0)
    return math.log(math.cosh(x))


def hiding_sides(alpha: float, R: float, d: int, sup_d1: float, sup_d2: float, s: float) -> dict:
    """Log-domain left/right sides of the two absorption inequalities at
    |j/R + phi| = s >= 1.

    A: sinh(2a/R^2) sinh^2(2as/R) >= (8 a sup_d1 / R) cosh(a/R^2) cosh(2as/R)
    B: sinh(2a/R^2) sinh^2(2as/R) >= 2 a sup_d2 s
    """
    lhs = log_sinh(2.0 * alpha / R**2) + 2.0 * log_sinh(2.0 * alpha * s / R)
    out = {"log_lhs": lhs}
    if sup_d1 > 0:
        out["log_rhs_A"] = (math.log(8.0 * alpha * sup_d1 / R)
                            + log_cosh(alpha / R**2) + log_cosh(2.0 * alpha * s / R))
    else:
        out["log_rhs_A"] = -math.inf
    out["log_rhs_B"] = math.log(2.0 * alpha * sup_d2 * s) if sup_d2 > 0 else -math.inf
    return out


def minimal_hiding_constant(d: int, R: float, phi: TimeProfile, s_grid,
                            c_lo: float = 1e-3, c_hi: float = 64.0) -> dict:
    """Smallest c such that both inequalities hold on the grid at alpha = c R log R."""
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid < 1.0):
        raise ValueError("grid values must be >= 1")

    def holds(c: float) -> bool:
        alpha = c * R * math.log(R)
        for s in s_grid:
            sides = hiding_sides(alpha, R, d, phi.sup_d1, phi.sup_d2, float(s))
            if sides["log_lhs"] < max(sides["log_rhs_A"], sides["log_rhs_B"]):
                return False
        return True

    if phi.sup_d1 == 0.0 and phi.sup_d2 == 0.0:
        return {"min_c": 0.0, "vacuous": True}
    if not holds(c_hi):
        return {"min_c": math.inf, "vacuous": False}
    lo, hi = c_lo, c_hi
    if holds(lo):
        return {"min_c": lo, "vacuous": False}
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return {"min_c": hi, "vacuous": False}


def hiding_inequalities(spec: WeightSpec, s_grid) -> dict:
    """Pointwise log-domain evaluation at the spec's own alpha plus the
    minimal-c scan; failures are data, not errors."""
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid < 1.0):
        raise ValueError("grid values must be >= 1")
    phi = spec.phi
    rows = []
    for s in s_grid:
        sides = hiding_sides(spec.alpha, spec.R, spec.d, phi.sup_d1, phi.sup_d2, float(s))
        rows.append({
            "s": float(s),
            **sides,
            "holds_A": sides["log_lhs"] >= sides["log_rhs_A"],
            "holds_B": sides["log_lhs"] >= sides["log_rhs_B"],
        })
    scan = minimal_hiding_constant(spec.d, spec.R, phi, s_grid)
    return {"rows": rows, "minimal_c": scan["min_c"],
            "all_hold_at_alpha": all(r["holds_A"] and r["holds_B"] for r in rows),
            "params": {"d": spec.d, "R": spec.R, "alpha": spec.alpha,
                       "sup_d1": phi.sup_d1, "sup_d2": phi.sup_d2}}


def absorption_threshold(alpha: float, R: float, L: float, d: int) -> bool:
    """sinh(2a/R^2) sinh^2(2a/(sqrt(d) R)) >= L^2, evaluated in log domain."""
    if min(alpha, R, L) <= 0 or d < 1:
        raise ValueError("all arguments must be positive")
    lhs = log_sinh(2.0 * alpha / R**2) + 2.0 * log_sinh(2.0 * alpha / (math.sqrt(d) * R))
    return lhs >= 2.0 * math.log(L)


def phi_rate_scan(phi_growth: str | Callable[[float], float], c: float, L: float, d: int,
                  R_list) -> list:
    """Per R, whether alpha = c R phi(R) clears the absorption threshold.

    phi_growth: "log", "sqrt_log", or a callable R -> phi(R).
    """
    if callable(phi_growth):
        fn, name = phi_growth, getattr(phi_growth, "__name__", "custom")
    elif phi_growth == "log":
        fn, name = (lambda r: math.log(r)), "log"
    elif phi_growth == "sqrt_log":
        fn, name = (lambda r: math.sqrt(math.log(r))), "sqrt_log"
    else:
        raise ValueError(f"unknown phi growth {phi_growth!r}")
    rows = []
    for R in R_list:
        alpha = c * R * fn(R)
        rows.append({"R": float(R), "phi_growth": name, "alpha": alpha,
                     "holds": absorption_threshold(alpha, R, L, d)})
    return rows


# ---------------------------------------------------------------------------
# empirical Carleman constant


def admissible_site_mask(spec: WeightSpec, window: LatticeWindow) -> tuple:
    """(hard admissibility mask, smooth inward ramp) for the support condition
    |j/R + phi(t) e_1|^2 >= 1 at every time the profile visits.

    The worst case over phi in [phi_min, phi_max] is at the clamped minimizer
    phi* = clip(-j_1/R, phi_min, phi_max).
    """
    if spec.phi.kind == "paper_phi":
        phi_lo, phi_hi = 0.0, 3.0
    else:
        phi_lo = phi_hi = spec.phi.max_value
    j1 = window.coordinate(0).astype(float)
    phi_star = np.clip(-j1 / spec.R, phi_lo, phi_hi)
    s_sq = (j1 / spec.R + phi_star) ** 2
    for k in range(1, window.d):
        s_sq = s_sq + (window.coordinate(k).astype(float) / spec.R) ** 2
    s = np.sqrt(s_sq + np.zeros(window.shape))
    hard = s >= 1.0
    ramp = _glue_h(spec.R * (s - 1.0)) * hard
    return hard, ramp


def random_admissible_field(spec: WeightSpec, window: LatticeWindow, grid: QuadratureRule,
                            rng, support_margin: int = 2) -> SpaceTimeField:
    """Complex Gaussian sites x smooth inward ramp x polynomial time bump,
    then exact projection off the inadmissible set."""
    hard, ramp = admissible_site_mask(spec, window)
    f = random_tensor_field(window, grid, rng, support_margin=support_margin, site_mask=ramp)
    f.values[:, ~hard] = 0.0
    f.dvalues[:, ~hard] = 0.0
    if f.ddvalues is not None:
        f.ddvalues[:, ~hard] = 0.0
    return f


def carleman_ratio(spec: WeightSpec, g: SpaceTimeField, support_tol: float = 1e-14) -> float:
    """Smallest admissible constant for this g in the weighted inequality:

        sqrt(sinh(2a/R^2)) sinh(2a/(sqrt(d) R)) ||W g|| <= c ||W (i d_t + Delta_d) g||

    returns c_g; weighted norms are evaluated wholly in the log domain.
    """
    window, grid = g.window, g.grid
    hard, _ = admissible_site_mask(spec, window)
    total = np.sum(np.abs(g.values) ** 2)
    if total == 0.0:
        raise SupportViolationError("g vanishes identically")
    bad = float(np.sum(np.abs(g.values[:, ~hard]) ** 2)) / float(total)
    if bad > support_tol:
        raise SupportViolationError(f"relative mass {bad:.3e} outside the admissible set")
    coords = [window.coordinate(k).astype(float)[np.newaxis, ...] for k in range(window.d)]
    phi_t = np.asarray(spec.phi.value(grid.nodes)).reshape((len(grid.nodes),) + (1,) * window.d)
    log_w = weight_log_magnitude(spec, coords, phi_t) + np.zeros((len(grid.nodes),) + window.shape)
    pg = 1j * g.dvalues + laplacian_values(g.values.astype(complex, copy=True), window.d)
    from .lattice import weighted_l2

    norm_wg = weighted_l2(g.values, log_w, time_rule=grid)
    norm_wpg = weighted_l2(pg, log_w, time_rule=grid)
    if norm_wpg.is_zero:
        raise SupportViolationError("(i d_t + Delta_d) g vanishes; ratio undefined")
    factor_log = 0.5 * log_sinh(2.0 * spec.alpha / spec.R**2) + log_sinh(
        2.0 * spec.alpha / (math.sqrt(spec.d) * spec.R))
    return math.exp(factor_log + norm_wg.log_mag - norm_wpg.log_mag)


def carleman_constant_batch(spec: WeightSpec, window: LatticeWindow, trials: int, seed: int,
                            n_nodes: int = 24) -> dict:
    """Empirical Carleman constant: max of carleman_ratio over random
    admissible g."""
    grid = make_time_grid(n_nodes)
    ratios = []
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        g = random_admissible_field(spec, window, grid, rng)
        if np.sum(np.abs(g.values) ** 2) == 0.0:
            continue
        ratios.append(carleman_ratio(spec, g))
    if not ratios:
        raise SupportViolationError("no admissible trial fields were generated")
    return {"c_emp": max(ratios), "ratios": ratios, "trials": trials, "seed": seed,
            "params": {"d": spec.d, "R": spec.R, "alpha": spec.alpha, "phi": spec.phi.kind}}
