import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carleman.errors import RingOutsideWindowError
from carleman.lattice import (LatticeField, LatticeWindow, Potential,
                              boundary_mass_fraction, discrete_laplacian,
                              ring_mask, ring_mass, weighted_l2)
from carleman.logscalar import LogScalar


def random_field(window, seed=0):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(window.shape) + 1j * rng.standard_normal(window.shape)
    return LatticeField(window, vals)


def test_constant_field_interior_zero():
    w = LatticeWindow(2, 6)
    u = LatticeField.from_values(w, np.full(w.shape, 3.0 - 1.0j))
    lap = discrete_laplacian(u)
    interior = lap.values[1:-1, 1:-1]
    assert np.max(np.abs(interior)) == 0.0


def test_delta_stencil_d1():
    w = LatticeWindow(1, 5)
    lap = discrete_laplacian(LatticeField.delta(w))
    assert lap[[0]] == -2.0
    assert lap[[1]] == 1.0 and lap[[-1]] == 1.0
    assert np.sum(np.abs(lap.values)) == 4.0


def test_linear_function_discretely_harmonic_d2():
    w = LatticeWindow(2, 7)
    j1 = w.coordinate(0) + np.zeros(w.shape)
    lap = discrete_laplacian(LatticeField.from_values(w, j1))
    assert np.max(np.abs(lap.values[1:-1, 1:-1])) == 0.0


def test_laplacian_symmetric_bilinear():
    w = LatticeWindow(2, 5)
    u, v = random_field(w, 1), random_field(w, 2)
    lhs = np.vdot(v.values, discrete_laplacian(u).values)
    rhs = np.vdot(discrete_laplacian(v).values, u.values)
    scale = math.sqrt(u.norm_sq() * v.norm_sq())
    assert abs(lhs - rhs) <= 1e-14 * scale * w.d * 4


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60)
def test_spectrum_containment(seed):
    w = LatticeWindow(1, 8)
    u = random_field(w, seed)
    quad = -np.vdot(u.values, discrete_laplacian(u).values).real
    assert -1e-12 * u.norm_sq() <= quad <= (4 * w.d + 1e-12) * u.norm_sq()


def test_weighted_l2_delta_unit_weight():
    w = LatticeWindow(1, 5)
    out = weighted_l2(LatticeField.delta(w), np.zeros(w.shape))
    assert out.log_mag == pytest.approx(0.0, abs=1e-15)


def test_weighted_l2_weight_one_at_origin():
    w = LatticeWindow(2, 5)
    log_w = 2000.0 * w.radius_sq / 100.0  # e^{alpha |j/R|^2}, alpha=2000, R=10
    out = weighted_l2(LatticeField.delta(w), log_w)
    assert out.log_mag == pytest.approx(0.0, abs=1e-15)


def test_weighted_l2_huge_weight_matches_rational_oracle():
    # u = delta at (R,0), w = e^{alpha |j/R|^2}, alpha=2000, R=10:
    # the weighted norm is exactly e^{2000} in the log domain.
    w = LatticeWindow(2, 12)
    alpha, R = 2000.0, 10.0
    log_w = alpha * w.radius_sq / R**2
    u = LatticeField.delta(w, [10, 0])
    out = weighted_l2(u, log_w)
    assert out.log_mag == pytest.approx(2000.0, rel=1e-15)


def test_weighted_l2_time_integration():
    from carleman.quadrature import gauss_legendre

    w = LatticeWindow(1, 4)
    rule = gauss_legendre(8, 0.0, 1.0)
    vals = np.ones((rule.n,) + w.shape, dtype=complex)
    out = weighted_l2(vals, np.zeros(w.shape), time_rule=rule)
    assert out.to_float() == pytest.approx(math.sqrt(w.site_count), rel=1e-13)


def test_ring_mass_delta_not_in_ring():
    w = LatticeWindow(1, 10)
    assert ring_mass(LatticeField.delta(w), 5.0).is_zero


def test_ring_mass_counts_sites_d1():
    w = LatticeWindow(1, 10)
    u = LatticeField.from_values(w, np.ones(w.shape))
    out = ring_mass(u, 5.0)
    assert out.to_float() == pytest.approx(math.sqrt(8.0), rel=1e-13)


def test_ring_outside_window_raises():
    w = LatticeWindow(1, 10)
    with pytest.raises(RingOutsideWindowError):
        ring_mass(LatticeField.delta(w), 9.5)


def test_ring_partition_bounded_by_total_mass():
    w = LatticeWindow(2, 20)
    u = random_field(w, 3)
    total = u.norm_sq()
    parts = 0.0
    for R in (3.0, 7.0, 11.0, 15.0):
        lam = ring_mass(u, R)
        parts += math.exp(2.0 * lam.log_mag) if not lam.is_zero else 0.0
    assert parts <= total * (1.0 + 1e-12)


def test_ring_mass_window_doubling_invariance():
    small = LatticeWindow(1, 16)
    big = LatticeWindow(1, 32)
    rng = np.random.default_rng(5)
    core = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    vs = np.zeros(small.shape, complex)
    vb = np.zeros(big.shape, complex)
    vs[small.index_of([-4])[0]:small.index_of([4])[0] + 1] = core
    vb[big.index_of([-4])[0]:big.index_of([4])[0] + 1] = core
    a = ring_mass(LatticeField(small, vs), 4.0)
    b = ring_mass(LatticeField(big, vb), 4.0)
    assert a.log_mag == pytest.approx(b.log_mag, abs=1e-10)


def test_boundary_mass_diagnostic():
    w = LatticeWindow(1, 6)
    inner = LatticeField.delta(w)
    assert boundary_mass_fraction(inner.values, w) == 0.0
    edge = LatticeField.delta(w, [w.M])
    assert boundary_mass_fraction(edge.values, w) == 1.0


def test_potential_sup_norm_exact():
    w = LatticeWindow(1, 4)
    v = Potential.alternating(w, amplitude=1.0)
    assert v.sup_norm == 1.0
    assert not v.is_time_dependent
