from fractions import Fraction

import numpy as np
import pytest

from carleman.counterexample import (CounterexampleSpec, DyadicField,
                                     build_counterexample, diamond_sites,
                                     literal_value, potential_bound_scan,
                                     repaired_ring_values, tail_mass_bound,
                                     verify_counterexample)
from carleman.errors import VerificationFailureError


def test_origin_value_is_one():
    for mode in ("literal_paper", "repaired"):
        spec = CounterexampleSpec(R=12, margin=12, value_mode=mode)
        u, _ = build_counterexample(spec)
        assert u.value(0, 0) == 1


def test_diamond_vanishes():
    R = 14
    spec = CounterexampleSpec(R=R, margin=14)
    u, _ = build_counterexample(spec)
    for s in diamond_sites(R):
        assert u.value(*s) == 0
    assert u.value(0, R) == 0 and u.value(1, R + 1) == 0 and u.value(-1, R - 1) == 0


def test_named_literal_values():
    R = 20
    assert literal_value(R, 0, R - 3) == Fraction(1, 2 ** (R - 3))
    assert literal_value(R, 0, 0) == 1
    assert literal_value(R, 1, R + 2) == -Fraction(1, 2 ** (R - 4))
    assert literal_value(R, 2, R + 1) == Fraction(1, 2 ** (R - 4))
    assert literal_value(R, 3, R) == -Fraction(1, 2 ** (R - 3))
    assert literal_value(R, 0, R + 3) == Fraction(1, 2 ** (R - 3))


def test_literal_mode_residuals_at_axis_extremes():
    R = 20
    spec = CounterexampleSpec(R=R, margin=20, value_mode="literal_paper")
    u = DyadicField(spec)
    report = verify_counterexample(u, None, spec)
    assert not report["pass"]
    bad = {tuple(s) for s in report["diamond_harmonic"]["residual_sites"]}
    assert bad == {(0, R + 2), (0, R - 2), (2, R), (-2, R)}
    expected = Fraction(3, 2 ** (R - 3))
    assert u.laplacian(0, R + 2) == -expected
    assert u.laplacian(0, R - 2) == -expected
    assert u.laplacian(2, R) == expected
    assert u.laplacian(-2, R) == expected


def test_repaired_ring_values_are_exact_min_perturbation():
    R = 16
    vals = repaired_ring_values(R)
    h = Fraction(1, 2 ** (R - 4))
    x = (vals[(0, R + 3)], vals[(1, R + 2)], vals[(2, R + 1)], vals[(3, R)])
    # constraints hold exactly
    assert x[0] + 2 * x[1] == 0 and x[1] + x[2] == 0 and 2 * x[2] + x[3] == 0
    # Lagrange optimality: x - p is W-orthogonal to the constraint null space
    p = (h / 2, -h, h, -h / 2)
    v = (-2, 1, -1, 2)  # null vector of the constraint matrix
    w = (2, 4, 4, 2)
    assert sum(wi * (xi - pi) * vi for wi, xi, pi, vi in zip(w, x, p, v)) == 0
    # the resulting exact values
    assert x == (h, -h / 2, h / 2, -h)
    # mirror symmetry
    assert vals[(0, R - 3)] == vals[(0, R + 3)]
    assert vals[(-2, R - 1)] == vals[(2, R + 1)]


def test_repaired_mode_passes_all_checks():
    spec = CounterexampleSpec(R=12, margin=12)
    u, V = build_counterexample(spec)
    report = verify_counterexample(u, V, spec)
    assert report["pass"], report
    assert report["diamond_harmonic"]["residual_sites"] == []
    assert report["l2_tail_certificate"]["pass"]


def test_literal_mode_raise_on_failure():
    spec = CounterexampleSpec(R=10, margin=10, value_mode="literal_paper")
    u = DyadicField(spec)
    with pytest.raises(VerificationFailureError):
        verify_counterexample(u, None, spec, raise_on_failure=True)


def test_potential_vanishes_on_diamond():
    R = 12
    spec = CounterexampleSpec(R=R, margin=12)
    u, V = build_counterexample(spec)
    for s in diamond_sites(R):
        assert u.potential_value(*s) == 0


def test_far_region_potential_bounded_by_ratio_arithmetic():
    # interior of the j2 <= R-3 region: neighbor ratios are 1/2 or 2, so
    # |V| = |Delta u / u| <= 4 + 2*2 + 2*(1/2) = 9
    spec = CounterexampleSpec(R=14, margin=14)
    u, _ = build_counterexample(spec)
    for j1 in range(-8, 9):
        for j2 in range(-8, 9):
            assert abs(u.potential_value(j1, j2)) <= 9


def test_potential_sup_identical_across_R():
    out = potential_bound_scan((10, 12, 16), margin=16)
    assert out["identical_across_R"]
    assert 2.0 <= out["sup_float"] <= 16.0


def test_tail_certificate_scales_with_margin():
    small = tail_mass_bound(CounterexampleSpec(R=10, margin=10))
    big = tail_mass_bound(CounterexampleSpec(R=10, margin=60))
    assert big < small
    assert big < Fraction(1, 2**60)


def test_window_margin_validation():
    with pytest.raises(ValueError):
        CounterexampleSpec(R=20, margin=10)
    with pytest.raises(ValueError):
        CounterexampleSpec(R=6, margin=60)


def test_to_lattice_field_and_sidecar():
    spec = CounterexampleSpec(R=10, margin=10)
    u, _ = build_counterexample(spec)
    lf = u.to_lattice_field()
    assert lf[[0, 0]] == 1.0 + 0j
    assert lf[[0, spec.R]] == 0.0
    sidecar = u.exact_sidecar()
    key = f"0,{spec.R + 3}"  # repaired value 2^{-(R-4)}
    assert sidecar[key]["numerator"] == 1
    assert sidecar[key]["sign"] == 1
    assert sidecar[key]["log2_denominator"] == spec.R - 4
    key2 = f"1,{spec.R + 2}"  # repaired value -2^{-(R-3)}
    assert sidecar[key2]["sign"] == -1
    assert sidecar[key2]["log2_denominator"] == spec.R - 3
