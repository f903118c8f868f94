import math

import numpy as np
import pytest

from carleman.logscalar import LogScalar
from carleman.profiles import CutoffSet, TimeProfile, WeightSpec, weight_at


def test_paper_phi_plateaus_exact():
    phi = TimeProfile.paper()
    for t in (0.0, 0.1, 0.25, 0.75, 0.9, 1.0):
        assert float(phi.value(t)) == 0.0
    for t in (0.375, 0.5, 0.625):
        assert float(phi.value(t)) == 3.0
    t = np.linspace(0, 1, 2001)
    v = phi.value(t)
    assert np.all(v >= 0.0) and np.all(v <= 3.0)


def test_paper_phi_derivatives_vanish_on_plateaus():
    phi = TimeProfile.paper()
    for t in (0.1, 0.4, 0.5, 0.6, 0.9):
        assert float(phi.d1(t)) == 0.0
        assert float(phi.d2(t)) == 0.0


def test_paper_phi_c2_smooth_numerically():
    phi = TimeProfile.paper()
    t = np.linspace(0.2501, 0.3749, 400)
    h = 1e-6
    num_d1 = (phi.value(t + h) - phi.value(t - h)) / (2 * h)
    assert np.max(np.abs(num_d1 - phi.d1(t))) < 1e-4 * max(1.0, phi.sup_d1)
    num_d2 = (phi.d1(t + h) - phi.d1(t - h)) / (2 * h)
    assert np.max(np.abs(num_d2 - phi.d2(t))) < 1e-3 * max(1.0, phi.sup_d2)


def test_sup_norms_are_attained_suprema():
    phi = TimeProfile.paper()
    t = np.linspace(0.0, 1.0, 200_001)
    grid_d1 = float(np.max(np.abs(phi.d1(t))))
    grid_d2 = float(np.max(np.abs(phi.d2(t))))
    assert phi.sup_d1 >= grid_d1 - 1e-9 * grid_d1
    assert phi.sup_d1 == pytest.approx(grid_d1, rel=1e-6)
    assert phi.sup_d2 >= grid_d2 - 1e-6 * grid_d2
    assert phi.sup_d2 == pytest.approx(grid_d2, rel=1e-4)


def test_phi_d1_known_peak():
    # transitions are 3 h(8(t-1/4)) with sup h' = 2 at the midpoint, so
    # sup phi' = 3 * 8 * 2 = 48
    phi = TimeProfile.paper()
    assert phi.sup_d1 == pytest.approx(48.0, rel=1e-10)


def test_constant_and_zero_profiles():
    for prof, val in ((TimeProfile.zero(), 0.0), (TimeProfile.constant(3.0), 3.0)):
        t = np.linspace(0, 1, 11)
        assert np.all(prof.value(t) == val)
        assert np.all(prof.d1(t) == 0.0)
        assert prof.sup_d1 == 0.0 and prof.sup_d2 == 0.0


def test_weight_at_examples():
    spec = WeightSpec(alpha=7.0, R=4.0, phi=TimeProfile.zero(), d=2)
    assert weight_at([0, 0], 0.5, spec).log_mag == 0.0
    spec0 = WeightSpec(alpha=0.0, R=4.0, phi=TimeProfile.paper(), d=2)
    assert weight_at([3, -2], 0.5, spec0).log_mag == 0.0
    # j = (R, 0), phi = 3 at plateau: exponent alpha (1+3)^2 = 16 alpha
    spec3 = WeightSpec(alpha=5.5, R=4.0, phi=TimeProfile.constant(3.0), d=2)
    assert weight_at([4, 0], 0.5, spec3).log_mag == pytest.approx(16.0 * 5.5, rel=1e-14)


def test_weight_spec_alpha_rule_flag():
    phi = TimeProfile.zero()
    on_rule = WeightSpec.from_rule(10.0, phi, 1, c_rule=2.0)
    assert on_rule.meets_alpha_rule
    off_rule = WeightSpec(alpha=1.0, R=10.0, phi=phi, d=1, c_rule=2.0)
    assert not off_rule.meets_alpha_rule


def test_cutoff_plateaus():
    cut = CutoffSet(R=9.0)
    assert float(cut.theta(5.0)) == 1.0 and float(cut.theta(8.0)) == 1.0
    assert float(cut.theta(9.0)) == 0.0 and float(cut.theta(12.0)) == 0.0
    mid = float(cut.theta(8.5))
    assert 0.0 < mid < 1.0
    assert float(cut.mu(0.5)) == 0.0 and float(cut.mu(1.0)) == 0.0
    assert float(cut.mu(2.0)) == 1.0 and float(cut.mu(5.0)) == 1.0
    assert 0.0 < float(cut.mu(1.5)) < 1.0


def test_cutoff_transitions_smooth():
    cut = CutoffSet(R=9.0)
    r = np.linspace(8.0001, 8.9999, 300)
    h = 1e-6
    num = (cut.theta(r + h) - cut.theta(r - h)) / (2 * h)
    # the profile is monotone decreasing through the transition
    assert np.all(num <= 1e-9)
