import math

import numpy as np
import pytest

from carleman.bessel import bessel_j
from carleman.errors import ZeroObservationError
from carleman.evolution import (EvolutionConfig, Stepper, evolve,
                                laplacian_matrix, make_decaying_datum,
                                normalize_observation, observation_integral)
from carleman.lattice import LatticeField, LatticeWindow, Potential


def free_config(M=24, dt=2e-3, store_every=1, d=1):
    window = LatticeWindow(d, M)
    return window, EvolutionConfig(dt=dt, T=1.0, window=window,
                                   potential=Potential.zero(window),
                                   store_every=store_every)


def test_norm_conserved_free_evolution():
    window, cfg = free_config()
    traj = evolve(LatticeField.delta(window), cfg)
    assert traj.norm_drift() < 1e-10


def test_norm_conserved_real_potential_random_datum():
    window = LatticeWindow(1, 16)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(window.shape) + 1j * rng.standard_normal(window.shape)
    vals[:2] = vals[-2:] = 0.0
    u0 = LatticeField.from_values(window, vals / np.linalg.norm(vals))
    cfg = EvolutionConfig(dt=2e-3, T=1.0, window=window,
                          potential=Potential.alternating(window))
    traj = evolve(u0, cfg)
    assert traj.norm_drift() < 1e-10


def test_fundamental_solution_matches_bessel_j():
    # exact free solution: u_j(t) = e^{-2it} i^j J_j(2t); convention fixed by
    # the small-t oracle (see test_small_t_phase_convention below).
    window, cfg = free_config(M=40, dt=5e-4)
    traj = evolve(LatticeField.delta(window), cfg)
    final = traj.values[-1]
    j = window.axes
    exact = np.exp(-2.0j) * (1j) ** j * np.array([bessel_j(int(jj), 2.0) for jj in j])
    sel = np.abs(j) <= 20
    dev = np.max(np.abs(final - exact)[sel])
    assert dev < 1e-6


def test_small_t_phase_convention():
    # one CN step from delta_0: u_{+-1}(dt) ~ i dt (the semigroup Taylor
    # series), which selects i^{j} J_j over the conjugate conventions.
    window, cfg = free_config(M=8, dt=1e-3)
    stepper = Stepper(window, cfg.potential, cfg.dt)
    u = LatticeField.delta(window).values.ravel().astype(complex)
    u1 = stepper.apply(u).reshape(window.shape)
    neighbor = u1[window.index_of([1])]
    assert neighbor.imag > 0 and abs(neighbor - 1j * cfg.dt) < 5e-6
    # and the exact formula agrees at first order: i^1 J_1(2 dt) ~ i dt
    assert abs(1j * bessel_j(1, 2 * cfg.dt) - 1j * cfg.dt) < 1e-8


def test_eigenvector_pure_phase_rotation():
    # Dirichlet (zero-padded) eigenvectors of the 1-d window Laplacian:
    # v_j = sin(p pi (j + M + 1)/(2M + 2)), eigenvalue 2 cos(p pi/(2M+2)) - 2
    window, cfg = free_config(M=12, dt=1e-3)
    n = 2 * window.M + 1
    p = 3
    v = np.sin(p * math.pi * np.arange(1, n + 1) / (n + 1)).astype(complex)
    v /= np.linalg.norm(v)
    traj = evolve(LatticeField.from_values(window, v), cfg)
    mags = np.abs(traj.values[-1])
    assert np.max(np.abs(mags - np.abs(v))) < 1e-10
    lam = 2.0 * math.cos(p * math.pi / (n + 1)) - 2.0
    cn_phase_step = np.angle((1 + 0.5j * cfg.dt * lam) / (1 - 0.5j * cfg.dt * lam))
    expected = v * np.exp(1j * cn_phase_step * cfg.n_steps)
    assert np.max(np.abs(traj.values[-1] - expected)) < 1e-9


def test_time_reversal():
    window, cfg = free_config(M=16, dt=2e-3)
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(window.shape) + 1j * rng.standard_normal(window.shape)
    vals[:3] = vals[-3:] = 0.0
    u0 = vals / np.linalg.norm(vals)
    stepper = Stepper(window, cfg.potential, cfg.dt)
    u = u0.copy()
    for _ in range(cfg.n_steps):
        u = stepper.apply(u)
    for _ in range(cfg.n_steps):
        u = stepper.apply_inverse(u)
    assert np.max(np.abs(u - u0)) < 1e-8


def test_second_order_convergence():
    # each dt against ITS dt/4 reference: defect ratio in [3.6, 4.4]
    window = LatticeWindow(1, 12)
    u0 = LatticeField.delta(window)

    def final(dt):
        cfg = EvolutionConfig(dt=dt, T=0.48, window=window, potential=Potential.zero(window))
        return evolve(u0, cfg).values[-1]

    defect_coarse = np.linalg.norm(final(8e-3) - final(2e-3))
    defect_fine = np.linalg.norm(final(4e-3) - final(1e-3))
    ratio = defect_coarse / defect_fine
    assert 3.6 <= ratio <= 4.4


def test_decaying_datum_profiles():
    window = LatticeWindow(1, 30)
    delta = make_decaying_datum(window, ("delta",))
    assert delta[[0]] == 1.0
    bes = make_decaying_datum(window, ("bessel_like", 1.0))
    assert bes.norm_sq() == pytest.approx(1.0, rel=1e-12)
    # origin amplitude equals the normalization constant (weight 1 at origin)
    j = window.axes
    r = np.abs(j).astype(float)
    raw = np.exp(-1.0 * r * np.log(r + 1.0))
    assert bes[[0]].real == pytest.approx(1.0 / np.linalg.norm(raw), rel=1e-12)


def test_bessel_like_tail_mass_matches_direct_sum():
    # extended-precision tail oracle: sum of e^{-2 mu |j| log(|j|+1)} beyond 20
    import mpmath

    mpmath.mp.dps = 30
    window = LatticeWindow(1, 60)
    mu = 1.0
    bes = make_decaying_datum(window, ("bessel_like", mu))
    j = window.axes
    tail_ours = float(np.sum(np.abs(bes.values[np.abs(j) > 20]) ** 2))
    norm_sq = mpmath.mpf(1)  # |j|=0 term
    tail = mpmath.mpf(0)
    for jj in range(1, 2000):
        term = 2 * mpmath.e ** (-2 * mu * jj * mpmath.log(jj + 1))
        norm_sq += term
        if jj > 20:
            tail += term
    oracle = float(tail / norm_sq)
    assert tail_ours == pytest.approx(oracle, rel=1e-8)


def test_observation_normalization():
    window, cfg = free_config(M=24, dt=1e-3)
    traj = evolve(LatticeField.delta(window), cfg)
    scaled = normalize_observation(traj)
    assert observation_integral(scaled) == pytest.approx(1.0, rel=1e-12)
    again = normalize_observation(scaled)
    assert np.max(np.abs(again.values - scaled.values)) < 1e-12


def test_observation_scaling_homogeneity():
    window, cfg = free_config(M=16, dt=2e-3)
    traj = evolve(LatticeField.delta(window), cfg)
    assert observation_integral(traj.scaled(2.0)) == pytest.approx(
        4.0 * observation_integral(traj), rel=1e-12)


def test_alternative_observation_reading():
    window, cfg = free_config(M=16, dt=2e-3)
    traj = evolve(LatticeField.delta(window), cfg)
    assert observation_integral(traj, mode="initial_norm") == pytest.approx(1.0, rel=1e-12)


def test_zero_observation_raises():
    window, cfg = free_config(M=16, dt=2e-3)
    traj = evolve(LatticeField.delta(window), cfg)
    dead = traj.scaled(1.0)
    dead.values = np.zeros_like(dead.values)
    with pytest.raises(ZeroObservationError):
        normalize_observation(dead)


def test_laplacian_matrix_matches_pointwise_operator():
    from carleman.lattice import discrete_laplacian

    window = LatticeWindow(2, 5)
    rng = np.random.default_rng(2)
    vals = rng.standard_normal(window.shape) + 1j * rng.standard_normal(window.shape)
    u = LatticeField.from_values(window, vals)
    direct = discrete_laplacian(u).values
    via_matrix = (laplacian_matrix(window) @ vals.ravel()).reshape(window.shape)
    assert np.max(np.abs(direct - via_matrix)) < 1e-14


def test_store_every_thins_snapshots():
    window, cfg = free_config(M=12, dt=2e-3, store_every=10)
    traj = evolve(LatticeField.delta(window), cfg)
    assert traj.n_stored == 51
    assert traj.times[1] - traj.times[0] == pytest.approx(0.02, rel=1e-12)
