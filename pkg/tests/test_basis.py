import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import sph_harm_y

from ladderops import (
    BasisSpec,
    CoeffVector,
    DomainError,
    ModeIndex,
    analyze,
    build_grid,
    eval_harmonic,
    mode_index,
    synthesize,
)
from ladderops.basis import gram_matrix


@pytest.mark.parametrize("mode,expected", [((0, 0), 0), ((1, -1), 1), ((2, 2), 8)])
def test_mode_index_examples(mode, expected):
    assert mode_index(BasisSpec(2), mode) == expected


@pytest.mark.parametrize("mode", [(3, 0), (1, 2), (-1, 0), (2, -3)])
def test_mode_index_rejects_invalid(mode):
    with pytest.raises(DomainError, match=rf"l={mode[0]}, m={mode[1]}"):
        mode_index(BasisSpec(2), mode)


@given(st.integers(0, 20))
def test_mode_index_is_bijective(l_max):
    basis = BasisSpec(l_max)
    idx = [mode_index(basis, md) for md in basis.modes]
    assert idx == list(range((l_max + 1) ** 2))
    assert list(basis.modes) == sorted(basis.modes)


def test_eval_harmonic_examples():
    assert eval_harmonic((0, 0), 1.3, -0.4) == pytest.approx(0.28209479177387814, abs=1e-15)
    assert eval_harmonic((1, 0), 0.0, 0.0) == pytest.approx(np.sqrt(3 / (4 * np.pi)), abs=1e-15)
    assert eval_harmonic((1, 1), np.pi / 2, 0.0) == pytest.approx(-np.sqrt(3 / (8 * np.pi)), abs=1e-15)
    assert eval_harmonic((1, 1), np.pi / 2, 0.0) == pytest.approx(-0.34549415, abs=1e-8)


def test_eval_harmonic_matches_scipy():
    # independent implementation; scipy also uses Condon-Shortley
    rng = np.random.default_rng(3)
    theta = rng.uniform(0, np.pi, 40)
    phi = rng.uniform(0, 2 * np.pi, 40)
    for l in range(13):
        for m in range(-l, l + 1):
            ours = eval_harmonic((l, m), theta, phi)
            ref = sph_harm_y(l, m, theta, phi)
            np.testing.assert_allclose(ours, ref, atol=1e-13, rtol=0)


def test_eval_harmonic_pole_safe():
    for l in range(6):
        for m in range(-l, l + 1):
            north = eval_harmonic((l, m), 0.0, 0.7)
            south = eval_harmonic((l, m), np.pi, 0.7)
            if m == 0:
                assert north == pytest.approx(np.sqrt((2 * l + 1) / (4 * np.pi)))
                assert south == pytest.approx((-1) ** l * np.sqrt((2 * l + 1) / (4 * np.pi)))
            else:
                assert abs(north) == 0 and abs(south) < 1e-15


def test_eval_harmonic_errors():
    with pytest.raises(DomainError):
        eval_harmonic((1, 2), 0.1, 0.1)
    with pytest.raises(DomainError):
        eval_harmonic((1, 0), -0.1, 0.1)


@given(st.integers(0, 8), st.floats(0, np.pi), st.floats(-10, 10))
def test_conjugation_symmetry_pointwise(l, theta, phi):
    for m in range(l + 1):
        lhs = eval_harmonic((l, -m), theta, phi)
        rhs = (-1) ** m * np.conj(eval_harmonic((l, m), theta, phi))
        assert abs(lhs - rhs) < 1e-13


def test_build_grid_minimum_sizes():
    grid = build_grid(BasisSpec(0))
    assert (grid.n_theta, grid.n_phi) == (2, 3)
    assert grid.theta_weights.sum() == pytest.approx(2.0, abs=1e-15)


def test_build_grid_exact_second_moment():
    grid = build_grid(BasisSpec(2))
    assert np.sum(grid.theta_weights * np.cos(grid.theta_nodes) ** 2) == pytest.approx(2 / 3, abs=1e-15)


@pytest.mark.parametrize("l_max", [0, 1, 4, 8, 16])
def test_grid_orthonormality(l_max):
    grid = build_grid(BasisSpec(l_max))
    assert grid.n_theta == l_max + 2 and grid.n_phi == 2 * l_max + 3
    G = gram_matrix(grid)
    assert np.abs(G - np.eye(G.shape[0])).max() < 1e-12
    assert 0 < grid.theta_nodes.min() and grid.theta_nodes.max() < np.pi


def test_grid_conjugation_symmetry_on_nodes(grids):
    basis, grid = grids(8)
    T = grid.harmonic_table
    for l, m in basis.modes:
        if m > 0:
            a = T[mode_index(basis, (l, -m))]
            b = (-1) ** m * np.conj(T[mode_index(basis, (l, m))])
            assert np.abs(a - b).max() < 1e-13


def test_grid_is_deterministic():
    a, b = build_grid(BasisSpec(6)), build_grid(BasisSpec(6))
    for name in ("theta_nodes", "theta_weights", "phi_nodes", "harmonic_table"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_synthesize_examples(grids):
    basis, grid = grids(3)
    s = synthesize(CoeffVector.unit(basis, (0, 0)), grid)
    np.testing.assert_allclose(s, 1 / np.sqrt(4 * np.pi), atol=1e-15)
    assert not synthesize(CoeffVector.zeros(basis), grid).any()
    s10 = synthesize(CoeffVector.unit(basis, (1, 0)), grid)
    direct = eval_harmonic((1, 0), grid.theta_nodes[:, None], grid.phi_nodes[None, :])
    assert np.abs(s10 - direct).max() < 1e-14


def test_synthesize_basis_mismatch(grids):
    _, grid = grids(3)
    with pytest.raises(DomainError):
        synthesize(CoeffVector.zeros(BasisSpec(2)), grid)


def test_analyze_examples(grids):
    basis, grid = grids(4)
    th, ph = grid.theta_nodes[:, None], grid.phi_nodes[None, :]

    c = analyze(synthesize(CoeffVector.unit(basis, (2, 1)), grid), grid, basis)
    assert np.abs(c.amplitudes - CoeffVector.unit(basis, (2, 1)).amplitudes).max() < 1e-12

    # sin(theta) e^{i phi} normalized over the sphere: integral of sin^2 is 8 pi / 3
    f = np.sin(th) * np.exp(1j * ph) / np.sqrt(8 * np.pi / 3)
    c = analyze(f, grid, basis)
    assert abs(c[(1, 1)] - (-1.0)) < 1e-12
    others = np.delete(c.amplitudes, mode_index(basis, (1, 1)))
    assert np.abs(others).max() < 1e-12

    c = analyze(np.cos(th) * np.ones_like(ph) / np.sqrt(4 * np.pi), grid, basis)
    assert abs(c[(1, 0)] - 1 / np.sqrt(3)) < 1e-12


def test_analyze_dimension_mismatch(grids):
    basis, grid = grids(2)
    with pytest.raises(DomainError):
        analyze(np.zeros((3, 3)), grid, basis)


def test_round_trip_random_vectors(grids):
    basis, grid = grids(8)
    rng = np.random.default_rng(12345)
    for _ in range(100):
        amps = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
        c = CoeffVector(basis, amps)
        back = analyze(synthesize(c, grid), grid, basis)
        assert np.abs(back.amplitudes - amps).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_round_trip_property(l_max, seed):
    basis = BasisSpec(l_max)
    grid = build_grid(basis)
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
    back = analyze(synthesize(CoeffVector(basis, amps), grid), grid, basis)
    assert np.abs(back.amplitudes - amps).max() < 1e-12 * max(1.0, np.abs(amps).max())


def test_coeffvector_contract():
    basis = BasisSpec(2)
    with pytest.raises(DomainError):
        CoeffVector(basis, np.zeros(4))
    u = CoeffVector.unit(basis, (1, 1))
    assert u.is_unit() and u[(1, 1)] == 1
    v = CoeffVector(basis, 1j * u.amplitudes)
    assert u.inner(v) == 1j  # conjugate-linear on the left
    with pytest.raises(DomainError):
        CoeffVector.zeros(basis).normalized()
    assert ModeIndex(2, -3).is_valid() is False
