"""Spectral measure: density, point masses, moments, and orthonormality."""

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

import specband as sb
from specband.measure import density
from conftest import random_operator


def test_laplacian_density_is_semicircle(laplacian_data):
    D = laplacian_data
    x = np.linspace(-1.9, 1.9, 41)
    got = density(D.monodromy, D.bands, x)
    expected = np.sqrt(4.0 - x * x) / (2.0 * np.pi)
    assert np.max(np.abs(got - expected)) < 1e-12
    assert D.measure.density(0.0) == pytest.approx(1.0 / np.pi, rel=1e-12)
    assert density(D.monodromy, D.bands, 2.0) == 0.0


def test_density_outside_spectrum(ssh_data):
    with pytest.raises(sb.OutsideSpectrum):
        density(ssh_data.monodromy, ssh_data.bands, 0.0)


def test_density_positive_inside_bands():
    J = random_operator(3, 3)
    D = sb.spectral_data(J)
    for lo, hi in D.bands.bands:
        x = np.linspace(lo + 1e-3, hi - 1e-3, 15)
        assert np.all(density(D.monodromy, D.bands, x) > 0.0)


def test_ssh_point_mass_values():
    assert sb.point_mass(sb.new_operator([1.0, 2.0], [0.0, 0.0]), 0.0) == pytest.approx(
        0.75, abs=1e-12
    )
    assert sb.point_mass(sb.new_operator([1.0, 3.0], [0.0, 0.0]), 0.0) == pytest.approx(
        8.0 / 9.0, abs=1e-12
    )


def test_point_mass_divergence_guard():
    with pytest.raises(sb.DivergentNormSum):
        sb.point_mass(sb.new_operator([2.0, 1.0], [0.0, 0.0]), 0.0)


def test_point_mass_matches_truncation_eigenvectors():
    # On a large truncation, the total |v_1|^2 carried by eigenvectors inside
    # the gap window equals the half-line point mass up to exponential error.
    for J, window in [
        (sb.new_operator([1.0, 2.0], [0.0, 0.0]), (-0.5, 0.5)),
        (random_operator(3, 3), None),
    ]:
        D = sb.spectral_data(J)
        if not D.eigenvalues:
            continue
        diag, off = sb.tridiag_bands(J, 500)
        for info in D.eigenvalues:
            lo, hi = D.bands.gaps[info.gap_index - 1]
            pad = 0.25 * (hi - lo)
            vals, vecs = eigh_tridiagonal(
                diag, off, select="v", select_range=(lo + 1e-9, hi - 1e-9)
            )
            near = np.abs(vals - info.value) < pad
            total = float(np.sum(np.abs(vecs[0, near]) ** 2))
            assert total == pytest.approx(info.weight, rel=1e-6)


def test_laplacian_catalan_moments(laplacian_data):
    S = laplacian_data.measure
    for k, expected in [(0, 1.0), (2, 1.0), (4, 2.0), (6, 5.0), (8, 14.0)]:
        assert sb.moment(S, k) == pytest.approx(expected, rel=1e-10)
    assert sb.moment(S, 3) == pytest.approx(0.0, abs=1e-10)


def test_moment_oracle_walk_counts(laplacian):
    assert sb.moment_oracle(laplacian, 0) == 1.0
    assert sb.moment_oracle(laplacian, 2) == 1.0
    assert sb.moment_oracle(laplacian, 4) == 2.0
    assert sb.moment_oracle(laplacian, 6) == 5.0


def test_moments_match_oracle_random():
    for seed, q in [(0, 1), (1, 2), (2, 3), (3, 4)]:
        J = random_operator(seed, q)
        S = sb.spectral_data(J).measure
        for k in range(21):
            ref = sb.moment_oracle(J, k)
            assert sb.moment(S, k) == pytest.approx(ref, rel=1e-8, abs=1e-8)


def test_moment_order_guard(laplacian_data):
    with pytest.raises(ValueError):
        sb.moment(laplacian_data.measure, -1)
    with pytest.raises(ValueError):
        sb.moment(laplacian_data.measure, 41)


def test_gram_matrix_orthonormal():
    for J in [
        sb.new_operator([1.0], [0.0]),
        sb.new_operator([1.0, 2.0], [0.0, 0.0]),
        random_operator(2, 3),
    ]:
        S = sb.spectral_data(J).measure
        gram = sb.gram_matrix(S, 25)
        assert np.max(np.abs(gram - np.eye(26))) < 1e-7


def test_total_mass_is_one():
    for J in [
        sb.new_operator([1.0], [0.0]),
        sb.new_operator([1.0, 2.0], [0.0, 0.0]),
        random_operator(0, 3),
        random_operator(1, 4),
    ]:
        S = sb.spectral_data(J).measure
        total = S.continuous_mass + sum(i.weight for i in S.point_masses)
        assert total == pytest.approx(1.0, abs=1e-10)


def test_spectral_measure_fills_weights(ssh_data):
    assert len(ssh_data.eigenvalues) == 1
    assert ssh_data.eigenvalues[0].weight == pytest.approx(0.75, abs=1e-10)
    assert ssh_data.measure.point_masses is ssh_data.eigenvalues


def test_phi_weight_vanishes_at_gapped_edges(ssh_data):
    S = ssh_data.measure
    for j in (1, 2):
        w = S.phi_weight(j, np.array([-np.pi, -np.pi / 2.0, 0.0]))
        assert w[0] == pytest.approx(0.0, abs=1e-12)
        assert w[2] == pytest.approx(0.0, abs=1e-12)
        assert w[1] > 0.0
