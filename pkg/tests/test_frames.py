"""Frame conversions and the frozen conventions: roundtrips, J-invariance,
and the basic dictionary between Hermitian components and real tensors."""

import numpy as np
from numpy.testing import assert_allclose

from pcflab import frames


def test_hermitian_riemannian_roundtrip(rng):
    for _ in range(10):
        A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        G = A @ A.conj().T + 0.5 * np.eye(2)
        gR = frames.hermitian_to_riemannian(G)
        assert_allclose(gR, gR.T, atol=1e-14)
        assert_allclose(frames.J_STD.T @ gR @ frames.J_STD, gR, atol=1e-13)
        assert_allclose(frames.riemannian_to_hermitian(gR), G, atol=1e-13)


def test_flat_dictionary():
    # identity Hermitian components correspond to twice the Euclidean metric
    gR = frames.hermitian_to_riemannian(np.eye(2, dtype=complex))
    assert_allclose(gR, 2 * np.eye(4), atol=1e-15)
    omega = frames.herm_to_real2(np.eye(2, dtype=complex))
    expected = np.zeros((4, 4))
    expected[0, 1], expected[1, 0] = 2, -2
    expected[2, 3], expected[3, 2] = 2, -2
    assert_allclose(omega, expected, atol=1e-15)


def test_two_form_roundtrip(rng):
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    a = 0.5 * (A + A.conj().T)
    psi = frames.herm_to_real2(a)
    assert_allclose(psi, -psi.T, atol=1e-14)
    assert_allclose(frames.real2_to_herm(psi), a, atol=1e-14)


def test_kahler_form_pairing(rng):
    # omega(X, Y) = g(JX, Y) for the converted tensors
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    G = A @ A.conj().T + np.eye(2)
    gR = frames.hermitian_to_riemannian(G)
    omega = frames.herm_to_real2(G)
    assert_allclose(omega, frames.J_STD.T @ gR, atol=1e-13)


def test_cov3_conversion_roundtrip(rng):
    H = rng.normal(size=(4, 4, 4))
    Hc = frames.cov3_real_to_complex(H)
    back = frames.cov3_complex_to_real(Hc)
    assert_allclose(back.real, H, atol=1e-13)
    assert np.abs(back.imag).max() < 1e-13


def test_levi_civita_parity():
    eps = frames.LEVI_CIVITA_4
    assert eps[0, 1, 2, 3] == 1
    assert eps[1, 0, 2, 3] == -1
    # total antisymmetry
    assert np.abs(eps + np.swapaxes(eps, 0, 1)).max() == 0
    assert np.abs(eps + np.swapaxes(eps, 2, 3)).max() == 0
