"""Exterior calculus: d^2 = 0, Hodge star involution signs, codifferential
adjointness, and the wedge pairing, all with a variable metric."""

import numpy as np
from numpy.testing import assert_allclose

from pcflab import forms, sampling
from pcflab.frames import hermitian_to_riemannian
from pcflab.grid import deriv_engine


def _random_metric_field(grid, rng):
    hf, _, _ = sampling.random_pluriclosed_metric(grid, rng, amplitude=0.3,
                                                  kmax=2, nmodes=6)
    return hermitian_to_riemannian(hf.G)


def _smooth_scalar(grid, rng):
    return sampling.random_real_scalar(grid, rng, amplitude=0.5, kmax=2)


def test_d_squared_zero(grid8, rng):
    eng = deriv_engine(grid8)
    f = _smooth_scalar(grid8, rng)
    df = np.real(eng.dx_all(f))
    ddf = forms.d1(df, eng)
    assert np.abs(ddf).max() < 1e-12
    alpha = np.stack([_smooth_scalar(grid8, rng) for _ in range(4)])
    dda = forms.d2_compact(forms.d1(alpha, eng), eng)
    assert np.abs(dda).max() < 1e-11


def test_star_involution_signs(grid8, rng):
    g = _random_metric_field(grid8, rng)
    ginv, sq = forms.metric_aux(g)
    theta = np.stack([_smooth_scalar(grid8, rng) for _ in range(4)])
    ss = forms.star3(forms.star1(theta, ginv, sq), ginv, sq)
    assert_allclose(np.real(ss), -theta, atol=1e-10)   # k=1: ** = -1
    beta = np.zeros((4, 4) + grid8.shape)
    for i in range(4):
        for j in range(i + 1, 4):
            beta[i, j] = _smooth_scalar(grid8, rng)
            beta[j, i] = -beta[i, j]
    ss2 = forms.star2(forms.star2(beta, ginv, sq), ginv, sq)
    assert_allclose(ss2, beta, atol=1e-10)             # k=2: ** = +1


def test_codifferential_adjointness(grid8, rng):
    g = _random_metric_field(grid8, rng)
    eng = deriv_engine(grid8)
    ginv, sq = forms.metric_aux(g)
    vol = grid8.cell_volume
    a1 = np.stack([_smooth_scalar(grid8, rng) for _ in range(4)])
    b2 = np.zeros((4, 4) + grid8.shape)
    for i in range(4):
        for j in range(i + 1, 4):
            b2[i, j] = _smooth_scalar(grid8, rng)
            b2[j, i] = -b2[i, j]
    lhs = forms.form_inner(2, forms.d1(a1, eng), b2, ginv, sq).sum() * vol
    rhs = forms.form_inner(1, a1, np.real(forms.codiff2(b2, eng, ginv, sq)),
                           ginv, sq).sum() * vol
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))

    H3 = np.stack([_smooth_scalar(grid8, rng) for _ in range(4)])
    lhs = forms.form_inner(3, forms.d2_compact(b2, eng), H3, ginv, sq).sum() * vol
    rhs = forms.form_inner(2, b2, np.real(forms.codiff3(H3, eng, ginv, sq)),
                           ginv, sq).sum() * vol
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_hodge_laplacian_constant_forms(grid8):
    # harmonic (constant-coefficient) 3-forms are annihilated
    eng = deriv_engine(grid8)
    g = np.zeros((4, 4) + grid8.shape)
    for a in range(4):
        g[a, a] = 1.0
    ginv, sq = forms.metric_aux(g)
    H = np.zeros((4,) + grid8.shape)
    H[0] = 1.3
    out = forms.hodge_laplacian3(H, eng, ginv, sq)
    assert np.abs(out).max() < 1e-12


def test_wedge_top_pairing():
    alpha = np.zeros((4, 4))
    alpha[0, 1], alpha[1, 0] = 1, -1
    alpha[2, 3], alpha[3, 2] = 1, -1
    assert forms.wedge22_top(alpha, alpha) == 2.0


def test_compact_full_roundtrip(rng):
    Hc = rng.normal(size=(4, 3, 3))
    full = forms.full3_from_compact(Hc)
    assert_allclose(forms.compact3_from_full(full), Hc)
    # full array is totally antisymmetric
    assert_allclose(full, -np.swapaxes(full, 0, 1))
    assert_allclose(full, -np.swapaxes(full, 1, 2))
