"""Real Riemannian tensor calculus on the periodic chart (spectral derivatives).

Operates on metric fields g_{ab} with shape (4, 4, grid).  This is the
machinery behind the Riemannian side of the flow identities: Ricci tensors,
Hessians, Lie derivatives, and torsion-square contractions.
"""

from __future__ import annotations

import numpy as np

from . import forms
from .grid import SpectralDeriv


def christoffel(gR, eng: SpectralDeriv, ginv=None):
    """Levi-Civita symbols Gamma^c_{ab}, shape (4, 4, 4, grid)."""
    if ginv is None:
        ginv, _ = forms.metric_aux(gR)
    dg = np.empty((4, 4, 4) + gR.shape[2:])
    fh = eng.fft(gR)
    for c in range(4):
        dg[c] = eng.ifft(eng.ik[c] * fh).real
    # Gamma_{ab,d} = (d_a g_{bd} + d_b g_{ad} - d_d g_{ab}) / 2
    low = 0.5 * (dg + np.moveaxis(dg, (0, 1, 2), (1, 0, 2))
                 - np.moveaxis(dg, (0, 1, 2), (2, 0, 1)))
    return np.einsum('cd...,abd...->cab...', ginv, low)


def ricci(gR, eng: SpectralDeriv, ginv=None, sq=None, gamma=None):
    """Ricci tensor R_{ab} of the Levi-Civita connection."""
    if ginv is None or sq is None:
        ginv, sq = forms.metric_aux(gR)
    if gamma is None:
        gamma = christoffel(gR, eng, ginv)
    logsq = np.log(sq)
    dlog = eng.dx_all(logsq).real            # Gamma^c_{cb} = d_b log sqrt(g)
    fh = eng.fft(logsq)
    hess_log = np.empty((4, 4) + gR.shape[2:])
    for a in range(4):
        for b in range(a, 4):
            hess_log[a, b] = eng.ifft(eng.ik[a] * eng.ik[b] * fh).real
            hess_log[b, a] = hess_log[a, b]
    div_gamma = np.zeros((4, 4) + gR.shape[2:])
    for c in range(4):
        gh = eng.fft(gamma[c])
        div_gamma += eng.ifft(eng.ik[c] * gh).real
    # R_{bc} = d_a Gamma^a_{bc} - d_b d_c log sqrt(g)
    #          + Gamma^a_{ae} Gamma^e_{bc} - Gamma^a_{be} Gamma^e_{ac}
    quad1 = np.einsum('e...,ebc...->bc...', dlog, gamma)
    quad2 = np.einsum('abe...,eac...->bc...', gamma, gamma)
    return div_gamma - hess_log + quad1 - quad2


def scalar_curvature(gR, eng, ginv=None, ric=None):
    if ginv is None:
        ginv, _ = forms.metric_aux(gR)
    if ric is None:
        ric = ricci(gR, eng, ginv)
    return np.einsum('ab...,ab...->...', ginv, ric)


def hessian_scalar(f, eng, gamma):
    """Covariant Hessian of a scalar: d_a d_b f - Gamma^c_{ab} d_c f."""
    df = eng.dx_all(f).real
    fh = eng.fft(f)
    out = np.empty((4, 4) + f.shape)
    for a in range(4):
        for b in range(a, 4):
            out[a, b] = eng.ifft(eng.ik[a] * eng.ik[b] * fh).real
            out[b, a] = out[a, b]
    return out - np.einsum('cab...,c...->ab...', gamma, df)


def laplace_beltrami(f, eng, ginv, sq):
    """(1/sqrt g) d_a (sqrt g g^{ab} d_b f)."""
    df = eng.dx_all(f)
    flux = np.einsum('ab...,b...->a...', ginv, df) * sq
    out = np.zeros_like(f, dtype=complex)
    for a in range(4):
        out += eng.dx(flux[a], a)
    return (out / sq).real if np.isrealobj(f) else out / sq


def lie_derivative_metric(X, gR, eng):
    """(L_X g)_{ab} = X^c d_c g_{ab} + g_{cb} d_a X^c + g_{ac} d_b X^c."""
    dg = np.empty((4, 4, 4) + gR.shape[2:])
    fh = eng.fft(gR)
    for c in range(4):
        dg[c] = eng.ifft(eng.ik[c] * fh).real
    dX = np.empty((4, 4) + gR.shape[2:])
    fx = eng.fft(X)
    for a in range(4):
        dX[a] = eng.ifft(eng.ik[a] * fx).real   # dX[a, c] = d_a X^c
    term1 = np.einsum('c...,cab...->ab...', X, dg)
    term2 = np.einsum('cb...,ac...->ab...', gR, dX)
    term3 = np.einsum('ac...,bc...->ab...', gR, dX)
    return term1 + term2 + term3


def h_square(Hc, ginv, chunk=1 << 16):
    """(H^2)_{ab} = H_{apq} H_{brs} g^{pr} g^{qs} from a compact 3-form."""
    grid_shape = Hc.shape[1:]
    P = int(np.prod(grid_shape))
    Hf = Hc.reshape(4, P)
    gi = ginv.reshape(4, 4, P)
    out = np.zeros((4, 4, P))
    for s in range(0, P, chunk):
        sl = slice(s, min(s + chunk, P))
        Hfull = forms.full3_from_compact(Hf[:, sl])
        out[:, :, sl] = np.einsum('apq...,brs...,pr...,qs...->ab...',
                                  Hfull, Hfull, gi[..., sl], gi[..., sl])
    return out.reshape((4, 4) + grid_shape)


def h_norm2(Hc, ginv, chunk=1 << 16):
    """Full contraction H_{pqr} H^{pqr} (six times the sum over p<q<r)."""
    hsq = h_square(Hc, ginv, chunk)
    return np.einsum('ab...,ab...->...', ginv, hsq)
