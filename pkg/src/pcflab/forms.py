"""Exterior calculus on the periodic chart: d, wedge, Hodge star, codifferential.

Forms are covariant component arrays in the real coordinate frame with grid
axes last.  2-forms are stored full (4, 4, ...); 3-forms are stored compactly
over the ordered triples TRIPLES = [(0,1,2), (0,1,3), (0,2,3), (1,2,3)].
The Hodge star uses the orientation dx1^dx2^dx3^dx4 > 0, which is the complex
orientation of the chart.
"""

from __future__ import annotations

import numpy as np

from .frames import LEVI_CIVITA_4
from .grid import SpectralDeriv

TRIPLES = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
# complementary index and sign: eps[t] = LeviCivita(a, b, c, comp) for (a,b,c)=TRIPLES[t]
TRIPLE_COMPLEMENT = [3, 2, 1, 0]
TRIPLE_EPS = [LEVI_CIVITA_4[t + (c,)] for t, c in zip(TRIPLES, TRIPLE_COMPLEMENT)]


def full3_from_compact(Hc):
    """Expand compact 3-form components (4, ...) to a full antisymmetric array."""
    out = np.zeros((4, 4, 4) + Hc.shape[1:], dtype=Hc.dtype)
    for t, (a, b, c) in enumerate(TRIPLES):
        v = Hc[t]
        out[a, b, c] = v
        out[b, c, a] = v
        out[c, a, b] = v
        out[b, a, c] = -v
        out[a, c, b] = -v
        out[c, b, a] = -v
    return out


def compact3_from_full(H):
    return np.stack([H[t] for t in TRIPLES])


def d1(alpha, eng: SpectralDeriv):
    """Exterior derivative of a 1-form: (d a)_{ab} = da_b/dx_a - da_a/dx_b."""
    da = np.stack([eng.dx_all(alpha[b]) for b in range(4)], axis=1)  # da[a, b]
    return da - np.swapaxes(da, 0, 1)


def d2_compact(beta, eng: SpectralDeriv):
    """d of a full 2-form, returned compactly over TRIPLES."""
    db = {}
    for b in range(4):
        for c in range(b + 1, 4):
            db[(b, c)] = eng.dx_all(beta[b, c])
    out = []
    for (a, b, c) in TRIPLES:
        out.append(db[(b, c)][a] - db[(a, c)][b] + db[(a, b)][c])
    return np.stack(out)


def d3_top(Hc, eng: SpectralDeriv):
    """Top (dx1234) component of d applied to a compact 3-form."""
    # (dH)_{1234} = d1 H_{234} - d2 H_{134} + d3 H_{124} - d4 H_{123}
    return (eng.dx(Hc[3], 0) - eng.dx(Hc[2], 1)
            + eng.dx(Hc[1], 2) - eng.dx(Hc[0], 3))


def jrot3_std_compact(Hc):
    """Pullback of a compact 3-form by the standard J: H'(X,Y,Z)=H(JX,JY,JZ)."""
    return np.stack([Hc[1], -Hc[0], Hc[3], -Hc[2]])


def metric_aux(gR):
    """Pointwise inverse and sqrt-determinant of a metric field (4, 4, ...)."""
    gm = np.moveaxis(gR, (0, 1), (-2, -1))
    ginv = np.moveaxis(np.linalg.inv(gm), (-2, -1), (0, 1))
    det = np.linalg.det(gm)
    return ginv, np.sqrt(det)


def star1(alpha, ginv, sq):
    """Hodge star of a 1-form; returns a compact 3-form.

    (*a)_{bcd} = sqrt(g) eps_{e b c d} a^e; per output triple only the
    complementary index e contributes.
    """
    up = np.einsum('ab...,b...->a...', ginv, alpha)
    out = []
    for t, (b, c, d) in enumerate(TRIPLES):
        e = TRIPLE_COMPLEMENT[t]
        out.append(LEVI_CIVITA_4[e, b, c, d] * sq * up[e])
    return np.stack(out)


def star2(beta, ginv, sq):
    """Hodge star of a full 2-form, returns a full 2-form."""
    up = np.einsum('ac...,bd...,cd...->ab...', ginv, ginv, beta)
    return 0.5 * sq * np.einsum('abcd,ab...->cd...', LEVI_CIVITA_4, up)


def star3(Hc, ginv, sq, chunk=1 << 16):
    """Hodge star of a compact 3-form; returns a 1-form (4, ...).

    (*H)_d = (1/6) sqrt(g) eps_{abcd} H^{abc}.  Processed in grid chunks to
    bound memory on large grids.
    """
    grid_shape = Hc.shape[1:]
    P = int(np.prod(grid_shape))
    Hf = Hc.reshape(4, P)
    gi = ginv.reshape(4, 4, P)
    sqf = sq.reshape(P)
    out = np.zeros((4, P), dtype=Hc.dtype)
    for s in range(0, P, chunk):
        sl = slice(s, min(s + chunk, P))
        Hfull = full3_from_compact(Hf[:, sl])
        up = np.einsum('ax...,by...,cz...,xyz...->abc...',
                       gi[..., sl], gi[..., sl], gi[..., sl], Hfull)
        out[:, sl] = (1.0 / 6.0) * sqf[sl] * np.einsum('abcd,abc...->d...',
                                                       LEVI_CIVITA_4, up)
    return out.reshape((4,) + grid_shape)


def star4_top(top, sq):
    """Star of a 4-form given by its dx1234 component: a scalar field."""
    return top / sq


def star0(f, sq):
    """Star of a scalar: the dx1234 component of f * vol."""
    return f * sq


def codiff3(Hc, eng, ginv, sq):
    """d* on a compact 3-form -> full 2-form (d* = -*d* on all degrees here)."""
    a = star3(Hc, ginv, sq)
    da = d1(a, eng)
    return -star2(da, ginv, sq)


def codiff2(beta, eng, ginv, sq):
    """d* on a full 2-form -> 1-form."""
    sb = star2(beta, ginv, sq)
    dsb = d2_compact(sb, eng)
    return -star1_inv3(dsb, ginv, sq)


def star1_inv3(Hc, ginv, sq):
    """Hodge star of a compact 3-form -> 1-form (alias of star3)."""
    return star3(Hc, ginv, sq)


def codiff4_top(top, eng, ginv, sq):
    """d* of a 4-form (top component) -> compact 3-form."""
    f = star4_top(top, sq)
    df = eng.dx_all(f)
    return -star1(df, ginv, sq)


def hodge_laplacian3(Hc, eng, ginv, sq):
    """Analyst's Hodge Laplacian -(d d* + d* d) on a compact 3-form."""
    ddstar = d2_compact(codiff3(Hc, eng, ginv, sq), eng)
    dtop = d3_top(Hc, eng)
    dstard = codiff4_top(dtop, eng, ginv, sq)
    return -(ddstar + dstard)


def wedge22_top(alpha, beta):
    """dx1234 component of the wedge of two full 2-forms."""
    return (alpha[0, 1] * beta[2, 3] - alpha[0, 2] * beta[1, 3]
            + alpha[0, 3] * beta[1, 2] + alpha[1, 2] * beta[0, 3]
            - alpha[1, 3] * beta[0, 2] + alpha[2, 3] * beta[0, 1])


def form_inner(k, a, b, ginv, sq):
    """Pointwise metric inner product density <a, b> sqrt(g) for k-forms."""
    if k == 0:
        return a * b * sq
    if k == 1:
        return np.einsum('ab...,a...,b...->...', ginv, a, b) * sq
    if k == 2:
        up = np.einsum('ac...,bd...,cd...->ab...', ginv, ginv, b)
        return 0.5 * np.einsum('ab...,ab...->...', a, up) * sq
    if k == 3:
        af = full3_from_compact(a)
        bf = full3_from_compact(b)
        up = np.einsum('ax...,by...,cz...,xyz...->abc...', ginv, ginv, ginv, bf)
        return (1.0 / 6.0) * np.einsum('abc...,abc...->...', af, up) * sq
    raise ValueError(f"unsupported degree {k}")
