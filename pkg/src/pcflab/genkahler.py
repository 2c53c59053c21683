"""Generalized Kaehler diagnostics, the commuting-case scalar flow, and
one-step Hamiltonian deformations in the nondegenerate case.

A generalized Kaehler triple (g, I, J) carries the Poisson bivector
sigma = g^{-1}[I, J]/2 and the angle function p = tr(IJ)/4.  In the
commuting case ([I, J] = 0 with I != +-J) the flow reduces to a scalar
equation for a potential on the product torus T2+ x T2-, mixing a concave
and a convex Monge-Ampere operator; consistency with the tensor flow is
checked through the chart engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import chart, forms
from .errors import DomainError
from .frames import J_STD
from .grid import ChartGrid, deriv_engine

# quaternion-like second complex structure on the flat chart (I J = -J I)
J_QUAT = np.array([
    [0., 0., -1., 0.],
    [0., 0., 0., 1.],
    [1., 0., 0., 0.],
    [0., -1., 0., 0.],
])

# commuting partner: +standard on the first torus factor, -standard on the second
J_SPLIT = np.array([
    [0., -1., 0., 0.],
    [1., 0., 0., 0.],
    [0., 0., 0., 1.],
    [0., 0., -1., 0.],
])


def _as_field(K, grid):
    if K.ndim == 2:
        return np.broadcast_to(K[..., None, None, None, None],
                               (4, 4) + grid.shape)
    return K


@dataclass
class GKTriple:
    """Riemannian metric with two compatible complex structures."""

    g: np.ndarray    # (4, 4, grid) or constant (4, 4)
    I: np.ndarray
    J: np.ndarray
    grid: ChartGrid

    def fields(self):
        return (_as_field(self.g, self.grid), _as_field(self.I, self.grid),
                _as_field(self.J, self.grid))

    def validate(self, tol=1e-8):
        g, I, J = self.fields()
        eye = np.eye(4)[(...,) + (None,) * 4]
        for name, K in (("I", I), ("J", J)):
            d = np.abs(np.einsum('ab...,bc...->ac...', K, K) + eye).max()
            if d > tol:
                raise DomainError(f"{name}^2 != -Id: defect {d:.3e}")
            herm = np.einsum('ca...,cd...,db...->ab...', K, g, K) - g
            if np.abs(herm).max() > tol:
                raise DomainError(f"metric not {name}-Hermitian: "
                                  f"{np.abs(herm).max():.3e}")
        res = gk_compatibility_residual(self)
        if res > tol:
            raise DomainError(f"GK compatibility residual {res:.3e}")
        return self


def _kahler_form(g, K):
    """omega_K[a,b] = g(K e_a, e_b) for pointwise fields."""
    return np.einsum('ma...,mb...->ab...', K, g)


def _dc_form(omega, K, eng):
    """d^c_K omega = (d omega)(K., K., K.) as a compact 3-form."""
    dw = forms.d2_compact(omega, eng)
    full = forms.full3_from_compact(dw)
    rot = np.einsum('xyz...,xa...,yb...,zc...->abc...', full, K, K, K)
    return forms.compact3_from_full(rot)


def gk_compatibility_residual(t: GKTriple):
    """max(sup |d^c_I w_I + d^c_J w_J|, sup |d d^c_I w_I|)."""
    eng = deriv_engine(t.grid)
    g, I, J = t.fields()
    hI = _dc_form(_kahler_form(g, I), I, eng)
    hJ = _dc_form(_kahler_form(g, J), J, eng)
    r1 = float(np.abs(hI + hJ).max())
    r2 = float(np.abs(forms.d3_top(hI, eng)).max())
    return max(r1, r2)


def poisson_sigma(t: GKTriple, degeneracy_tol=1e-9):
    """Poisson bivector sigma = [I, J] g^{-1} / 2, angle p = tr(IJ) / 4.

    Returns (sigma, p, degenerate_mask); sigma[a, b] carries both indices
    raised, is antisymmetric, and its rank is 0 or 4 pointwise.  The mask
    flags the type-change locus |p| = 1 (where I = -+ J).
    """
    g, I, J = t.fields()
    gi = np.moveaxis(np.linalg.inv(np.moveaxis(g, (0, 1), (-2, -1))),
                     (-2, -1), (0, 1))
    comm = (np.einsum('ab...,bc...->ac...', I, J)
            - np.einsum('ab...,bc...->ac...', J, I))
    sigma = 0.5 * np.einsum('ac...,cb...->ab...', comm, gi)
    p = 0.25 * np.einsum('ab...,ba...->...', I, J)
    mask = np.abs(np.abs(p) - 1.0) < degeneracy_tol
    return sigma, p, mask


def sigma_rank(sigma, tol=1e-10):
    """Pointwise rank of the bivector (0, 2 or 4; 2 should never occur)."""
    mat = np.moveaxis(sigma, (0, 1), (-2, -1))
    sv = np.linalg.svd(mat, compute_uv=False)
    return (sv > tol * max(1.0, float(sv.max()))).sum(axis=-1)


@dataclass
class SplitPotential:
    """Scalar potential on the product torus T2+ x T2-."""

    f: np.ndarray
    grid: ChartGrid
    background: tuple = (1.0, 1.0)

    def copy(self):
        return SplitPotential(self.f.copy(), self.grid, self.background)


def split_factors(s: SplitPotential):
    """(g_plus, g_minus) scalar fields; both must stay positive."""
    eng = deriv_engine(s.grid)
    hess = chart._mixed_hessian(s.f, eng)
    gp = s.background[0] + hess[0, 0].real
    gm = s.background[1] - hess[1, 1].real
    return gp, gm


def split_metric(s: SplitPotential) -> chart.HermitianField:
    """Hermitian metric diag(g_plus, g_minus) generated by the potential."""
    gp, gm = split_factors(s)
    if gp.min() <= 0 or gm.min() <= 0:
        which = "plus" if gp.min() <= 0 else "minus"
        raise DomainError(f"split potential degenerate in the {which} factor")
    G = np.zeros((2, 2) + s.grid.shape, dtype=complex)
    G[0, 0] = gp
    G[1, 1] = gm
    return chart.HermitianField(G, s.grid)


def split_triple(s: SplitPotential) -> GKTriple:
    """The commuting GK triple (g, I = standard, J = split) of the potential."""
    hf = split_metric(s)
    from .frames import hermitian_to_riemannian
    return GKTriple(hermitian_to_riemannian(hf.G), J_STD, J_SPLIT, s.grid)


def twisted_ma_rhs(s: SplitPotential):
    """log det(g_plus) - log det(g_minus); raises naming a degenerate factor."""
    gp, gm = split_factors(s)
    if gp.min() <= 0:
        raise DomainError("positivity lost in the plus factor")
    if gm.min() <= 0:
        raise DomainError("positivity lost in the minus factor")
    return np.log(gp) - np.log(gm)


def induced_split_rate(s: SplitPotential, fdot=None):
    """Metric rate diag(+dd+ fdot, -dd- fdot) induced by a potential rate."""
    if fdot is None:
        fdot = twisted_ma_rhs(s)
    eng = deriv_engine(s.grid)
    hess = chart._mixed_hessian(fdot, eng)
    out = np.zeros((2, 2) + s.grid.shape, dtype=complex)
    out[0, 0] = hess[0, 0]
    out[1, 1] = -hess[1, 1]
    return out


def tensor_consistency_defect(s: SplitPotential):
    """Sup norm between the scalar-induced rate and the chart flow rate."""
    hf = split_metric(s)
    rate_tensor, _ = chart.pcf_rhs(hf, pluriclosed_tol=None, with_report=False)
    rate_scalar = induced_split_rate(s)
    return float(np.abs(rate_tensor - rate_scalar).max())


@dataclass
class TwistedFlowResult:
    times: np.ndarray
    sup_f: np.ndarray
    consistency: np.ndarray
    final: SplitPotential
    singular: bool = False


def run_twisted_flow(s0: SplitPotential, t_end, cfl_c=0.2, record_every=10,
                     check_consistency=True) -> TwistedFlowResult:
    """RK4 integration of the twisted scalar flow."""
    grid = s0.grid
    dt = chart.cfl_timestep(grid, cfl_c)
    nsteps = max(1, int(np.ceil(t_end / dt - 1e-12)))
    dt = t_end / nsteps
    s = s0.copy()
    rows = {"t": [], "sup": [], "cons": []}

    def record(t):
        rows["t"].append(t)
        rows["sup"].append(float(np.abs(s.f - s.f.mean()).max()))
        rows["cons"].append(tensor_consistency_defect(s)
                            if check_consistency else np.nan)

    record(0.0)
    singular = False
    for istep in range(nsteps):
        try:
            k1 = twisted_ma_rhs(s)
            k2 = twisted_ma_rhs(SplitPotential(s.f + 0.5 * dt * k1, grid,
                                               s.background))
            k3 = twisted_ma_rhs(SplitPotential(s.f + 0.5 * dt * k2, grid,
                                               s.background))
            k4 = twisted_ma_rhs(SplitPotential(s.f + dt * k3, grid,
                                               s.background))
        except DomainError:
            singular = True
            break
        s = SplitPotential(s.f + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4),
                           grid, s.background)
        if (istep + 1) % record_every == 0 or istep == nsteps - 1:
            record((istep + 1) * dt)
    return TwistedFlowResult(times=np.array(rows["t"]),
                             sup_f=np.array(rows["sup"]),
                             consistency=np.array(rows["cons"]),
                             final=s, singular=singular)


def lee_form(t: GKTriple, which="I"):
    """Lee form of (g, K): *_g of the torsion 3-form of the K-structure."""
    eng = deriv_engine(t.grid)
    g, I, J = t.fields()
    K = I if which == "I" else J
    H = _dc_form(_kahler_form(g, K), K, eng)
    ginv, sq = forms.metric_aux(g)
    return np.real(forms.star3(H, ginv, sq)), ginv


def lie_derivative_endo(X, K, eng):
    """(L_X K)^a_b = X^c d_c K^a_b - K^c_b d_a-of-X ... standard formula."""
    dK = np.empty((4, 4, 4) + K.shape[2:])
    fh = eng.fft(K)
    for c in range(4):
        dK[c] = np.real(eng.ifft(eng.ik[c] * fh))
    dX = np.empty((4, 4) + K.shape[2:])
    fx = eng.fft(X)
    for a in range(4):
        dX[a] = np.real(eng.ifft(eng.ik[a] * fx))   # dX[a, c] = d_a X^c
    term1 = np.einsum('c...,cab...->ab...', X, dK)
    term2 = -np.einsum('cb...,ca...->ab...', K, dX)
    term3 = np.einsum('ac...,bc...->ab...', K, dX)
    return term1 + term2 + term3


def nijenhuis_field(K, eng):
    """Nijenhuis tensor of an almost complex structure field."""
    dK = np.empty((4, 4, 4) + K.shape[2:])
    fh = eng.fft(K)
    for c in range(4):
        dK[c] = np.real(eng.ifft(eng.ik[c] * fh))
    # N^a_{bc} = K^d_b d_d K^a_c - K^d_c d_d K^a_b
    #            - K^a_d (d_b K^d_c - d_c K^d_b)
    t1 = np.einsum('db...,dac...->abc...', K, dK)
    t2 = np.einsum('dc...,dab...->abc...', K, dK)
    t3 = np.einsum('ad...,bdc...->abc...', K, dK)
    t4 = np.einsum('ad...,cdb...->abc...', K, dK)
    return t1 - t2 - (t3 - t4)


def gkrf_structure_rate(t: GKTriple, which="I"):
    """L_{theta_K^sharp} K: the complex-structure drift direction of the flow."""
    eng = deriv_engine(t.grid)
    g, I, J = t.fields()
    K = I if which == "I" else J
    theta, ginv = lee_form(t, which)
    X = np.einsum('ab...,b...->a...', ginv, theta)
    return lie_derivative_endo(X, np.ascontiguousarray(K), eng)


def joyce_deform(t: GKTriple, f, dt, interp_order=3) -> GKTriple:
    """One explicit Euler step of the Hamiltonian deformation of J.

    The vector field X = sigma df is integrated for time dt; J is pulled
    back semi-Lagrangianly (spline interpolation of 4th-order accuracy) and
    the metric is rebuilt algebraically from (I, J_new, Omega = sigma^{-1}).
    Restricted to nondegenerate sigma on the support of df.
    """
    grid = t.grid
    eng = deriv_engine(grid)
    g, I, J = t.fields()
    sigma, p, mask = poisson_sigma(t)
    df = np.real(eng.dx_all(f))
    if mask.any() and np.abs(df).max() > 0:
        supp = np.abs(df).max(axis=0) > 1e-12 * np.abs(df).max()
        if (mask & supp).any():
            raise DomainError("sigma degenerate on the support of df "
                              "(|p| -> 1): type-change")
    X = np.einsum('ab...,b...->a...', sigma, df)

    # departure points x + dt X in index units, per axis
    n = grid.points_per_axis
    coords = np.meshgrid(*[np.arange(n)] * 4, indexing="ij")
    sample = [coords[a] + dt * X[a] / grid.spacings[a] for a in range(4)]
    Jmoved = np.empty_like(J)
    for a in range(4):
        for b in range(4):
            Jmoved[a, b] = ndimage.map_coordinates(
                J[a, b], sample, order=interp_order, mode="grid-wrap",
                prefilter=True)

    dX = np.empty((4, 4) + grid.shape)
    fx = eng.fft(X)
    for a in range(4):
        dX[a] = np.real(eng.ifft(eng.ik[a] * fx))
    dphi = np.eye(4)[(...,) + (None,) * 4] + dt * np.einsum('ac...->ca...', dX)
    dphi_m = np.moveaxis(dphi, (0, 1), (-2, -1))
    dphi_inv = np.linalg.inv(dphi_m)
    Jm = np.moveaxis(Jmoved, (0, 1), (-2, -1))
    Jnew = np.moveaxis(dphi_inv @ Jm @ dphi_m, (-2, -1), (0, 1))

    # rebuild g from sigma g = [I, J]/2 with Omega = sigma^{-1} held fixed
    omega_m = np.linalg.inv(np.moveaxis(sigma, (0, 1), (-2, -1)))
    comm = (np.einsum('ab...,bc...->ac...', I, Jnew)
            - np.einsum('ab...,bc...->ac...', Jnew, I))
    gnew = 0.5 * np.moveaxis(
        omega_m @ np.moveaxis(comm, (0, 1), (-2, -1)), (-2, -1), (0, 1))
    gnew = 0.5 * (gnew + np.swapaxes(gnew, 0, 1))
    return GKTriple(gnew, I.copy() if I.ndim > 2 else t.I, Jnew, grid)
