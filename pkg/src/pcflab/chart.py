"""Pluriclosed-flow tensor engine on periodic 4-torus charts.

The flow rate is computed along three mathematically equivalent but
computationally independent routes, cross-checked in ``pcf_rhs``:

1. Chern route: -S + Q1 from Chern curvature traces and torsion squares;
2. Bismut route: minus the (1,1) part of the Bismut Ricci form, obtained as
   i d(tr A) where A is the torsion-corrected connection on (1,0) vectors;
3. Hodge route: del del*_w w + delbar delbar*_w w + i del delbar log det g,
   with the codifferentials evaluated through the metric Hodge star.

All sign conventions are frozen in :mod:`pcflab.frames`; ``dc_sign=-1``
flips the torsion 3-form and is reserved for deliberate-fault testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forms
from .errors import DomainError, ParameterError, PreconditionError, SingularityError
from .frames import (P_DZ, U_COMPLEX_IN_REAL, herm_to_real2,
                     hermitian_to_riemannian, J_STD)
from .grid import ChartGrid, SpectralDeriv, deriv_engine, min_eig_hermitian, require_positive

DEFAULT_PLURICLOSED_TOL = 1e-8
POSITIVITY_FLOOR = 1e-6


def _k21_basis():
    """Real-frame triple components of dz1 ^ dz2 ^ dzbar^q, q = 1, 2."""
    rows = np.vstack([P_DZ, P_DZ.conj()])  # dz1, dz2, dzb1, dzb2 on e_a
    K = np.zeros((4, 2), dtype=complex)
    for t, (a, b, c) in enumerate(forms.TRIPLES):
        for q in range(2):
            M = np.array([rows[0][[a, b, c]],
                          rows[1][[a, b, c]],
                          rows[2 + q][[a, b, c]]])
            K[t, q] = np.linalg.det(M)
    return K


K21 = _k21_basis()


@dataclass
class HermitianField:
    """Hermitian metric components g_{i jb} on a chart grid, shape (2,2,n^4)."""

    G: np.ndarray
    grid: ChartGrid

    def __post_init__(self):
        expected = (2, 2) + self.grid.shape
        if self.G.shape != expected:
            raise DomainError(f"metric array must have shape {expected}")
        self.G = np.ascontiguousarray(self.G, dtype=complex)

    def validate(self, herm_tol=1e-10, tail_frac=0.5):
        sym = np.abs(self.G - np.conj(np.swapaxes(self.G, 0, 1))).max()
        if sym > herm_tol:
            raise DomainError(f"metric not Hermitian: defect {sym:.3e}")
        require_positive(self.G)
        eng = deriv_engine(self.grid)
        tail = eng.spectral_tail_fraction(self.G)
        if tail > tail_frac:
            raise DomainError(f"metric spectrally under-resolved: "
                              f"top-half energy fraction {tail:.3e}")
        return self

    def copy(self):
        return HermitianField(self.G.copy(), self.grid)

    def min_eig(self):
        return float(min_eig_hermitian(self.G).min())

    def riemannian(self):
        return hermitian_to_riemannian(self.G)

    def kahler_form_real(self):
        return herm_to_real2(self.G)


@dataclass
class TorsionField:
    """Chern torsion T_{i k pb}, torsion 3-form H (compact), Lee form theta."""

    T: np.ndarray          # (2, 2, 2, grid) complex, antisymmetric in (i, k)
    H: np.ndarray          # (4, grid) real, compact over forms.TRIPLES
    theta: np.ndarray      # (4, grid) real
    grid: ChartGrid


@dataclass
class CurvatureForms:
    rho_C: np.ndarray      # Hermitian components of the Chern Ricci form
    rho_B11: np.ndarray    # (1,1) part of the Bismut Ricci form
    S: np.ndarray          # Chern curvature trace over the form indices
    Q1: np.ndarray         # torsion square entering the flow
    grid: ChartGrid


@dataclass
class FormulationReport:
    """Sup-norm discrepancies among the three flow-rate formulations."""

    chern_vs_bismut: float
    chern_vs_hodge: float
    bismut_vs_hodge: float
    grid_h: float

    @property
    def max_discrepancy(self):
        return max(self.chern_vs_bismut, self.chern_vs_hodge,
                   self.bismut_vs_hodge)


def flat_metric(grid: ChartGrid, scale=1.0) -> HermitianField:
    G = np.zeros((2, 2) + grid.shape, dtype=complex)
    G[0, 0] = scale
    G[1, 1] = scale
    return HermitianField(G, grid)


def _ginv(G):
    gm = np.moveaxis(G, (0, 1), (-2, -1))
    return np.moveaxis(np.linalg.inv(gm), (-2, -1), (0, 1))


def _logdet(G):
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    det = det.real
    if det.min() <= 0:
        raise DomainError("non-positive determinant in log det evaluation")
    return np.log(det)


def _dG_all(G, eng):
    """Wirtinger derivatives of the metric: index A in (dz1, dz2, dzb1, dzb2)."""
    fh = eng.fft(G)
    out = np.empty((4, 2, 2) + G.shape[2:], dtype=complex)
    for A, sym in enumerate((*eng.hol, *eng.antihol)):
        out[A] = eng.ifft(sym * fh)
    return out


def check_pluriclosed(hf: HermitianField) -> float:
    """Sup norm of the (2,2) coefficient of i del delbar omega, spectrally."""
    require_positive(hf.G)
    eng = deriv_engine(hf.grid)
    fh = eng.fft(hf.G)
    h = eng.hol
    a = eng.antihol
    # c = d1 d1b G22 - d1 d2b G21 - d2 d1b G12 + d2 d2b G11
    c = eng.ifft(h[0] * a[0] * fh[1, 1] - h[0] * a[1] * fh[1, 0]
                 - h[1] * a[0] * fh[0, 1] + h[1] * a[1] * fh[0, 0])
    return float(np.abs(c).max())


def torsion_tensor(dG):
    """T_{i k pb} = d_i g_{k pb} - d_k g_{i pb} from precomputed derivatives."""
    T = np.zeros((2, 2, 2) + dG.shape[3:], dtype=complex)
    for i in range(2):
        for k in range(2):
            T[i, k] = dG[i, k] - dG[k, i]
    return T


def torsion_three_form(hf: HermitianField, eng=None, dc_sign=1):
    """Compact real components of the torsion 3-form H = (d omega)(J., J., J.)."""
    if eng is None:
        eng = deriv_engine(hf.grid)
    omega = herm_to_real2(hf.G)
    dw = forms.d2_compact(omega, eng)
    return dc_sign * forms.jrot3_std_compact(dw).real


def chern_torsion(hf: HermitianField, dc_sign=1) -> TorsionField:
    """Chern torsion, torsion 3-form, and Lee form theta = *H."""
    require_positive(hf.G)
    eng = deriv_engine(hf.grid)
    dG = _dG_all(hf.G, eng)
    T = torsion_tensor(dG)
    H = torsion_three_form(hf, eng, dc_sign)
    gR = hermitian_to_riemannian(hf.G)
    ginv, sq = forms.metric_aux(gR)
    theta = forms.star3(H, ginv, sq).real
    return TorsionField(T=T, H=H, theta=theta, grid=hf.grid)


def _bismut_trace_form(G, dG, ginv, dc_sign=1):
    """Trace of the (1,0)-projected torsion-corrected connection.

    Returns (phi_hol, phi_anti), each shape (2, grid): the components of the
    connection 1-form on the anticanonical bundle in holomorphic and
    antiholomorphic chart directions.
    """
    s = dc_sign
    grid_shape = G.shape[2:]
    phi_hol = np.zeros((2,) + grid_shape, dtype=complex)
    phi_anti = np.zeros((2,) + grid_shape, dtype=complex)
    for k in range(2):
        # B_hol[i,j] = ((1-s) d_k G_{i jb} + (1+s) d_i G_{k jb} ) / 2
        Bh = 0.5 * ((1 - s) * dG[k] + (1 + s) * np.stack([dG[i][k] for i in range(2)]))
        # B_anti[i,j] = (1+s)/2 ( d_kb G_{i jb} - d_jb G_{i kb} )
        Ba = 0.5 * (1 + s) * (dG[k + 2]
                              - np.stack([np.stack([dG[j + 2][i, k] for j in range(2)])
                                          for i in range(2)]))
        phi_hol[k] = np.einsum('ji...,ij...->...', ginv, Bh)
        phi_anti[k] = np.einsum('ji...,ij...->...', ginv, Ba)
    return phi_hol, phi_anti


def _rho_b11(phi_hol, phi_anti, eng):
    """(rho_B^{1,1})_{i jb} = d_i phi_anti_j - d_jb phi_hol_i."""
    out = np.empty((2, 2) + phi_hol.shape[1:], dtype=complex)
    fa = eng.fft(phi_anti)
    fh = eng.fft(phi_hol)
    for i in range(2):
        for j in range(2):
            out[i, j] = eng.ifft(eng.hol[i] * fa[j]) - eng.ifft(eng.antihol[j] * fh[i])
    return out


def _mixed_hessian(f, eng):
    """All d_i d_jb of a scalar field, shape (2, 2, grid)."""
    fh = eng.fft(f)
    out = np.empty((2, 2) + f.shape, dtype=complex)
    for i in range(2):
        for j in range(2):
            out[i, j] = eng.ifft(eng.hol[i] * eng.antihol[j] * fh)
    return out


def delbar_star_omega(G, T, ginv):
    """delbar* omega as a (1,0)-form, in closed form.

    With psi_q = T_{1 2 qb}, the Hodge star of del omega contracts to
    beta_1 = i (g^{qb 2} psi_q), beta_2 = -i (g^{qb 1} psi_q); this equals
    -*(del omega) for the metric star (verified against the general star
    in the test suite).
    """
    t0, t1 = T[0, 1, 0], T[0, 1, 1]
    return np.stack([1j * (ginv[0, 1] * t0 + ginv[1, 1] * t1),
                     -1j * (ginv[0, 0] * t0 + ginv[1, 0] * t1)])


def _hodge_route(G, T, eng, ld_hess, ginv):
    """del del* w + delbar delbar* w + i del delbar log det g, Hermitian comps."""
    beta = delbar_star_omega(G, T, ginv)
    fb = eng.fft(beta)
    c = np.empty((2, 2) + G.shape[2:], dtype=complex)
    for i in range(2):
        for j in range(2):
            c[i, j] = 1j * eng.ifft(eng.antihol[j] * fb[i])
    c_dag = np.conj(np.swapaxes(c, 0, 1))
    return c + c_dag + ld_hess


def curvature_forms(hf: HermitianField, dc_sign=1) -> CurvatureForms:
    """Chern and Bismut Ricci-type forms plus the flow tensors S and Q1."""
    require_positive(hf.G)
    eng = deriv_engine(hf.grid)
    G = hf.G
    dG = _dG_all(G, eng)
    ginv = _ginv(G)
    T = torsion_tensor(dG)

    ld_hess = _mixed_hessian(_logdet(G), eng)
    rho_C = -ld_hess

    d2G = np.empty((2, 2, 2, 2) + G.shape[2:], dtype=complex)
    fh = eng.fft(G)
    for k in range(2):
        for l in range(2):
            d2G[k, l] = eng.ifft(eng.hol[k] * eng.antihol[l] * fh)
    S = (-np.einsum('lk...,klij...->ij...', ginv, d2G)
         + np.einsum('lk...,qp...,kiq...,lpj...->ij...', ginv, ginv,
                     dG[:2], dG[2:]))
    Q1 = np.einsum('lk...,qp...,ikp...,jlq...->ij...', ginv, ginv, T, T.conj())

    phi_hol, phi_anti = _bismut_trace_form(G, dG, ginv, dc_sign)
    rho_B11 = _rho_b11(phi_hol, phi_anti, eng)

    return CurvatureForms(rho_C=rho_C, rho_B11=rho_B11, S=S, Q1=Q1, grid=hf.grid)


def pcf_rhs(hf: HermitianField, pluriclosed_tol=DEFAULT_PLURICLOSED_TOL,
            dc_sign=1, with_report=True):
    """Flow rate dg/dt as Hermitian components, plus the cross-check report.

    The returned rate is the Bismut-route value -rho_B^{1,1}.
    """
    res = check_pluriclosed(hf)
    if pluriclosed_tol is not None and res > pluriclosed_tol:
        raise PreconditionError(
            f"input not pluriclosed: residual {res:.3e} > {pluriclosed_tol:.1e}",
            residual=res)
    eng = deriv_engine(hf.grid)
    G = hf.G
    dG = _dG_all(G, eng)
    ginv = _ginv(G)
    T = torsion_tensor(dG)
    ld_hess = _mixed_hessian(_logdet(G), eng)

    phi_hol, phi_anti = _bismut_trace_form(G, dG, ginv, dc_sign)
    rate = -_rho_b11(phi_hol, phi_anti, eng)

    if not with_report:
        return rate, None

    d2G = np.empty((2, 2, 2, 2) + G.shape[2:], dtype=complex)
    fh = eng.fft(G)
    for k in range(2):
        for l in range(2):
            d2G[k, l] = eng.ifft(eng.hol[k] * eng.antihol[l] * fh)
    S = (-np.einsum('lk...,klij...->ij...', ginv, d2G)
         + np.einsum('lk...,qp...,kiq...,lpj...->ij...', ginv, ginv, dG[:2], dG[2:]))
    Q1 = np.einsum('lk...,qp...,ikp...,jlq...->ij...', ginv, ginv, T, T.conj())
    rate_chern = -S + Q1
    rate_hodge = _hodge_route(G, T, eng, ld_hess, ginv)

    report = FormulationReport(
        chern_vs_bismut=float(np.abs(rate_chern - rate).max()),
        chern_vs_hodge=float(np.abs(rate_chern - rate_hodge).max()),
        bismut_vs_hodge=float(np.abs(rate - rate_hodge).max()),
        grid_h=hf.grid.h_min)
    return rate, report


def kahler_ricci_rate(hf: HermitianField):
    """Kaehler-Ricci driver d g_{i jb}/dt = d_i d_jb log det g (independent path)."""
    eng = deriv_engine(hf.grid)
    return _mixed_hessian(_logdet(hf.G), eng)


def _hermitize(G):
    return 0.5 * (G + np.conj(np.swapaxes(G, 0, 1)))


def cfl_timestep(grid: ChartGrid, cfl_c=0.2):
    return cfl_c * grid.h_min ** 2


def step_flow(hf: HermitianField, dt, cfl_c=0.2, dc_sign=1, scheme="rk4",
              rate_fn=None, pluriclosed_tol=None):
    """One explicit time step of the flow; re-hermitized output.

    dt must satisfy the CFL bound dt <= cfl_c * h^2.  Loss of positivity
    raises SingularityError with the offending grid location.
    """
    bound = cfl_timestep(hf.grid, cfl_c)
    if dt > bound * (1 + 1e-12):
        raise ParameterError(f"dt={dt:.3e} exceeds CFL bound {bound:.3e}")
    if rate_fn is None:
        def rate_fn(G):
            f = HermitianField(G, hf.grid)
            r, _ = pcf_rhs(f, pluriclosed_tol=pluriclosed_tol,
                           dc_sign=dc_sign, with_report=False)
            return r

    G = hf.G
    if scheme == "euler":
        Gn = G + dt * rate_fn(G)
    elif scheme == "rk4":
        k1 = rate_fn(G)
        k2 = rate_fn(_hermitize(G + 0.5 * dt * k1))
        k3 = rate_fn(_hermitize(G + 0.5 * dt * k2))
        k4 = rate_fn(_hermitize(G + dt * k3))
        Gn = G + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        raise ParameterError(f"unknown scheme {scheme!r}")
    Gn = _hermitize(Gn)

    lo = min_eig_hermitian(Gn)
    m = float(lo.min())
    if m < POSITIVITY_FLOOR:
        idx = np.unravel_index(int(np.argmin(lo)), lo.shape)
        raise SingularityError(
            f"metric positivity lost: min eigenvalue {m:.3e} at {idx}",
            location=idx, min_eig=m)
    return HermitianField(Gn, hf.grid)


@dataclass
class ChartFlowResult:
    times: np.ndarray
    pluriclosed_residuals: np.ndarray
    rate_norms: np.ndarray
    min_eigs: np.ndarray
    flat_distances: np.ndarray
    volumes: np.ndarray
    pairings: np.ndarray | None
    final: HermitianField
    singular: bool = False
    singular_info: str = ""
    snapshots: list = field(default_factory=list)


def gamma_pairing(hf: HermitianField, gamma):
    """Integral of omega wedge gamma for a constant-coefficient closed 2-form."""
    omega = herm_to_real2(hf.G)
    g4 = np.broadcast_to(gamma[..., None, None, None, None],
                         (4, 4) + hf.grid.shape)
    top = forms.wedge22_top(omega, g4)
    return float(top.sum() * hf.grid.cell_volume)


def flat_distance(hf: HermitianField):
    """Sup distance of the metric to its grid average (the candidate flat limit)."""
    mean = hf.G.mean(axis=(-4, -3, -2, -1), keepdims=True)
    return float(np.abs(hf.G - mean).max())


def run_chart_flow(hf0: HermitianField, t_end, cfl_c=0.2, dc_sign=1,
                   gamma=None, normalized=False, record_every=1,
                   snapshot_times=(), pluriclosed_tol=None):
    """Integrate the flow with RK4 at the CFL step; returns diagnostics.

    With normalized=True the metric is rescaled after each step to keep the
    total volume fixed (one natural normalization; the literature does not
    pin a unique choice).
    """
    dt = cfl_timestep(hf0.grid, cfl_c)
    nsteps = max(1, int(np.ceil(t_end / dt - 1e-12)))
    dt = t_end / nsteps

    hf = hf0.copy()
    vol0 = _volume(hf)
    rows = {k: [] for k in ("t", "res", "rate", "eig", "dist", "vol", "pair")}
    snapshots = []
    singular = False
    info = ""

    def record(t):
        rate, _ = pcf_rhs(hf, pluriclosed_tol=None, dc_sign=dc_sign,
                          with_report=False)
        rows["t"].append(t)
        rows["res"].append(check_pluriclosed(hf))
        rows["rate"].append(float(np.abs(rate).max()))
        rows["eig"].append(hf.min_eig())
        rows["dist"].append(flat_distance(hf))
        rows["vol"].append(_volume(hf))
        rows["pair"].append(gamma_pairing(hf, gamma) if gamma is not None else np.nan)

    record(0.0)
    t = 0.0
    for istep in range(nsteps):
        try:
            hf = step_flow(hf, dt, cfl_c=cfl_c, dc_sign=dc_sign,
                           pluriclosed_tol=pluriclosed_tol)
        except SingularityError as exc:
            singular = True
            info = str(exc)
            break
        if normalized:
            hf = HermitianField(hf.G * (vol0 / _volume(hf)) ** 0.5, hf.grid)
        t = (istep + 1) * dt
        if (istep + 1) % record_every == 0 or istep == nsteps - 1:
            record(t)
        for ts in snapshot_times:
            if abs(t - ts) < 0.5 * dt:
                snapshots.append((t, hf.copy()))

    return ChartFlowResult(
        times=np.array(rows["t"]),
        pluriclosed_residuals=np.array(rows["res"]),
        rate_norms=np.array(rows["rate"]),
        min_eigs=np.array(rows["eig"]),
        flat_distances=np.array(rows["dist"]),
        volumes=np.array(rows["vol"]),
        pairings=np.array(rows["pair"]) if gamma is not None else None,
        final=hf, singular=singular, singular_info=info,
        snapshots=snapshots)


def _volume(hf: HermitianField):
    det = (hf.G[0, 0] * hf.G[1, 1] - hf.G[0, 1] * hf.G[1, 0]).real
    # Riemannian volume element: det g_R = 16 det(G)^2 in our normalization
    return float(np.sum(4.0 * det) * hf.grid.cell_volume)
