"""Generalized Ricci flow: coupled (g, H) evolution, energy functional,
lowest eigenvalue of the associated Schroedinger operator, conjugate heat
transport, soliton residuals, and the gauge link to the pluriclosed flow.

Torus states carry grid fields; homogeneous states carry constant tensors in
a Lie-algebra frame (see :mod:`pcflab.homogeneous`).  The index conventions
are fixed so that on the round S3 x R background with H twice the sphere
volume form, Rc - H^2/4 = 0 holds exactly:

* (H^2)_{ab} = H_{apq} H_b{}^{pq}, summed over both raised indices;
* |H|^2 = H_{pqr} H^{pqr}, the full contraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forms, riemann
from .chart import HermitianField, pcf_rhs, torsion_three_form
from .errors import DomainError, PcflabError, PreconditionError
from .frames import hermitian_to_riemannian
from .grid import ChartGrid, deriv_engine


@dataclass
class GRFState:
    """Riemannian metric, closed 3-form (compact components), dilaton."""

    g: np.ndarray          # (4, 4, grid)
    H: np.ndarray          # (4, grid) over forms.TRIPLES
    f: np.ndarray          # (grid,)
    grid: ChartGrid

    def validate(self, closed_tol=1e-8):
        eng = deriv_engine(self.grid)
        sym = np.abs(self.g - np.swapaxes(self.g, 0, 1)).max()
        if sym > 1e-12:
            raise DomainError(f"metric not symmetric: {sym:.3e}")
        eigs = np.linalg.eigvalsh(np.moveaxis(self.g, (0, 1), (-2, -1)))
        if eigs.min() <= 0:
            raise DomainError("metric not positive-definite")
        dh = np.abs(forms.d3_top(self.H, eng)).max()
        if dh > closed_tol:
            raise DomainError(f"dH != 0: residual {dh:.3e}")
        return self

    def copy(self):
        return GRFState(self.g.copy(), self.H.copy(), self.f.copy(), self.grid)


def flat_state(grid: ChartGrid, metric_scale=1.0):
    g = np.zeros((4, 4) + grid.shape)
    for a in range(4):
        g[a, a] = metric_scale
    H = np.zeros((4,) + grid.shape)
    f = np.zeros(grid.shape)
    return GRFState(g, H, f, grid)


def grf_rhs(state: GRFState):
    """Rates (dg/dt, dH/dt) = (-2 Rc + H^2/2, Hodge-Laplacian H)."""
    eng = deriv_engine(state.grid)
    ginv, sq = forms.metric_aux(state.g)
    ric = riemann.ricci(state.g, eng, ginv, sq)
    hsq = riemann.h_square(state.H, ginv)
    dg = -2.0 * ric + 0.5 * hsq
    dH = forms.hodge_laplacian3(state.H, eng, ginv, sq)
    return dg, np.real(dH)


def grf_step(state: GRFState, dt):
    """One RK4 step of the coupled system."""
    def rates(g, H):
        s = GRFState(g, H, state.f, state.grid)
        return grf_rhs(s)

    g, H = state.g, state.H
    k1g, k1h = rates(g, H)
    k2g, k2h = rates(g + 0.5 * dt * k1g, H + 0.5 * dt * k1h)
    k3g, k3h = rates(g + 0.5 * dt * k2g, H + 0.5 * dt * k2h)
    k4g, k4h = rates(g + dt * k3g, H + dt * k3h)
    gn = g + (dt / 6) * (k1g + 2 * k2g + 2 * k3g + k4g)
    hn = H + (dt / 6) * (k1h + 2 * k2h + 2 * k3h + k4h)
    gn = 0.5 * (gn + np.swapaxes(gn, 0, 1))
    return GRFState(gn, hn, state.f.copy(), state.grid)


def pluriclosed_to_grf(hf: HermitianField, dc_sign=1):
    """Riemannian data (g, H = torsion form, theta = *H) of a Hermitian metric.

    The dictionary uses the sesquilinear normalization g(X, Y) =
    2 Re h(X, Y), under which flat Hermitian components Id/2 correspond to
    the Euclidean metric and the flow rate satisfies the gauge identity
    dg/dt = -2 Rc + H^2/2 - L_{theta#} g on the nose.  The metric rate in
    this dictionary is twice the Hermitian-component rate.
    """
    eng = deriv_engine(hf.grid)
    g = 2.0 * hermitian_to_riemannian(hf.G)
    H = 2.0 * torsion_three_form(hf, eng, dc_sign)
    ginv, sq = forms.metric_aux(g)
    theta = np.real(forms.star3(H, ginv, sq))
    return g, H, theta


def metric_rate_to_grf(rate):
    """Riemannian-rate counterpart of a Hermitian-component flow rate."""
    return 2.0 * hermitian_to_riemannian(rate)


def gauge_equivalence_check(hf: HermitianField, dc_sign=1,
                            pluriclosed_tol=1e-6):
    """Sup-norm defect of dg/dt = -2Rc + H^2/2 - L_{theta#} g vs the flow rate.

    The left side is computed purely from Riemannian data (g, H, theta); the
    right side converts the complex-geometry flow rate to a symmetric tensor.
    The two computation paths share no curvature code.
    """
    eng = deriv_engine(hf.grid)
    g, H, theta = pluriclosed_to_grf(hf, dc_sign)
    ginv, sq = forms.metric_aux(g)
    ric = riemann.ricci(g, eng, ginv, sq)
    hsq = riemann.h_square(H, ginv)
    theta_vec = np.einsum('ab...,b...->a...', ginv, theta)
    lie = riemann.lie_derivative_metric(theta_vec, g, eng)
    lhs = -2.0 * ric + 0.5 * hsq - lie

    rate, _ = pcf_rhs(hf, pluriclosed_tol=pluriclosed_tol, dc_sign=dc_sign,
                      with_report=False)
    rhs = metric_rate_to_grf(rate)
    defect = float(np.abs(lhs - rhs).max())
    scale = float(np.abs(rhs).max())
    return {"defect": defect, "scale": scale,
            "lhs_norm": float(np.abs(lhs).max()), "grid_h": hf.grid.h_min}


def f_functional(state: GRFState):
    """Energy integral of (R - |H|^2/12 + |grad f|^2) e^{-f} dV."""
    eng = deriv_engine(state.grid)
    ginv, sq = forms.metric_aux(state.g)
    R = riemann.scalar_curvature(state.g, eng, ginv)
    hn2 = riemann.h_norm2(state.H, ginv)
    df = np.real(eng.dx_all(state.f))
    grad2 = np.einsum('ab...,a...,b...->...', ginv, df, df)
    integrand = (R - hn2 / 12.0 + grad2) * np.exp(-state.f) * sq
    return float(integrand.sum() * state.grid.cell_volume)


def measure_total(state: GRFState):
    """The weighted volume integral of e^{-f} dV."""
    _, sq = forms.metric_aux(state.g)
    return float((np.exp(-state.f) * sq).sum() * state.grid.cell_volume)


def _schrodinger_apply(u, g, H, eng, ginv, sq, R, hn2):
    lap = riemann.laplace_beltrami(u, eng, ginv, sq)
    return -4.0 * lap + (R - hn2 / 12.0) * u


def lambda_lowest(g, H, grid: ChartGrid, tol=1e-10, maxiter=200):
    """Lowest eigenvalue of -4 Lap + R - |H|^2/12 and the minimizing dilaton.

    Inverse power iteration with shift below the bottom of the potential;
    inner solves are preconditioned conjugate gradients in Fourier space.
    Returns (lambda, f) with the normalization integral of e^{-f} dV = 1.
    """
    eng = deriv_engine(grid)
    ginv, sq = forms.metric_aux(g)
    R = riemann.scalar_curvature(g, eng, ginv)
    hn2 = riemann.h_norm2(H, ginv)
    V = R - hn2 / 12.0
    # iteration shift -(max V) - 1; fall back if that leaves the operator
    # indefinite (lambda >= min V)
    shift = float(V.max()) + 1.0
    if float(V.min()) + shift <= 0.1:
        shift = -float(V.min()) + 1.0

    n = int(np.prod(grid.shape))
    w = sq.reshape(n) * grid.cell_volume          # quadrature weights

    def apply_L(uflat):
        u = uflat.reshape(grid.shape)
        return _schrodinger_apply(u, g, H, eng, ginv, sq, R, hn2).reshape(n)

    # symmetric generalized problem L u = lam W u with W = diag(w); solve
    # (L + shift W) x = W b by CG in the W-inner product via dense operator
    ksq = sum((-1.0) * ik ** 2 for ik in eng.ik).real  # flat -Laplacian symbol

    def precond(bflat):
        b = bflat.reshape(grid.shape)
        bh = eng.fft(b)
        xh = bh / (4.0 * ksq + shift)
        return np.real(eng.ifft(xh)).reshape(n)

    def solve_shifted(b):
        # preconditioned CG on A x = b, A = L + shift*Id, SPD
        bnorm = np.sqrt(float(b @ (w * b)))
        x = precond(b)
        r = b - (apply_L(x) + shift * x)
        z = precond(r)
        p = z.copy()
        rz = float(r @ (w * z))
        for _ in range(400):
            if np.sqrt(float(r @ (w * r))) < 1e-14 * max(1.0, bnorm):
                break
            Ap = apply_L(p) + shift * p
            alpha = rz / float(p @ (w * Ap))
            x += alpha * p
            r -= alpha * Ap
            z = precond(r)
            rz_new = float(r @ (w * z))
            beta = rz_new / rz
            rz = rz_new
            p = z + beta * p
        return x

    u = np.ones(n)
    u /= np.sqrt(float(u @ (w * u)))
    lam_old = np.inf
    lam = 0.0
    for _ in range(maxiter):
        v = solve_shifted(u)
        v /= np.sqrt(float(v @ (w * v)))
        lam = float(v @ (w * apply_L(v)))
        if abs(lam - lam_old) < tol:
            u = v
            break
        lam_old = lam
        u = v
    if u.mean() < 0:
        u = -u
    if u.min() <= 0:
        raise PcflabError("ground state not positive; iteration failed")
    ug = u.reshape(grid.shape)
    f = -2.0 * np.log(ug)
    return lam, f


class StoredTrajectory:
    """Dense-in-steps forward (g, H) trajectory for the backward dilaton solve."""

    def __init__(self, grid: ChartGrid):
        self.grid = grid
        self.times = []
        self.states = []

    def append(self, t, state: GRFState):
        self.times.append(t)
        self.states.append((state.g.copy(), state.H.copy()))

    def at(self, t):
        ts = self.times
        if t <= ts[0]:
            return self.states[0]
        if t >= ts[-1]:
            return self.states[-1]
        i = int(np.searchsorted(ts, t)) - 1
        i = min(max(i, 0), len(ts) - 2)
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        g = (1 - w) * self.states[i][0] + w * self.states[i + 1][0]
        H = (1 - w) * self.states[i][1] + w * self.states[i + 1][1]
        return g, H


def run_grf(state0: GRFState, t_end, dt, store=True):
    """Forward integration of (g, H); returns final state and stored history."""
    traj = StoredTrajectory(state0.grid)
    s = state0.copy()
    t = 0.0
    if store:
        traj.append(0.0, s)
    nsteps = int(round(t_end / dt))
    for _ in range(nsteps):
        s = grf_step(s, dt)
        t += dt
        if store:
            traj.append(t, s)
    return s, traj


def conjugate_heat_backward(traj: StoredTrajectory, fT, dt=None):
    """Solve the conjugate heat equation backward along a stored trajectory.

    Works at the level of u = e^{-f}: backward in time u satisfies the
    ordinary heat equation d u/d tau = Lap u - (R - |H|^2/4) u in reversed
    time tau, which conserves the weighted volume integral of u dV along the
    coupled flow.  Returns the list of (t, f) at the stored times.
    """
    times = traj.times
    if len(times) < 2:
        raise PreconditionError("trajectory not stored")
    eng = deriv_engine(traj.grid)
    out = [(times[-1], fT.copy())]
    u = np.exp(-fT)

    def rate(u, t):
        g, H = traj.at(t)
        ginv, sq = forms.metric_aux(g)
        R = riemann.scalar_curvature(g, eng, ginv)
        hn2 = riemann.h_norm2(H, ginv)
        lap = riemann.laplace_beltrami(u, eng, ginv, sq)
        # d u / dt = -Lap u + (R - |H|^2/4) u; integrated backward
        return -lap + (R - hn2 / 4.0) * u

    for i in range(len(times) - 1, 0, -1):
        t1, t0 = times[i], times[i - 1]
        h = t1 - t0
        k1 = rate(u, t1)
        k2 = rate(u - 0.5 * h * k1, t1 - 0.5 * h)
        k3 = rate(u - 0.5 * h * k2, t1 - 0.5 * h)
        k4 = rate(u - h * k3, t0)
        u = u - (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if u.min() <= 0:
            raise PcflabError("conjugate heat solution lost positivity")
        out.append((t0, -np.log(u)))
    out.reverse()
    return out


@dataclass
class SolitonResidual:
    metric_residual: np.ndarray
    torsion_residual: np.ndarray
    metric_sup: float
    metric_l2: float
    torsion_sup: float
    torsion_l2: float

    @property
    def is_soliton(self):
        return self.metric_sup < 1e-6 and self.torsion_sup < 1e-6


def soliton_residual(state: GRFState) -> SolitonResidual:
    """Residuals of Rc - H^2/4 + Hess f and d*H + grad f . H."""
    eng = deriv_engine(state.grid)
    ginv, sq = forms.metric_aux(state.g)
    gamma = riemann.christoffel(state.g, eng, ginv)
    ric = riemann.ricci(state.g, eng, ginv, sq, gamma)
    hsq = riemann.h_square(state.H, ginv)
    hess = riemann.hessian_scalar(state.f, eng, gamma)
    met = ric - 0.25 * hsq + hess

    dstarH = np.real(forms.codiff3(state.H, eng, ginv, sq))
    df = np.real(eng.dx_all(state.f))
    gradf = np.einsum('ab...,b...->a...', ginv, df)
    Hfull = forms.full3_from_compact(state.H)
    iota = np.einsum('a...,abc...->bc...', gradf, Hfull)
    tors = dstarH + iota

    vol = (sq * state.grid.cell_volume).reshape(-1)
    return SolitonResidual(
        metric_residual=met, torsion_residual=tors,
        metric_sup=float(np.abs(met).max()),
        metric_l2=float(np.sqrt((met ** 2).sum(axis=(0, 1)).reshape(-1) @ vol)),
        torsion_sup=float(np.abs(tors).max()),
        torsion_l2=float(np.sqrt((tors ** 2).sum(axis=(0, 1)).reshape(-1) @ vol)))


def monotonicity_integrand(state: GRFState):
    """Density 2|Rc - H^2/4 + Hess f|^2 + |d*H + grad f . H|^2, weighted."""
    eng = deriv_engine(state.grid)
    ginv, sq = forms.metric_aux(state.g)
    res = soliton_residual(state)
    met_up = np.einsum('ac...,bd...,cd...->ab...', ginv, ginv,
                       res.metric_residual)
    met2 = np.einsum('ab...,ab...->...', res.metric_residual, met_up)
    tor_up = np.einsum('ac...,bd...,cd...->ab...', ginv, ginv,
                       res.torsion_residual)
    tor2 = 0.5 * np.einsum('ab...,ab...->...', res.torsion_residual, tor_up)
    dens = (2.0 * met2 + tor2) * np.exp(-state.f) * sq
    return float(dens.sum() * state.grid.cell_volume)


def lambda_first_variation(state: GRFState, h=None, B=None):
    """Predicted Gateaux derivative of lambda under (g, H) variations.

    For a metric variation h and a torsion variation dB (exact, preserving
    the class of H), with f the minimizing dilaton:

        d lambda = - int <h, Rc - H^2/4 + Hess f> e^{-f} dV
                   - (1/2) int <d*H + grad f . H, B> e^{-f} dV,

    inner products taken with g (the 2-form pairing carries the 1/2).
    """
    eng = deriv_engine(state.grid)
    ginv, sq = forms.metric_aux(state.g)
    res = soliton_residual(state)
    weight = np.exp(-state.f) * sq * state.grid.cell_volume
    out = 0.0
    if h is not None:
        met_up = np.einsum('ac...,bd...,cd...->ab...', ginv, ginv,
                           res.metric_residual)
        out -= float((np.einsum('ab...,ab...->...', met_up, h) * weight).sum())
    if B is not None:
        tor_up = np.einsum('ac...,bd...,cd...->ab...', ginv, ginv,
                           res.torsion_residual)
        out -= 0.5 * float((np.einsum('ab...,ab...->...', tor_up, B)
                            * weight).sum())
    return out


def coupled_flow_report(state0: GRFState, t_end, dt, fT=None):
    """Forward (g, H) run, backward dilaton, and the energy series.

    Returns times, F values, the measured dF/dt (central differences), the
    predicted monotonicity integrand at each interior time, and the
    conservation drift of the weighted volume.
    """
    _, traj = run_grf(state0, t_end, dt)
    if fT is None:
        fT = np.zeros(state0.grid.shape)
    fs = conjugate_heat_backward(traj, fT)
    times = np.array([t for t, _ in fs])
    Fs, integrands, masses = [], [], []
    for (t, f) in fs:
        g, H = traj.at(t)
        st = GRFState(g, H, f, state0.grid)
        Fs.append(f_functional(st))
        integrands.append(monotonicity_integrand(st))
        masses.append(measure_total(st))
    Fs = np.array(Fs)
    dF = np.gradient(Fs, times)
    return {
        "times": times, "F": Fs, "dF_dt": dF,
        "integrand": np.array(integrands),
        "mass": np.array(masses),
        "mass_drift": float(np.abs(np.array(masses) - masses[-1]).max()),
        "monotone": bool(np.all(np.diff(Fs) >= -1e-10 - 0.0 * Fs[:-1])),
    }
