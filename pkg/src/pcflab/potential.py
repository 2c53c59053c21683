"""(1,0)-form potential reduction of the flow on the 4-torus.

A potential alpha = (alpha_1, alpha_2) generates the metric
omega = omega_flat + delbar(alpha) + del(conj alpha), which is pluriclosed
by construction.  The flow of alpha,

    d alpha / dt = delbar*_{g} omega_{g} - (i/2) del log det g,

induces the tensor flow on the generated metrics; the induced-metric
consistency is checked against the chart engine.  The generalized-metric
monitor W packages (g, b = i del alpha) into an 8x8 symmetric matrix of unit
determinant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import chart, forms
from .errors import DomainError, SingularityError
from .frames import V_REAL_IN_COMPLEX, hermitian_to_riemannian
from .grid import ChartGrid, deriv_engine, min_eig_hermitian


@dataclass
class PotentialForm:
    """(1,0)-form potential over a flat background metric."""

    alpha: np.ndarray          # (2, grid) complex components alpha_i
    grid: ChartGrid
    background: np.ndarray | None = None   # Hermitian 2x2 constant, default Id

    def __post_init__(self):
        if self.alpha.shape != (2,) + self.grid.shape:
            raise DomainError("alpha must have shape (2, n, n, n, n)")
        if self.background is None:
            self.background = np.eye(2, dtype=complex)

    def copy(self):
        return PotentialForm(self.alpha.copy(), self.grid,
                             self.background.copy())


def metric_perturbation(a: PotentialForm):
    """Hermitian components of delbar(alpha) + del(conj alpha)."""
    eng = deriv_engine(a.grid)
    fh = eng.fft(a.alpha)
    fhc = eng.fft(np.conj(a.alpha))
    h = np.empty((2, 2) + a.grid.shape, dtype=complex)
    for i in range(2):
        for j in range(2):
            h[i, j] = 1j * eng.ifft(eng.antihol[j] * fh[i]) \
                - 1j * eng.ifft(eng.hol[i] * fhc[j])
    return h


def metric_from_alpha(a: PotentialForm) -> chart.HermitianField:
    """Generated metric; raises with the worst grid point if not positive."""
    G = a.background[..., None, None, None, None] + metric_perturbation(a)
    lo = min_eig_hermitian(G)
    m = float(lo.min())
    if m <= 0:
        idx = np.unravel_index(int(np.argmin(lo)), lo.shape)
        raise DomainError(f"generated metric degenerate: min eigenvalue "
                          f"{m:.3e} at grid point {idx}")
    return chart.HermitianField(G, a.grid)


def alpha_flow_rhs(a: PotentialForm):
    """Potential flow rate: delbar* omega - (i/2) del log det g."""
    hf = metric_from_alpha(a)
    eng = deriv_engine(a.grid)
    G = hf.G
    dG = chart._dG_all(G, eng)
    T = chart.torsion_tensor(dG)
    ginv = chart._ginv(G)
    beta = chart.delbar_star_omega(G, T, ginv)       # delbar* omega

    logdet = chart._logdet(G)
    fh = eng.fft(logdet)
    dlog = np.stack([eng.ifft(eng.hol[i] * fh) for i in range(2)])
    return beta - 0.5j * dlog


def induced_metric_rate(a: PotentialForm, rhs=None):
    """d/dt of the generated metric under the potential flow."""
    if rhs is None:
        rhs = alpha_flow_rhs(a)
    b = PotentialForm(rhs, a.grid, np.zeros((2, 2), dtype=complex))
    return metric_perturbation(b)


def w_matrix(a: PotentialForm):
    """Generalized-metric monitor W in Sym^2(T + T*), shape (8, 8, grid).

    W = [[g - b g^{-1} b, b g^{-1}], [-g^{-1} b, g^{-1}]] with b the real
    2-form i del alpha + conj; det W = 1 identically and W > 0.
    """
    hf = metric_from_alpha(a)
    eng = deriv_engine(a.grid)
    g = hermitian_to_riemannian(hf.G)
    ginv, _ = forms.metric_aux(g)

    # b-field: real form with (2,0) part i del alpha
    fh = eng.fft(a.alpha)
    dal = np.empty((2, 2) + a.grid.shape, dtype=complex)   # del_i alpha_j
    for i in range(2):
        for j in range(2):
            dal[i, j] = eng.ifft(eng.hol[i] * fh[j])
    pa = dal - np.swapaxes(dal, 0, 1)                      # (del alpha)_{ij}
    bc = np.zeros((4, 4) + a.grid.shape, dtype=complex)    # complex frame
    bc[0, 1] = 1j * pa[0, 1]
    bc[1, 0] = -bc[0, 1]
    bc[2, 3] = np.conj(bc[0, 1])
    bc[3, 2] = -bc[2, 3]
    W = V_REAL_IN_COMPLEX
    b = np.real(np.einsum('Aa,Bb,AB...->ab...', W, W, bc))

    bg = np.einsum('ac...,cd...,db...->ab...', b, ginv, b)
    top_left = g - bg
    top_right = np.einsum('ac...,cb...->ab...', b, ginv)
    bot_left = -np.einsum('ac...,cb...->ab...', ginv, b)
    out = np.zeros((8, 8) + a.grid.shape)
    out[:4, :4] = top_left
    out[:4, 4:] = top_right
    out[4:, :4] = bot_left
    out[4:, 4:] = ginv
    return out


def w_det_defect(Wm):
    """Sup of |det W - 1| over the grid."""
    mat = np.moveaxis(Wm, (0, 1), (-2, -1))
    return float(np.abs(np.linalg.det(mat) - 1.0).max())


@dataclass
class PotentialFlowResult:
    times: np.ndarray
    flat_distances: np.ndarray
    torsion_l2: np.ndarray
    det_w_defects: np.ndarray
    pairings: np.ndarray | None
    final: PotentialForm
    final_metric: chart.HermitianField
    singular: bool = False


def run_potential_flow(a0: PotentialForm, t_end, cfl_c=0.2, record_every=10,
                       gamma=None) -> PotentialFlowResult:
    """RK4 integration of the potential flow with flat-distance diagnostics."""
    grid = a0.grid
    dt = chart.cfl_timestep(grid, cfl_c)
    nsteps = max(1, int(np.ceil(t_end / dt - 1e-12)))
    dt = t_end / nsteps
    eng = deriv_engine(grid)

    a = a0.copy()
    rows = {k: [] for k in ("t", "dist", "tors", "detw", "pair")}

    def record(t):
        hf = metric_from_alpha(a)
        rows["t"].append(t)
        rows["dist"].append(chart.flat_distance(hf))
        H = chart.torsion_three_form(hf, eng)
        gR = hermitian_to_riemannian(hf.G)
        ginv, sq = forms.metric_aux(gR)
        h2 = forms.form_inner(3, H, H, ginv, sq)
        rows["tors"].append(float(np.sqrt(h2.sum() * grid.cell_volume)))
        rows["detw"].append(w_det_defect(w_matrix(a)))
        rows["pair"].append(chart.gamma_pairing(hf, gamma)
                            if gamma is not None else np.nan)

    record(0.0)
    singular = False
    for istep in range(nsteps):
        try:
            k1 = alpha_flow_rhs(a)
            k2 = alpha_flow_rhs(PotentialForm(a.alpha + 0.5 * dt * k1, grid,
                                              a.background))
            k3 = alpha_flow_rhs(PotentialForm(a.alpha + 0.5 * dt * k2, grid,
                                              a.background))
            k4 = alpha_flow_rhs(PotentialForm(a.alpha + dt * k3, grid,
                                              a.background))
        except DomainError as exc:
            singular = True
            break
        a = PotentialForm(a.alpha + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4),
                          grid, a.background)
        if (istep + 1) % record_every == 0 or istep == nsteps - 1:
            record((istep + 1) * dt)

    hf = metric_from_alpha(a)
    return PotentialFlowResult(
        times=np.array(rows["t"]), flat_distances=np.array(rows["dist"]),
        torsion_l2=np.array(rows["tors"]), det_w_defects=np.array(rows["detw"]),
        pairings=np.array(rows["pair"]) if gamma is not None else None,
        final=a, final_metric=hf, singular=singular)
