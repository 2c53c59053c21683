"""Lie-algebraic reduction of the flow on 4-dimensional model geometries.

Each model carries structure constants c[k,i,j] ([e_i, e_j] = c[k,i,j] e_k)
and a constant integrable complex structure J.  Left-invariant Hermitian
metrics are parameterized by 4 reals (two positive diagonal entries plus one
complex off-diagonal entry) in a J-adapted frame, and the flow reduces to an
ODE system for these parameters, integrated with adaptive RK45.

The flow rate is the algebraic counterpart of the chart computation: Koszul
formula for the Levi-Civita part, Chevalley-Eilenberg differentials for the
torsion 3-form, and the trace of the torsion-corrected connection projected
to (1,0) vectors for the Bismut Ricci form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (DomainError, PcflabError, PreconditionError,
                     StiffnessError, ValidationError)
from .frames import riemannian_to_hermitian, hermitian_to_riemannian

MODEL_NAMES = ("R4", "torus", "Hopf", "Nil3xR", "Sol0_4", "Sol1_4",
               "Sol1_4_prime", "SL2tilde_xR", "H2xR2", "H2xH2")

EIG_FLOOR = 1e-8
RM_CAP = 1e8


def _c_empty():
    return np.zeros((4, 4, 4))


def _set_bracket(c, k, i, j, v):
    c[k, i, j] = v
    c[k, j, i] = -v


def _j_pairs(p01=True, p23=True):
    """J with J e1 = e2 and J e3 = e4 (the standard pairing)."""
    J = np.zeros((4, 4))
    J[1, 0], J[0, 1] = 1.0, -1.0
    J[3, 2], J[2, 3] = 1.0, -1.0
    return J


def _model_table():
    table = {}

    c = _c_empty()
    table["R4"] = (c, _j_pairs())
    table["torus"] = (c.copy(), _j_pairs())

    c = _c_empty()   # su(2) + R: unit round sphere normalization
    _set_bracket(c, 2, 0, 1, 2.0)
    _set_bracket(c, 0, 1, 2, 2.0)
    _set_bracket(c, 1, 2, 0, 2.0)
    table["Hopf"] = (c, _j_pairs())

    c = _c_empty()   # Heisenberg + R, center e3
    _set_bracket(c, 2, 0, 1, 1.0)
    table["Nil3xR"] = (c, _j_pairs())

    c = _c_empty()   # R^3 expanding/contracting under e4
    _set_bracket(c, 0, 3, 0, 1.0)
    _set_bracket(c, 1, 3, 1, 1.0)
    _set_bracket(c, 2, 3, 2, -2.0)
    table["Sol0_4"] = (c, _j_pairs())

    c = _c_empty()   # nilradical Heisenberg, ad_{e4} = diag(1, -1, 0)
    _set_bracket(c, 0, 3, 0, 1.0)
    _set_bracket(c, 1, 3, 1, -1.0)
    _set_bracket(c, 2, 1, 0, 1.0)
    # two inequivalent complex structures: J pairs (e1,e4),(e2,e3) or
    # (e1,e3),(e2,e4); both solve the integrability equations
    JA = np.zeros((4, 4))
    JA[3, 0], JA[0, 3] = -1.0, 1.0
    JA[2, 1], JA[1, 2] = 1.0, -1.0
    JB = np.zeros((4, 4))
    JB[2, 0], JB[0, 2] = 1.0, -1.0
    JB[3, 1], JB[1, 3] = -1.0, 1.0
    table["Sol1_4"] = (c, JA)
    table["Sol1_4_prime"] = (c.copy(), JB)

    c = _c_empty()   # sl(2,R) + R in the rotating basis (v, h, u) + e4
    _set_bracket(c, 2, 0, 1, -2.0)   # [v, h] = -2u
    _set_bracket(c, 1, 2, 0, 2.0)    # [u, v] = 2h
    _set_bracket(c, 0, 2, 1, -2.0)   # [u, h] = -2v
    table["SL2tilde_xR"] = (c, _j_pairs())

    c = _c_empty()   # hyperbolic-plane algebra + R^2
    _set_bracket(c, 0, 1, 0, 1.0)    # [e2, e1] = e1
    table["H2xR2"] = (c, _j_pairs())

    c = _c_empty()
    _set_bracket(c, 0, 1, 0, 1.0)
    _set_bracket(c, 2, 3, 2, 1.0)    # [e4, e3] = e3
    table["H2xH2"] = (c, _j_pairs())

    return table


_TABLE = _model_table()


@dataclass(frozen=True)
class LieModel:
    name: str
    c: np.ndarray    # structure constants c[k, i, j]
    J: np.ndarray    # integrable complex structure
    frame: np.ndarray  # columns: J-adapted basis (f1, Jf1, f3, Jf3) in e-basis

    def bracket(self, X, Y):
        return np.einsum('kij,i,j->k', self.c, X, Y)


def jacobi_defect(c):
    d = np.einsum('mij,lmk->lijk', c, c)
    cyc = d + np.moveaxis(d, (1, 2, 3), (2, 3, 1)) + np.moveaxis(d, (1, 2, 3), (3, 1, 2))
    return float(np.abs(cyc).max())


def nijenhuis_defect(c, J):
    best = 0.0
    E = np.eye(4)
    for a in range(4):
        for b in range(a + 1, 4):
            X, Y = E[a], E[b]
            br = lambda u, v: np.einsum('kij,i,j->k', c, u, v)
            N = (br(J @ X, J @ Y) - J @ br(J @ X, Y)
                 - J @ br(X, J @ Y) - br(X, Y))
            best = max(best, float(np.abs(N).max()))
    return best


def _adapted_frame(J):
    """Columns (f1, Jf1, f3, Jf3) with f1 = e1 and f3 the first basis vector
    outside span(f1, Jf1)."""
    f1 = np.eye(4)[0]
    f2 = J @ f1
    for k in range(1, 4):
        cand = np.eye(4)[k]
        M = np.column_stack([f1, f2, cand, J @ cand])
        if abs(np.linalg.det(M)) > 1e-8:
            return M
    raise PcflabError("could not build a J-adapted frame")


def build_model(name: str) -> LieModel:
    """Structure constants and integrable J for a supported model geometry."""
    if name not in _TABLE:
        raise ValidationError(f"unsupported model {name!r}; choose from "
                              f"{MODEL_NAMES}", field="model")
    c, J = _TABLE[name]
    jd = jacobi_defect(c)
    if jd > 1e-12:
        raise PcflabError(f"structure constants violate Jacobi: {jd:.3e}")
    if np.abs(J @ J + np.eye(4)).max() > 1e-12:
        raise PcflabError("J*J != -Id")
    nd = nijenhuis_defect(c, J)
    if nd > 1e-12:
        raise PcflabError(f"J not integrable: Nijenhuis defect {nd:.3e}")
    return LieModel(name=name, c=c.copy(), J=J.copy(), frame=_adapted_frame(J))


@dataclass
class InvariantMetric:
    """4-parameter chart (p1, p2, Re z, Im z) of invariant Hermitian metrics."""

    params: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        if self.params.shape != (4,):
            raise DomainError("params must be a real 4-vector")

    @property
    def herm(self):
        p1, p2, zr, zi = self.params
        return np.array([[p1, zr + 1j * zi], [zr - 1j * zi, p2]])

    def validate(self):
        G = self.herm
        if G[0, 0].real <= 0 or np.linalg.det(G).real <= 0:
            raise DomainError("invariant metric parameters not positive")
        return self

    def metric(self, model: LieModel):
        """Riemannian matrix g[a,b] = g(e_a, e_b) in the algebra basis."""
        gf = hermitian_to_riemannian(self.herm)
        Finv = np.linalg.inv(model.frame)
        return Finv.T @ gf @ Finv

    @staticmethod
    def from_metric(model: LieModel, g):
        gf = model.frame.T @ g @ model.frame
        G = riemannian_to_hermitian(gf)
        return InvariantMetric(np.array([G[0, 0].real, G[1, 1].real,
                                         G[0, 1].real, G[0, 1].imag]))


def koszul(model: LieModel, g):
    """Levi-Civita data Gamma_{ab,c} = <nabla_{e_a} e_b, e_c> (constants).

    2 Gamma_{ab,c} = <[e_a,e_b],e_c> - <[e_b,e_c],e_a> + <[e_c,e_a],e_b>.
    """
    br = np.einsum('mab,mc->abc', model.c, g)   # <[e_a, e_b], e_c>
    return 0.5 * (br - np.moveaxis(br, (0, 1, 2), (1, 2, 0))
                  + np.moveaxis(br, (0, 1, 2), (2, 0, 1)))


def ce_d2(model: LieModel, beta):
    """Chevalley-Eilenberg differential of an invariant 2-form."""
    c = model.c
    # (d beta)(X,Y,Z) = -beta([X,Y],Z) - beta([Y,Z],X) - beta([Z,X],Y)
    t = (np.einsum('mab,mc->abc', c, beta)
         + np.einsum('mbc,ma->abc', c, beta)
         + np.einsum('mca,mb->abc', c, beta))
    return -t


def ce_d3(model: LieModel, H):
    """CE differential of an invariant 3-form (full antisymmetric array)."""
    c = model.c
    out = np.zeros((4, 4, 4, 4))
    idx = range(4)
    for a in idx:
        for b in idx:
            for d in idx:
                for e in idx:
                    v = 0.0
                    args = [a, b, d, e]
                    for i in range(4):
                        for j in range(i + 1, 4):
                            rest = [args[k] for k in range(4) if k not in (i, j)]
                            brk = c[:, args[i], args[j]]
                            v += (-1) ** (i + j) * np.einsum('m,m->', brk,
                                                             H[:, rest[0], rest[1]])
                    out[a, b, d, e] = -v
    return out


def kahler_form(model: LieModel, g):
    """omega[a,b] = g(J e_a, e_b)."""
    return model.J.T @ g


def torsion_form(model: LieModel, g, dc_sign=1):
    """Invariant torsion 3-form H = (d omega)(J., J., J.)."""
    omega = kahler_form(model, g)
    dw = ce_d2(model, omega)
    J = model.J
    return dc_sign * np.einsum('xyz,xa,yb,zc->abc', dw, J, J, J)


def pluriclosed_defect(model: LieModel, g, dc_sign=1):
    """Top component of d H; vanishes iff the invariant metric is pluriclosed."""
    H = torsion_form(model, g, dc_sign)
    dH = ce_d3(model, H)
    return float(np.abs(dH).max())


def _complex_frame(model: LieModel):
    F = model.frame
    eps1 = 0.5 * (F[:, 0] - 1j * F[:, 1])
    eps2 = 0.5 * (F[:, 2] - 1j * F[:, 3])
    W = np.column_stack([eps1, eps2, eps1.conj(), eps2.conj()])
    return W, np.linalg.inv(W)


def bismut_ricci_11(model: LieModel, g, dc_sign=1):
    """(1,1) part of the Bismut Ricci form, as an invariant real 2-form."""
    gamma = koszul(model, g)                      # Gamma_{ab,c}
    H = torsion_form(model, g, dc_sign)
    gb = gamma + 0.5 * H
    ginv = np.linalg.inv(g)
    A = np.einsum('abd,cd->acb', gb, ginv)        # A[a]^c_b endo matrices
    W, Winv = _complex_frame(model)
    phi = np.zeros(4, dtype=complex)
    for a in range(4):
        Ae = Winv @ A[a] @ W
        phi[a] = np.trace(Ae[:2, :2])
    # rho[a,b] = -i phi_m c[m,a,b]  (frame curvature trace; commutator part
    # is traceless)
    rho = -1j * np.einsum('m,mab->ab', phi, model.c)
    if np.abs(rho.imag).max() > 1e-10 * max(1.0, np.abs(rho).max()):
        raise PcflabError("Bismut Ricci form came out non-real")
    rho = rho.real
    J = model.J
    rho11 = 0.5 * (rho + np.einsum('xy,xa,yb->ab', rho, J, J))
    return rho11


def invariant_pcf_rhs(model: LieModel, m: InvariantMetric, dc_sign=1):
    """Parameter-space rate of the flow: d params / dt."""
    m.validate()
    g = m.metric(model)
    if np.linalg.eigvalsh(g).min() <= 0:
        raise DomainError("metric degenerate")
    rho11 = bismut_ricci_11(model, g, dc_sign)
    gdot = -rho11 @ model.J                       # gdot[a,b] = -rho11(e_a, J e_b)
    gdot = 0.5 * (gdot + gdot.T)
    gf = model.frame.T @ gdot @ model.frame
    Gd = riemannian_to_hermitian(gf)
    return np.array([Gd[0, 0].real, Gd[1, 1].real, Gd[0, 1].real, Gd[0, 1].imag])


def metric_rate_tensor(model: LieModel, m: InvariantMetric, dc_sign=1):
    """Flow rate as the invariant symmetric tensor dg/dt in the e-basis."""
    g = m.metric(model)
    rho11 = bismut_ricci_11(model, g, dc_sign)
    gdot = -rho11 @ model.J
    return 0.5 * (gdot + gdot.T)


def lc_endos(model: LieModel, g):
    gamma = koszul(model, g)
    ginv = np.linalg.inv(g)
    return np.einsum('abd,cd->acb', gamma, ginv)   # Gam[a]^c_b


def riemann_tensor(model: LieModel, g):
    """R[d,a,b,c] = R^d_{abc} with R(e_a,e_b) e_c = R^d_{abc} e_d."""
    Gam = lc_endos(model, g)
    comm = np.einsum('axe,bec->abxc', Gam, Gam) - np.einsum('bxe,aec->abxc', Gam, Gam)
    connect = np.einsum('mab,mxc->abxc', model.c, Gam)
    R = comm - connect
    return np.einsum('abxc->xabc', R)


def ricci_tensor(model: LieModel, g):
    R = riemann_tensor(model, g)
    return np.einsum('aabc->bc', R)


def riemann_norm(model: LieModel, g):
    R = riemann_tensor(model, g)
    Rl = np.einsum('de,eabc->dabc', g, R)
    gi = np.linalg.inv(g)
    up = np.einsum('dx,ay,bz,cw,xyzw->dabc', gi, gi, gi, gi, Rl)
    return float(np.sqrt(max(0.0, np.einsum('dabc,dabc->', Rl, up))))


@dataclass
class Trajectory:
    model_name: str
    times: np.ndarray
    params: np.ndarray        # (n, 4)
    rm_norms: np.ndarray
    volumes: np.ndarray
    eigenvalues: np.ndarray   # (n, 4) metric eigenvalues in the e-basis
    singular: bool
    singular_reason: str = ""

    @property
    def t_final(self):
        return float(self.times[-1])


def integrate(model: LieModel, m0: InvariantMetric, t_end, normalized=False,
              rtol=1e-8, atol=1e-12, dc_sign=1, n_eval=400, log_spacing=True,
              method="RK45"):
    """Adaptive RK45 trajectory of the parameter ODE with degeneracy guards.

    method="LSODA" is available for very long horizons, where collapsing
    directions make the explicit solver stability-limited.
    """
    m0.validate()

    def rhs(t, y):
        m = InvariantMetric(y)
        r = invariant_pcf_rhs(model, m, dc_sign)
        if normalized:
            g = m.metric(model)
            gd = metric_rate_tensor(model, m, dc_sign)
            trace = np.einsum('ab,ab->', np.linalg.inv(g), gd)
            r = r - 0.25 * trace * y
        return r

    def ev_eig(t, y):
        g = InvariantMetric(y).metric(model)
        return np.linalg.eigvalsh(g).min() - EIG_FLOOR
    ev_eig.terminal = True
    ev_eig.direction = -1

    def ev_rm(t, y):
        g = InvariantMetric(y).metric(model)
        return RM_CAP - riemann_norm(model, g)
    ev_rm.terminal = True
    ev_rm.direction = -1

    if log_spacing and t_end > 1.0:
        t_eval = np.concatenate([np.linspace(0, 1, max(2, n_eval // 4),
                                             endpoint=False),
                                 np.geomspace(1.0, t_end, n_eval)])
    else:
        t_eval = np.linspace(0, t_end, n_eval)

    sol = solve_ivp(rhs, (0.0, t_end), m0.params, method=method,
                    rtol=rtol, atol=atol, t_eval=t_eval,
                    events=(ev_eig, ev_rm), dense_output=False)
    if sol.status == -1:
        raise StiffnessError(f"integration failed: {sol.message}")

    times = sol.t
    params = sol.y.T
    if sol.status == 1:   # terminated by an event
        for te, ye in zip(sol.t_events, sol.y_events):
            if len(te):
                times = np.append(times, te[0])
                params = np.vstack([params, ye[0]])
        singular = True
        reason = ("metric eigenvalue floor" if len(sol.t_events[0])
                  else "curvature cap")
    else:
        singular = False
        reason = ""

    rms, vols, eigs = [], [], []
    for y in params:
        g = InvariantMetric(y).metric(model)
        rms.append(riemann_norm(model, g))
        vols.append(float(np.sqrt(max(np.linalg.det(g), 0.0))))
        eigs.append(np.linalg.eigvalsh(g))
    return Trajectory(model_name=model.name, times=times, params=params,
                      rm_norms=np.array(rms), volumes=np.array(vols),
                      eigenvalues=np.array(eigs), singular=singular,
                      singular_reason=reason)


IIB_THRESHOLD = 1e3
III_THRESHOLD = 1e2


@dataclass
class Classification:
    verdict: str              # finite_time_I | infinite_IIb | infinite_III | inconclusive
    stat_final: float
    collapse_profile: np.ndarray | None
    detail: str = ""


def _profile_eigs(model: LieModel, g):
    """Eigenvalues of g matched to the fixed algebra directions by overlap."""
    w, v = np.linalg.eigh(g)
    order = np.argmax(np.abs(v), axis=1)  # v[:, k]: dominant axis of vector k
    out = np.full(4, np.nan)
    used = set()
    for k in np.argsort(-np.abs(v).max(axis=0)):
        a = int(np.argmax(np.abs(v[:, k])))
        while a in used:
            cand = np.argsort(-np.abs(v[:, k]))
            a = next(int(x) for x in cand if int(x) not in used)
        used.add(a)
        out[a] = w[k]
    return out


def classify_asymptotics(model: LieModel, traj: Trajectory) -> Classification:
    """Type I/IIb/III verdict from the |Rm| t statistic with hysteresis."""
    if traj.singular:
        return Classification(verdict="finite_time_I",
                              stat_final=float(traj.rm_norms[-1] * traj.t_final),
                              collapse_profile=None,
                              detail=traj.singular_reason)
    if traj.t_final < 100.0:
        return Classification(verdict="inconclusive", stat_final=np.nan,
                              collapse_profile=None,
                              detail="trajectory too short (t_end < 100)")
    t = traj.times
    stat = traj.rm_norms * t
    window = t >= traj.t_final / 10.0
    sw, tw = stat[window], t[window]
    ghat = InvariantMetric(traj.params[-1]).metric(model) / traj.t_final
    profile = _profile_eigs(model, ghat)
    increasing = sw[-1] > 1.5 * sw[0]
    if sw.min() > IIB_THRESHOLD and increasing:
        return Classification("infinite_IIb", float(sw[-1]), profile)
    if sw.max() <= III_THRESHOLD:
        return Classification("infinite_III", float(sw[-1]), profile)
    return Classification("inconclusive", float(sw[-1]), profile,
                          detail="statistic between hysteresis thresholds")


@dataclass
class BlowdownResult:
    s_values: np.ndarray
    rescaled: list                  # InvariantMetric per s
    soliton_defects: np.ndarray     # |G_s - rate(G_s)| per s
    ss_defects: np.ndarray          # normalized self-similarity increments
    limit: InvariantMetric | None   # Richardson-extrapolated blowdown limit
    limit_defect: float


def _soliton_defect(model, Gs, dc_sign):
    """|g - rate(g)| for a rescaled metric: zero exactly on expanding
    solitons (trajectories linear in time have rate(g) = g after rescale)."""
    try:
        rate = metric_rate_tensor(model, Gs, dc_sign)
        return float(np.abs(Gs.metric(model) - rate).max())
    except (DomainError, np.linalg.LinAlgError):
        return np.nan


def blowdown(model: LieModel, traj: Trajectory, s_list, dc_sign=1) -> BlowdownResult:
    """Rescaled metrics G_s = s^{-1} g(s) with self-similarity diagnostics.

    ss_defects[i] compares direction-normalized G_{s_i} with G_{s_{i-1}}; it
    vanishes identically on exactly self-similar (or constant) trajectories.
    soliton_defects measures the expanding-soliton identity g = rate(g) at
    each G_s; the initial data enters as a 1/s transient, which the
    Richardson-extrapolated limit removes when the limit is nondegenerate.
    """
    if traj.singular:
        raise PreconditionError("blowdown needs an infinite-time trajectory")
    s_list = sorted(float(s) for s in s_list)
    rescaled, defects = [], []
    for s in s_list:
        if s > traj.t_final + 1e-9:
            raise DomainError(f"s={s} beyond integrated horizon {traj.t_final}")
        y = np.array([np.interp(s, traj.times, traj.params[:, k])
                      for k in range(4)])
        Gs = InvariantMetric(y / s)
        rescaled.append(Gs)
        defects.append(_soliton_defect(model, Gs, dc_sign))

    ss = []
    for i in range(1, len(rescaled)):
        a = rescaled[i - 1].params
        b = rescaled[i].params
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            ss.append(0.0 if na == nb else np.inf)
        else:
            ss.append(float(np.linalg.norm(b / nb - a / na)))

    limit = None
    limit_defect = np.nan
    if len(s_list) >= 2:
        s1, s2 = s_list[-2], s_list[-1]
        y1, y2 = rescaled[-2].params, rescaled[-1].params
        cand = InvariantMetric((s2 * y2 - s1 * y1) / (s2 - s1))
        try:
            cand.validate()
            limit = cand
            limit_defect = _soliton_defect(model, limit, dc_sign)
        except DomainError:
            limit = None
    return BlowdownResult(s_values=np.array(s_list), rescaled=rescaled,
                          soliton_defects=np.array(defects),
                          ss_defects=np.array(ss), limit=limit,
                          limit_defect=limit_defect)



@dataclass
class InoueLattice:
    Z: np.ndarray
    alpha: float
    beta: complex
    a: np.ndarray            # real eigenvector for alpha
    b: np.ndarray            # complex eigenvector for beta
    generators: list

    def validate(self):
        if abs(round(float(np.linalg.det(self.Z))) - 1) > 1e-9:
            raise DomainError("det Z != 1")
        if abs(self.alpha * abs(self.beta) ** 2 - 1.0) > 1e-9:
            raise DomainError("eigenvalue product != 1")
        M = np.column_stack([self.a, self.b.real, self.b.imag])
        if abs(np.linalg.det(M)) < 1e-12:
            raise DomainError("(a_i, b_i) not linearly independent over R")
        return self


def inoue_lattice(Z) -> InoueLattice:
    """Eigen-data and affine generators for a quotient-surface lattice.

    Z must be an integer matrix with det 1, one real eigenvalue > 1 and a
    complex-conjugate pair.
    """
    Z = np.asarray(Z)
    if Z.shape != (3, 3) or not np.allclose(Z, np.round(Z)):
        raise DomainError("Z must be an integer 3x3 matrix")
    if round(float(np.linalg.det(Z))) != 1:
        raise DomainError("not an admissible matrix: det != 1")
    w, V = np.linalg.eig(Z)
    real_mask = np.abs(w.imag) < 1e-12
    if real_mask.sum() != 1:
        raise DomainError("not an admissible matrix: need exactly one real "
                          "eigenvalue and a complex pair")
    ir = int(np.argmax(real_mask))
    alpha = float(w[ir].real)
    if alpha <= 1.0:
        raise DomainError("not an admissible matrix: real eigenvalue <= 1")
    ic = [i for i in range(3) if i != ir and w[i].imag > 0]
    if not ic:
        ic = [i for i in range(3) if i != ir]
    beta = complex(w[ic[0]])
    a = np.real(V[:, ir])
    a = a / np.linalg.norm(a)
    b = V[:, ic[0]]

    def g0(wz):
        return (alpha * wz[0], beta * wz[1])

    gens = [("g0", g0)]
    for i in range(3):
        def gi(wz, i=i):
            return (wz[0] + a[i], wz[1] + b[i])
        gens.append((f"g{i+1}", gi))
    lat = InoueLattice(Z=Z.astype(int), alpha=alpha, beta=beta, a=a, b=b,
                       generators=gens)
    return lat.validate()


def hopf_round_metric() -> InvariantMetric:
    """Parameters of the round product metric (unit sphere times unit line)."""
    return InvariantMetric(np.array([0.5, 0.5, 0.0, 0.0]))


def distance_to_ray(m: InvariantMetric, ray: InvariantMetric):
    """Relative distance of a metric to the ray through a reference metric."""
    p, q = m.params, ray.params
    lam = float(p @ q) / float(q @ q)
    return float(np.linalg.norm(p - lam * q) / np.linalg.norm(p))


# ---------------------------------------------------------------------------
# constant-tensor (algebra backend) Riemannian helpers
# ---------------------------------------------------------------------------

def algebra_h_square(H, g):
    gi = np.linalg.inv(g)
    return np.einsum('apq,brs,pr,qs->ab', H, H, gi, gi)


def algebra_h_norm2(H, g):
    gi = np.linalg.inv(g)
    return float(np.einsum('pqr,xyz,px,qy,rz->', H, H, gi, gi, gi))


def algebra_scalar_curvature(model: LieModel, g):
    return float(np.einsum('ab,ab->', np.linalg.inv(g),
                           ricci_tensor(model, g)))


def algebra_codiff3(model: LieModel, H, g):
    """d*H for an invariant 3-form: -*d*H with the frame Hodge star."""
    from .frames import LEVI_CIVITA_4
    gi = np.linalg.inv(g)
    sq = np.sqrt(np.linalg.det(g))
    up = np.einsum('ax,by,cz,xyz->abc', gi, gi, gi, H)
    theta = (sq / 6.0) * np.einsum('abcd,abc->d', LEVI_CIVITA_4, up)
    # d of the invariant 1-form theta: (d th)(X,Y) = -th([X,Y])
    dth = -np.einsum('m,mab->ab', theta, model.c)
    thup = np.einsum('ac,bd,cd->ab', gi, gi, dth)
    return -0.5 * sq * np.einsum('abcd,ab->cd', LEVI_CIVITA_4, thup)


def algebra_soliton_residual(model: LieModel, g, H):
    """Residuals (Rc - H^2/4, d*H) for an invariant state with constant f."""
    ric = ricci_tensor(model, g)
    met = ric - 0.25 * algebra_h_square(H, g)
    tors = algebra_codiff3(model, H, g)
    return met, tors


def hopf_grf_state():
    """Round product data: unit sphere metric with H twice its volume form.

    In this normalization Rc - H^2/4 = 0 and d*H = 0 hold exactly.
    """
    model = build_model("Hopf")
    g = np.eye(4)
    H = np.zeros((4, 4, 4))
    for (a, b, c) in [(0, 1, 2)]:
        for perm, sgn in [((a, b, c), 1), ((b, c, a), 1), ((c, a, b), 1),
                          ((b, a, c), -1), ((a, c, b), -1), ((c, b, a), -1)]:
            H[perm] = 2.0 * sgn
    return model, g, H
