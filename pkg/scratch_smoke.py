"""Scratch validation of core conventions (not part of the package)."""
import numpy as np
from pcflab.grid import ChartGrid, deriv_engine
from pcflab import chart, forms
from pcflab.frames import (hermitian_to_riemannian, riemannian_to_hermitian,
                           herm_to_real2, real2_to_herm, J_STD)

rng = np.random.default_rng(0)
grid = ChartGrid(points_per_axis=16)
eng = deriv_engine(grid)
X = grid.axes()

# --- frame conversion roundtrips
G0 = np.array([[1.5, 0.2 + 0.1j], [0.2 - 0.1j, 1.1]], dtype=complex)
gR0 = hermitian_to_riemannian(G0)
print("roundtrip herm:", np.abs(riemannian_to_hermitian(gR0) - G0).max())
print("gR symmetric:", np.abs(gR0 - gR0.T).max(), "J-invariant:",
      np.abs(J_STD.T @ gR0 @ J_STD - gR0).max())
a = G0.copy()
psi = herm_to_real2(a)
print("2form roundtrip:", np.abs(real2_to_herm(psi) - a).max())
print("flat omega (G=I):", herm_to_real2(np.eye(2, dtype=complex)))

# --- flat metric: everything zero
hf = chart.flat_metric(grid)
print("flat pluriclosed:", chart.check_pluriclosed(hf))
cf = chart.curvature_forms(hf)
print("flat rho_C, rho_B11, S, Q1:", np.abs(cf.rho_C).max(),
      np.abs(cf.rho_B11).max(), np.abs(cf.S).max(), np.abs(cf.Q1).max())
rate, rep = chart.pcf_rhs(hf)
print("flat rate:", np.abs(rate).max(), "report:", rep)

# --- Kaehler perturbation: G = I + hess f
f = 0.05 * np.cos(X[0]) * np.sin(X[1]) + 0.04 * np.sin(X[2] + X[0]) + 0.03 * np.cos(X[3])
hess = chart._mixed_hessian(f, eng)
Gk = chart.flat_metric(grid).G + hess
hk = chart.HermitianField(Gk, grid)
print("\nkaehler hermitian defect:", np.abs(Gk - np.conj(np.swapaxes(Gk, 0, 1))).max())
print("kaehler pluriclosed:", chart.check_pluriclosed(hk))
tf = chart.chern_torsion(hk)
print("kaehler torsion:", np.abs(tf.T).max(), "H:", np.abs(tf.H).max())
cfk = chart.curvature_forms(hk)
print("kaehler rho_B11 vs rho_C:", np.abs(cfk.rho_B11 - cfk.rho_C).max())
print("kaehler S vs -rhoC? S-ricci:", np.abs(cfk.S - (-cfk.rho_C)).max())
print("kaehler Q1:", np.abs(cfk.Q1).max())
ratek, repk = chart.pcf_rhs(hk)
krr = chart.kahler_ricci_rate(hk)
print("kaehler rate vs KRF:", np.abs(ratek - krr).max())
print("kaehler report:", repk)

# --- alpha-generated pluriclosed (non-Kaehler)
eps = 0.1
alpha = np.zeros((2,) + grid.shape, dtype=complex)
alpha[0] = eps * np.exp(1j * X[2])
# omega_alpha = flat + dbar alpha + d alphabar; components h_{i jb} = i d_jb alpha_i - i d_i conj(alpha_j)
h = np.empty((2, 2) + grid.shape, dtype=complex)
for i in range(2):
    for j in range(2):
        h[i, j] = 1j * eng.dzbar(alpha[i], j) - 1j * eng.dz(np.conj(alpha[j]), i)
Ga = chart.flat_metric(grid).G + h
ha = chart.HermitianField(Ga, grid)
print("\nalpha hermitian defect:", np.abs(Ga - np.conj(np.swapaxes(Ga, 0, 1))).max())
print("alpha pluriclosed residual:", chart.check_pluriclosed(ha))
ta = chart.chern_torsion(ha)
print("alpha |T|:", np.abs(ta.T).max(), "|H|:", np.abs(ta.H).max())
dH = forms.d3_top(ta.H, eng)
print("alpha dH:", np.abs(dH).max())
ratea, repa = chart.pcf_rhs(ha)
print("alpha report: chern-bismut %.3e chern-hodge %.3e bismut-hodge %.3e" %
      (repa.chern_vs_bismut, repa.chern_vs_hodge, repa.bismut_vs_hodge))

# --- star operator checks on variable metric
gR = hermitian_to_riemannian(Ga)
ginv, sq = forms.metric_aux(gR)
omega = herm_to_real2(Ga)
so = forms.star2(omega, ginv, sq)
print("\nself-duality *omega = omega:", np.abs(so - omega).max())
# star-star on 1-form and 3-form
th = rng.normal(size=(4,) + grid.shape)
s1 = forms.star1(th, ginv, sq)
ss = forms.star3(s1, ginv, sq)
print("**theta + theta (should be 0; k=1 has **=-1):", np.abs(ss + th).max(), np.abs(ss - th).max())

# adjointness <d a, b>_2 = <a, d* b> for random smooth fields
def smooth_scalar():
    return (rng.normal() * np.cos(X[0] + 2 * X[3]) + rng.normal() * np.sin(X[1]) *
            np.cos(X[2]) + rng.normal() * np.sin(X[0] + X[2]))
a1 = np.stack([smooth_scalar() for _ in range(4)])
b2 = np.zeros((4, 4) + grid.shape)
for i in range(4):
    for j in range(i + 1, 4):
        b2[i, j] = smooth_scalar()
        b2[j, i] = -b2[i, j]
da = forms.d1(a1, eng)
lhs = (forms.form_inner(2, da, b2, ginv, sq)).sum() * grid.cell_volume
dstarb = forms.codiff2(b2, eng, ginv, sq)
rhs = (forms.form_inner(1, a1, dstarb, ginv, sq)).sum() * grid.cell_volume
print("adjoint <da,b> vs <a,d*b>:", lhs, rhs, abs(lhs - rhs))

# theta = *H consistency: dual pairing H = *theta up to sign (k=3: **=-1)
sH = forms.star1(ta.theta, ginv, sq)
print("H vs -*theta... *1(theta)+H:", np.abs(sH + ta.H).max(), "or -:", np.abs(sH - ta.H).max())

# conservation: gamma constant anti-self-dual
gamma = np.zeros((4, 4))
gamma[0, 1] = 1.0; gamma[1, 0] = -1.0
gamma[2, 3] = -1.0; gamma[3, 2] = 1.0
print("\npairing t=0:", chart.gamma_pairing(ha, gamma))
res = chart.run_chart_flow(ha, t_end=0.3, gamma=gamma, record_every=5)
print("flow residuals:", res.pluriclosed_residuals[[0, -1]])
print("pairing drift:", np.abs(res.pairings - res.pairings[0]).max())
print("flat distance start/end:", res.flat_distances[0], res.flat_distances[-1])
print("volumes:", res.volumes[[0, -1]])
