import numpy as np
from pcflab.grid import ChartGrid, deriv_engine
from pcflab import chart, forms, riemann, grf, sampling

rng = np.random.default_rng(1)
grid = ChartGrid(points_per_axis=16)
eng = deriv_engine(grid)

# Ricci sanity: flat metric
g0 = np.zeros((4, 4) + grid.shape)
for a in range(4):
    g0[a, a] = 2.0
print("flat ricci:", np.abs(riemann.ricci(g0, eng)).max())

# Ricci vs conformally flat exact? Use Kaehler metric and compare 2*herm Ricci
# For a Kaehler metric, Riemannian Ricci = hermitian_to_riemannian of Ricci comps
f = 0.05 * np.cos(grid.axes()[0]) * np.sin(grid.axes()[1]) + 0.04 * np.sin(grid.axes()[2])
hess = chart._mixed_hessian(f, eng)
Gk = chart.flat_metric(grid).G + hess
hk = chart.HermitianField(Gk, grid)
from pcflab.frames import hermitian_to_riemannian
gk = hermitian_to_riemannian(Gk)
ric = riemann.ricci(gk, eng)
cf = chart.curvature_forms(hk)
ric_from_herm = hermitian_to_riemannian(-cf.rho_C)  # Ricci comps = rho_C comps? rho_C=-dd log det
# For Kaehler: Ricci tensor herm comps R_{ij} = -d_i d_jb log det g = rho_C comps
ric_from_herm2 = hermitian_to_riemannian(cf.rho_C)
print("kaehler Ricci vs herm(+rho_C):", np.abs(ric - ric_from_herm2).max(),
      " vs herm(-rho_C):", np.abs(ric - ric_from_herm).max(), "scale", np.abs(ric).max())

# gauge equivalence on random pluriclosed data
hf, modes, base = sampling.random_pluriclosed_metric(grid, rng, amplitude=0.4, kmax=2, nmodes=8)
print("pluriclosed residual:", chart.check_pluriclosed(hf))
print("min eig:", hf.min_eig())
rep = grf.gauge_equivalence_check(hf)
print("gauge defect:", rep)

# and with flipped dc sign (negative control)
rep_bad = grf.gauge_equivalence_check(hf, dc_sign=-1)
print("gauge defect flipped:", rep_bad["defect"], "scale", rep_bad["scale"])
