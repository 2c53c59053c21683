import numpy as np
from pcflab.grid import ChartGrid, deriv_engine
from pcflab import chart, forms, riemann, grf, sampling
from pcflab.frames import hermitian_to_riemannian, herm_to_real2

rng = np.random.default_rng(1)
grid = ChartGrid(points_per_axis=16)
eng = deriv_engine(grid)

hf, _, _ = sampling.random_pluriclosed_metric(grid, rng, amplitude=0.2, kmax=2, nmodes=8)
g, H, theta = grf.pluriclosed_to_grf(hf)
ginv, sq = forms.metric_aux(g)

# Lee form from d omega = theta ^ omega, solved pointwise by least squares
omega = herm_to_real2(hf.G)
dw = forms.d2_compact(omega, eng)   # compact triples
# (theta ^ omega)_{abc} = th_a w_bc - th_b w_ac + th_c w_ab
P = grid.num_points
A = np.zeros((P, 4, 4))  # triple index t, unknown a
W = omega.reshape(4, 4, P)
for t, (a, b, c) in enumerate(forms.TRIPLES):
    for m in range(4):
        A[:, t, m] = ((m == a) * W[b, c] + (m == b) * W[c, a] + (m == c) * W[a, b]).reshape(P)
rhsv = dw.reshape(4, P).T[..., None]
theta_lee = np.linalg.solve(A, rhsv)[..., 0].T.reshape(4, *grid.shape)
resid = np.abs(np.einsum('ptm,mp->tp', A, theta_lee.reshape(4, P)) - dw.reshape(4, P)).max()
print("lee residual (is domega = theta^omega solvable?):", resid)
print("theta_lee vs *H:", np.abs(theta_lee - theta).max(), " vs -*H:", np.abs(theta_lee + theta).max(),
      "scale:", np.abs(theta).max())

# best Lie coefficient by least squares
ric = riemann.ricci(g, eng, ginv, sq)
hsq = riemann.h_square(H, ginv)
rate, _ = chart.pcf_rhs(hf, pluriclosed_tol=None, with_report=False)
rhs = hermitian_to_riemannian(rate)
base_t = -2 * ric + 0.5 * hsq

for name, th in [("starH", theta), ("lee", theta_lee)]:
    tv = np.einsum('ab...,b...->a...', ginv, th)
    lie = riemann.lie_derivative_metric(tv, g, eng)
    num = float(((rhs - base_t) * lie).sum())
    den = float((lie * lie).sum())
    c = num / den
    d = np.abs(base_t + c * lie - rhs).max()
    print(f"{name}: best coeff {c:.6f}, defect at best {d:.3e}; at -1: "
          f"{np.abs(base_t - lie - rhs).max():.3e}")
