import numpy as np
from pcflab.grid import ChartGrid, deriv_engine
from pcflab import chart, forms, riemann, grf, sampling
from pcflab.frames import hermitian_to_riemannian

rng = np.random.default_rng(1)
grid = ChartGrid(points_per_axis=16)
eng = deriv_engine(grid)

hf, modes, base = sampling.random_pluriclosed_metric(grid, rng, amplitude=0.4, kmax=2, nmodes=8)
g, H, theta = grf.pluriclosed_to_grf(hf)
ginv, sq = forms.metric_aux(g)
ric = riemann.ricci(g, eng, ginv, sq)
hsq = riemann.h_square(H, ginv)
theta_vec = np.einsum('ab...,b...->a...', ginv, theta)
lie = riemann.lie_derivative_metric(theta_vec, g, eng)
rate, _ = chart.pcf_rhs(hf, pluriclosed_tol=None, with_report=False)
rhs = hermitian_to_riemannian(rate)

base_t = -2.0 * ric + 0.5 * hsq
for cl, name in [(-1, "-Lie"), (1, "+Lie"), (0, "0"), (-0.5, "-Lie/2"), (0.5, "+Lie/2")]:
    d = np.abs(base_t + cl * lie - rhs).max()
    print(f"lie coeff {name:7s}: defect {d:.6e}")
for ch, name in [(0.25, "H2/4"), (0.5, "H2/2"), (1.0, "H2")]:
    for cl in (-1, 1):
        d = np.abs(-2 * ric + ch * hsq + cl * lie - rhs).max()
        print(f"{name}, lie {cl:+d}: {d:.6e}")
print("scales: ric", np.abs(ric).max(), "hsq", np.abs(hsq).max(),
      "lie", np.abs(lie).max(), "rhs", np.abs(rhs).max())

# smaller amplitude: which terms fail at leading order?
for amp in (0.05, 0.1, 0.2):
    hf2, _, _ = sampling.random_pluriclosed_metric(grid, np.random.default_rng(7),
                                                   amplitude=amp, kmax=2, nmodes=8)
    g, H, theta = grf.pluriclosed_to_grf(hf2)
    ginv, sq = forms.metric_aux(g)
    ric = riemann.ricci(g, eng, ginv, sq)
    hsq = riemann.h_square(H, ginv)
    theta_vec = np.einsum('ab...,b...->a...', ginv, theta)
    lie = riemann.lie_derivative_metric(theta_vec, g, eng)
    rate, _ = chart.pcf_rhs(hf2, pluriclosed_tol=None, with_report=False)
    rhs = hermitian_to_riemannian(rate)
    d = np.abs(-2 * ric + 0.5 * hsq - lie - rhs).max()
    dn = np.abs(-2 * ric + 0.5 * hsq - rhs).max()
    print(f"amp {amp}: with -Lie {d:.3e}   without {dn:.3e}  (lie scale {np.abs(lie).max():.3e})")
