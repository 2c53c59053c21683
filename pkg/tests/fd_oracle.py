"""Finite-difference point oracles, independent of the spectral machinery.

All oracles evaluate callables (fields given in closed form) on small
4th-order central-difference stencils around a single point, so their
accuracy is set by the stencil spacing rather than any grid.  They exist
solely to cross-check the package implementations.
"""

import numpy as np

D1_STENCIL = [(-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12)]
D2_STENCIL = [(-2, -1.0 / 12), (-1, 16.0 / 12), (0, -30.0 / 12),
              (1, 16.0 / 12), (2, -1.0 / 12)]


def fd1(fun, x, a, h=2e-2):
    """4th-order first derivative of fun along real axis a at point x."""
    x = np.asarray(x, dtype=float)
    acc = 0.0
    for off, w in D1_STENCIL:
        xp = x.copy()
        xp[a] += off * h
        acc = acc + w * np.asarray(fun(xp))
    return acc / h


def fd2(fun, x, a, b, h=2e-2):
    """4th-order second derivative (mixed case via nested first derivatives)."""
    if a == b:
        x = np.asarray(x, dtype=float)
        acc = 0.0
        for off, w in D2_STENCIL:
            xp = x.copy()
            xp[a] += off * h
            acc = acc + w * np.asarray(fun(xp))
        return acc / h ** 2
    return fd1(lambda y: fd1(fun, y, b, h), x, a, h)


def wirt(fun, x, i, conj=False, h=2e-2):
    """Wirtinger derivative d/dz^i (or d/dzbar^i) via real stencils."""
    a, b = (0, 1) if i == 0 else (2, 3)
    du = fd1(fun, x, a, h)
    dv = fd1(fun, x, b, h)
    return 0.5 * (du + 1j * dv) if conj else 0.5 * (du - 1j * dv)


def christoffel_point(gfun, x, h=2e-2):
    """Levi-Civita symbols Gamma^c_{ab} at x for a metric callable gfun."""
    g = np.asarray(gfun(x))
    ginv = np.linalg.inv(g)
    dg = np.stack([fd1(gfun, x, a, h) for a in range(4)])
    low = 0.5 * (dg + np.einsum('bad->abd', dg) - np.einsum('dab->abd', dg))
    return np.einsum('cd,abd->cab', ginv, low)


def riemann_point(gfun, x, h=2e-2):
    """Curvature R^d_{abc} at x, where R(e_a, e_b) e_c = R^d_{abc} e_d."""
    dGamma = np.stack([fd1(lambda y: christoffel_point(gfun, y, h), x, a, h)
                       for a in range(4)])       # dGamma[a, d, b, c]
    gamma = christoffel_point(gfun, x, h)        # gamma[d, a, e]
    R = (np.einsum('adbc->dabc', dGamma)
         - np.einsum('bdac->dabc', dGamma)
         + np.einsum('dae,ebc->dabc', gamma, gamma)
         - np.einsum('dbe,eac->dabc', gamma, gamma))
    return R


def ricci_point(gfun, x, h=2e-2):
    """Ricci tensor at x: Ric_{bc} = R^a_{abc}."""
    R = riemann_point(gfun, x, h)
    return np.einsum('aabc->bc', R)


def riemann_norm2_point(gfun, x, h=2e-2):
    """|Rm|^2 with all indices raised/lowered by g."""
    g = np.asarray(gfun(x))
    ginv = np.linalg.inv(g)
    R = riemann_point(gfun, x, h)               # R^d_{abc}
    Rl = np.einsum('de,eabc->dabc', g, R)       # R_{dabc}
    up = np.einsum('dx,ay,bz,cw,xyzw->dabc', ginv, ginv, ginv, ginv, Rl)
    return float(np.einsum('dabc,dabc->', Rl, up))


def scalar_curvature_point(gfun, x, h=2e-2):
    g = np.asarray(gfun(x))
    return float(np.einsum('bc,bc->', np.linalg.inv(g), ricci_point(gfun, x, h)))


# ---------------------------------------------------------------------------
# exponential-coordinate oracles for homogeneous models
# ---------------------------------------------------------------------------

_BERNOULLI = [1.0, 0.5, 1.0 / 6, 0.0, -1.0 / 30, 0.0, 1.0 / 42, 0.0,
              -1.0 / 30, 0.0, 5.0 / 66, 0.0, -691.0 / 2730, 0.0, 7.0 / 6]


def frame_matrix(model, x):
    """Left-invariant frame in exponential normal coordinates.

    E_i(x) = B(ad_X) e_i with B(u) = u / (1 - e^{-u}), evaluated by the
    Bernoulli series B(u) = sum_k B_k^+ u^k / k!.
    """
    adX = np.einsum('kij,i->kj', model.c, np.asarray(x, dtype=float))
    out = np.zeros((4, 4))
    term = np.eye(4)
    fact = 1.0
    for k, bk in enumerate(_BERNOULLI):
        if k > 0:
            term = term @ adX
            fact *= k
        if bk != 0.0:
            out = out + (bk / fact) * term
    return out


def invariant_metric_coord(model, g_alg, x):
    """Coordinate components of the left-invariant metric at x."""
    Phi = frame_matrix(model, x)
    Pinv = np.linalg.inv(Phi)
    return Pinv.T @ g_alg @ Pinv


def invariant_J_coord(model, x):
    Phi = frame_matrix(model, x)
    return Phi @ model.J @ np.linalg.inv(Phi)


def bismut_ricci11_point(gfun, Jfun, x, h=2e-2, dc_sign=1):
    """(1,1) Bismut Ricci form at x from callables g(x), J(x).

    Real-coordinate route: Levi-Civita plus half the torsion 3-form
    H = (d omega)(J., J., J.), curvature by stencils, J-trace, (1,1) part.
    Valid for Hermitian connections (dc_sign=+1).
    """
    def omega(y):
        g = np.asarray(gfun(y))
        J = np.asarray(Jfun(y))
        return J.T @ g    # omega[a,b] = g(J e_a, e_b)

    def torsion(y):
        dw = np.stack([fd1(omega, y, a, h) for a in range(4)])
        dw3 = dw - np.einsum('bac->abc', dw) + np.einsum('cab->abc', dw)
        J = np.asarray(Jfun(y))
        return dc_sign * np.einsum('xyz,xa,yb,zc->abc', dw3, J, J, J)

    def gamma_b(y):
        g = np.asarray(gfun(y))
        ginv = np.linalg.inv(g)
        low = christoffel_point(gfun, y, h) * 0.0
        dg = np.stack([fd1(gfun, y, a, h) for a in range(4)])
        low = 0.5 * (dg + np.einsum('bad->abd', dg) - np.einsum('dab->abd', dg))
        low = low + 0.5 * torsion(y)
        return np.einsum('cd,abd->cab', ginv, low)   # Gamma^c_{ab}

    dGam = np.stack([fd1(gamma_b, x, a, h) for a in range(4)])
    Gam = gamma_b(x)
    Om = (np.einsum('adbc->abdc', dGam) - np.einsum('bdac->abdc', dGam)
          + np.einsum('dae,ebc->abdc', Gam, Gam)
          - np.einsum('dbe,eac->abdc', Gam, Gam))   # Om[a,b,d,c] = Omega^d_{ab c}
    J = np.asarray(Jfun(x))
    rho = 0.5 * np.einsum('cd,abdc->ab', J, Om)
    rho11 = 0.5 * (rho + np.einsum('xy,xa,yb->ab', rho, J, J))
    return rho11
