"""Frozen frame/sign conventions and complex <-> real tensor conversions.

Conventions used everywhere in this package:

* complex coordinates z1 = x1 + i x2, z2 = x3 + i x4;
* complex structure J dx1 = dx2-direction (J e1 = e2, J e3 = e4), so the
  coordinate fields d/dz^i span the +i eigenspace of J;
* Kaehler form omega(X, Y) = g(JX, Y); with Hermitian components
  g_{i jb} = g(d/dz^i, d/dzb^j) this reads omega = i g_{i jb} dz^i ^ dzb^j,
  and the identity Hermitian matrix corresponds to the Riemannian metric
  2 * Id (flat chart);
* the Bismut torsion 3-form is H(X, Y, Z) = (d omega)(JX, JY, JZ), the unique
  sign for which the connection LC + H/2 preserves J.  In Dolbeault terms
  this is H = i(partial - partialbar) omega in our orientation.  The opposite
  sign, selectable through ``dc_sign=-1``, is kept only as a deliberate-fault
  switch for negative-control tests.

Component layout: complex frame order is (d/dz1, d/dz2, d/dzb1, d/dzb2);
real frame order is (d/dx1, .., d/dx4).
"""

import numpy as np

# real coordinate fields in the complex frame: e_a = sum_A V[A, a] E_A
V_REAL_IN_COMPLEX = np.array([
    [1, 1j, 0, 0],
    [0, 0, 1, 1j],
    [1, -1j, 0, 0],
    [0, 0, 1, -1j],
], dtype=complex)

# complex frame fields in the real frame: E_A = sum_a U[a, A] e_a
U_COMPLEX_IN_REAL = np.linalg.inv(V_REAL_IN_COMPLEX)

# dz^i evaluated on e_a
P_DZ = np.array([[1, 1j, 0, 0],
                 [0, 0, 1, 1j]], dtype=complex)

# standard complex structure on the chart, J e1 = e2, J e3 = e4
J_STD = np.array([
    [0., -1., 0., 0.],
    [1., 0., 0., 0.],
    [0., 0., 0., -1.],
    [0., 0., 1., 0.],
])

LEVI_CIVITA_4 = np.zeros((4, 4, 4, 4))
for _perm, _sgn in [
    ((0, 1, 2, 3), 1), ((0, 2, 3, 1), 1), ((0, 3, 1, 2), 1),
    ((1, 0, 3, 2), 1), ((1, 2, 0, 3), 1), ((1, 3, 2, 0), 1),
    ((2, 0, 1, 3), 1), ((2, 1, 3, 0), 1), ((2, 3, 0, 1), 1),
    ((3, 0, 2, 1), 1), ((3, 1, 0, 2), 1), ((3, 2, 1, 0), 1),
    ((0, 1, 3, 2), -1), ((0, 2, 1, 3), -1), ((0, 3, 2, 1), -1),
    ((1, 0, 2, 3), -1), ((1, 2, 3, 0), -1), ((1, 3, 0, 2), -1),
    ((2, 0, 3, 1), -1), ((2, 1, 0, 3), -1), ((2, 3, 1, 0), -1),
    ((3, 0, 1, 2), -1), ((3, 1, 2, 0), -1), ((3, 2, 0, 1), -1),
]:
    LEVI_CIVITA_4[_perm] = _sgn


def hermitian_to_riemannian(G):
    """Riemannian 4x4 components from Hermitian 2x2 components.

    Accepts fields with shape (2, 2, ...); returns (4, 4, ...) real.
    G = Id/2 maps to the Euclidean metric.
    """
    M = np.einsum('ia,ij...,jb->ab...', P_DZ, G, P_DZ.conj())
    return 2.0 * M.real


def riemannian_to_hermitian(gR):
    """Inverse of hermitian_to_riemannian for J-invariant metrics."""
    return np.einsum('ai,ab...,bj->ij...', U_COMPLEX_IN_REAL[:, :2], gR,
                     U_COMPLEX_IN_REAL[:, :2].conj())


def herm_to_real2(a):
    """Real 2-form components of the (1,1)-form i a_{i jb} dz^i ^ dzb^j."""
    M = np.einsum('ia,ij...,jb->ab...', P_DZ, a, P_DZ.conj())
    MT = np.moveaxis(M, 0, 1)
    # for Hermitian a the transpose equals conj(M), so i(M - M^T) is real
    return (1j * (M - MT)).real


def real2_to_herm(psi):
    """Hermitian components a_{i jb} of a real J-invariant 2-form psi.

    a_{i jb} = -i psi(d/dz^i, d/dzb^j).
    """
    return -1j * np.einsum('ai,ab...,bj->ij...', U_COMPLEX_IN_REAL[:, :2], psi,
                           U_COMPLEX_IN_REAL[:, :2].conj())


def cov3_real_to_complex(H):
    """Complex-frame components of a covariant 3-tensor given in real frame."""
    U = U_COMPLEX_IN_REAL
    return np.einsum('aA,bB,cC,abc...->ABC...', U, U, U, H)


def cov3_complex_to_real(Hc):
    """Real-frame components from complex-frame covariant 3-tensor."""
    W = V_REAL_IN_COMPLEX
    return np.einsum('Aa,Bb,Cc,ABC...->abc...', W, W, W, Hc)


def oneone_project(psi, J=J_STD):
    """J-invariant ((1,1)) part of a real 2-form field: (psi + J*psi)/2."""
    rot = np.einsum('ca,cd...,db->ab...', J, psi, J)
    return 0.5 * (psi + rot)
