"""Dirac matrix algebra: gamma matrices, gamma5, and the energy projections E±.

All matrices are stored as dense complex arrays with entries in {0, ±1, ±i},
so every algebraic identity below holds exactly in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Pauli matrices
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)


def spinor_dim(dim):
    """Spinor dimension: 2 components in d=2, 4 components in d=3."""
    if dim == 2:
        return 2
    if dim == 3:
        return 4
    raise ValueError(f"unsupported spatial dimension d={dim}; only d in {{2, 3}}")


@dataclass(frozen=True)
class GammaRep:
    """Dirac representation of the gamma matrices for spatial dimension d.

    gamma[mu] for mu = 0..d, gamma5 only for d=3, metric = diag(+1,-1,...,-1).
    Immutable after construction; safe to share across threads.
    """

    dim: int
    spinor_dim: int
    gamma: tuple
    gamma5: np.ndarray | None
    metric: np.ndarray

    @property
    def gamma0(self):
        return self.gamma[0]

    def spatial(self):
        """The spatial matrices gamma^1..gamma^d."""
        return self.gamma[1:]

    def alpha(self):
        """The matrices gamma^0 gamma^j, j = 1..d (Dirac alpha matrices)."""
        return tuple(self.gamma0 @ g for g in self.spatial())

    @property
    def energy_plus(self):
        return EnergyProjector(+1, self)

    @property
    def energy_minus(self):
        return EnergyProjector(-1, self)


@dataclass(frozen=True)
class EnergyProjector:
    """E± = (I ± gamma^0)/2, the rest-frame energy projections."""

    sign: int
    rep: GammaRep
    matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        eye = np.eye(self.rep.spinor_dim, dtype=complex)
        object.__setattr__(self, "matrix", 0.5 * (eye + self.sign * self.rep.gamma0))


def build_gamma(dim):
    """Construct the Dirac representation for d=2 or d=3.

    d=2: gamma^0 = sigma3, gamma^1 = i sigma2, gamma^2 = -i sigma1.
    d=3: gamma^0 = diag(1,1,-1,-1), gamma^j off-diagonal Pauli blocks,
         gamma^5 = i gamma^0 gamma^1 gamma^2 gamma^3.
    """
    nd = spinor_dim(dim)
    if dim == 2:
        gamma = (SIGMA3.copy(), 1j * SIGMA2, -1j * SIGMA1)
        gamma5 = None
    else:
        g0 = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
        zeros = np.zeros((2, 2), dtype=complex)
        spatial = []
        for sig in (SIGMA1, SIGMA2, SIGMA3):
            spatial.append(np.block([[zeros, sig], [-sig, zeros]]))
        gamma = (g0,) + tuple(spatial)
        gamma5 = 1j * g0 @ spatial[0] @ spatial[1] @ spatial[2]
    metric = np.diag([1.0] + [-1.0] * dim)
    return GammaRep(dim=dim, spinor_dim=nd, gamma=gamma, gamma5=gamma5, metric=metric)


def anticommutator_residual(rep):
    """Max-norm of gamma^mu gamma^nu + gamma^nu gamma^mu - 2 eta^{mu nu} I over all (mu, nu).

    Exactly zero for a valid representation.
    """
    eye = np.eye(rep.spinor_dim, dtype=complex)
    worst = 0.0
    for mu, gmu in enumerate(rep.gamma):
        for nu, gnu in enumerate(rep.gamma):
            resid = gmu @ gnu + gnu @ gmu - 2.0 * rep.metric[mu, nu] * eye
            worst = max(worst, float(np.max(np.abs(resid))))
    return worst


def dirac_adjoint(psi, rep):
    """Dirac adjoint psi-bar = psi^dagger gamma^0 as a row covector.

    Also works for component-first field arrays of shape (N, ...): the adjoint
    is taken pointwise along the leading axis.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != rep.spinor_dim:
        raise ValueError(
            f"spinor has {psi.shape[0]} components, expected {rep.spinor_dim} for d={rep.dim}"
        )
    return np.einsum("a...,ab->b...", np.conj(psi), rep.gamma0)


def bilinear(psi, mat, phi):
    """The sandwich psi-bar-free scalar psi^dagger M phi, pointwise on (N, ...) arrays."""
    return np.einsum("a...,ab,b...->...", np.conj(psi), mat, phi)


def sandwich(psi, mat, phi, rep):
    """Lorentz-type scalar (psi-bar M phi) = psi^dagger gamma^0 M phi, pointwise."""
    return bilinear(psi, rep.gamma0 @ mat, phi)
