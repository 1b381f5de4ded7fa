"""Exact identities of the gamma-matrix algebra."""

import numpy as np
import pytest

from diraclab.algebra import (
    anticommutator_residual,
    bilinear,
    build_gamma,
    dirac_adjoint,
    sandwich,
)


def random_spinors(nd, count, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, nd)) + 1j * rng.standard_normal((count, nd))
    return z


@pytest.mark.parametrize("dim", [2, 3])
def test_anticommutation_exact(dim):
    rep = build_gamma(dim)
    assert anticommutator_residual(rep) == 0.0


def test_gamma0_values():
    assert np.array_equal(build_gamma(2).gamma0, np.diag([1.0 + 0j, -1.0]))
    assert np.array_equal(build_gamma(3).gamma0, np.diag([1.0 + 0j, 1.0, -1.0, -1.0]))


def test_d2_gamma1_gamma2_anticommute():
    rep = build_gamma(2)
    g1, g2 = rep.gamma[1], rep.gamma[2]
    assert np.array_equal(g1 @ g2 + g2 @ g1, np.zeros((2, 2)))


@pytest.mark.parametrize("dim", [2, 3])
def test_hermiticity(dim):
    rep = build_gamma(dim)
    assert np.array_equal(rep.gamma0.conj().T, rep.gamma0)
    for gj in rep.spatial():
        assert np.array_equal(gj.conj().T, -gj)


def test_unsupported_dimension_rejected():
    with pytest.raises(ValueError, match="unsupported spatial dimension"):
        build_gamma(4)


def test_perturbed_rep_detected():
    rep = build_gamma(2)
    bad = rep.gamma0.copy()
    bad[0, 0] += 1e-6
    perturbed = type(rep)(
        dim=2, spinor_dim=2, gamma=(bad,) + rep.gamma[1:], gamma5=None, metric=rep.metric
    )
    assert anticommutator_residual(perturbed) >= 1e-6


def test_gamma5_relations_exact():
    rep = build_gamma(3)
    g5 = rep.gamma5
    eye = np.eye(4, dtype=complex)
    assert np.array_equal(g5 @ g5, eye)
    assert np.array_equal(rep.gamma0 @ g5 + g5 @ rep.gamma0, np.zeros((4, 4)))
    # Dirac representation: gamma5 = off-diagonal identity blocks
    assert np.array_equal(g5, np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]]).astype(complex))


def test_energy_projectors():
    for dim in (2, 3):
        rep = build_gamma(dim)
        ep, em = rep.energy_plus.matrix, rep.energy_minus.matrix
        eye = np.eye(rep.spinor_dim, dtype=complex)
        assert np.array_equal(ep @ ep, ep)
        assert np.array_equal(em @ em, em)
        assert np.array_equal(ep + em, eye)
        assert np.array_equal(ep @ rep.gamma0, ep)
        assert np.array_equal(em @ rep.gamma0, -em)
    rep = build_gamma(3)
    # gamma5 E+ = E- gamma5 swaps the energy blocks
    assert np.array_equal(rep.gamma5 @ rep.energy_plus.matrix, rep.energy_minus.matrix @ rep.gamma5)


def test_dirac_adjoint_basis_vectors():
    rep = build_gamma(3)
    e1 = np.array([1, 0, 0, 0], dtype=complex)
    e3 = np.array([0, 0, 1, 0], dtype=complex)
    assert np.array_equal(dirac_adjoint(e1, rep), e1)
    assert np.array_equal(dirac_adjoint(e3, rep), -e3)


def test_dirac_adjoint_d2_example():
    # psi = (1, i): conjugate (1, -i), then gamma0 = diag(1,-1) gives (1, i)
    rep = build_gamma(2)
    psi = np.array([1.0, 1j])
    assert np.allclose(dirac_adjoint(psi, rep), np.array([1.0, 1j]), atol=0, rtol=0)


def test_dirac_adjoint_length_mismatch():
    rep = build_gamma(3)
    with pytest.raises(ValueError, match="components"):
        dirac_adjoint(np.array([1.0, 0.0]), rep)


@pytest.mark.parametrize("dim", [2, 3])
def test_psibar_psi_real(dim):
    rep = build_gamma(dim)
    eye = np.eye(rep.spinor_dim, dtype=complex)
    for psi in random_spinors(rep.spinor_dim, 1000, seed=70 + dim):
        scale = float(np.vdot(psi, psi).real)
        s = sandwich(psi, eye, psi, rep)
        assert abs(s.imag) <= 1e-12 * scale


@pytest.mark.parametrize("dim", [2, 3])
def test_psibar_gamma_mu_psi_real(dim):
    rep = build_gamma(dim)
    for psi in random_spinors(rep.spinor_dim, 1000, seed=31 + dim):
        scale = float(np.vdot(psi, psi).real)
        for gmu in rep.gamma:
            s = sandwich(psi, gmu, psi, rep)
            assert abs(s.imag) <= 1e-12 * scale


def test_bilinear_pointwise_on_fields():
    rep = build_gamma(2)
    rng = np.random.default_rng(5)
    psi = rng.standard_normal((2, 4, 4)) + 1j * rng.standard_normal((2, 4, 4))
    out = bilinear(psi, rep.gamma0, psi)
    assert out.shape == (4, 4)
    manual = sum(
        np.conj(psi[a]) * rep.gamma0[a, b] * psi[b] for a in range(2) for b in range(2)
    )
    assert np.allclose(out, manual, rtol=1e-14)
