"""Cubic nonlinearities: Fierz identity, null condition, resonant decomposition
against the phase-sampling extraction oracle, gauge covariance."""

import numpy as np
import pytest

from diraclab.algebra import build_gamma
from diraclab.fields import Grid, random_field, to_physical
from diraclab.nonlinearity import (
    NonlinearitySpec,
    RESONANT_HARMONICS,
    eval_nonlinearity,
    extract_pieces_oracle,
    fierz_residual,
    named_matrix,
    null_condition_residual,
    parse_nonlinearity,
    phase_apply,
    resonant_decompose,
    soler_term,
    thirring_direct,
    thirring_fierz,
)

REP2 = build_gamma(2)
REP3 = build_gamma(3)


def random_spinor(rep, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(rep.spinor_dim) + 1j * rng.standard_normal(rep.spinor_dim)
    return z


def test_soler_on_basis_vector():
    e1 = np.zeros(4, dtype=complex)
    e1[0] = 1.0
    out = eval_nonlinearity(NonlinearitySpec.soler(), e1, REP3)
    assert np.array_equal(out, e1)  # psibar psi = 1


def test_thirring_on_basis_vector_both_forms():
    e1 = np.zeros(4, dtype=complex)
    e1[0] = 1.0
    direct = thirring_direct(e1, REP3)
    fierz = thirring_fierz(e1, REP3)
    assert np.allclose(direct, e1, atol=1e-15)
    assert np.allclose(fierz, e1, atol=1e-15)


def test_thirring_d2_equals_soler():
    for seed in range(20):
        psi = random_spinor(REP2, seed)
        direct = thirring_direct(psi, REP2)
        soler = soler_term(psi, REP2)
        scale = np.max(np.abs(psi)) ** 3
        assert np.max(np.abs(direct - soler)) <= 1e-12 * scale


def test_fierz_residual_sweep():
    worst = 0.0
    for seed in range(1000):
        psi = random_spinor(REP3, seed)
        psi = psi / np.linalg.norm(psi)
        worst = max(worst, fierz_residual(psi, REP3))
    assert worst <= 1e-12


def test_fierz_residual_zero_spinor():
    assert fierz_residual(np.zeros(4, dtype=complex), REP3) == 0.0


def test_null_condition_soler_and_gamma5():
    assert null_condition_residual(np.eye(4, dtype=complex), REP3) == 0.0
    assert null_condition_residual(REP3.gamma5, REP3) == 0.0
    assert null_condition_residual(np.eye(2, dtype=complex), REP2) == 0.0
    # gamma^1 violates the condition and must be rejected for general specs
    assert null_condition_residual(REP3.gamma[1], REP3) > 0
    with pytest.raises(ValueError, match="null condition"):
        NonlinearitySpec.general([(1.0, REP3.gamma[1], np.eye(4))], REP3)


@pytest.mark.parametrize("rep,spec", [
    (REP2, NonlinearitySpec.soler()),
    (REP3, NonlinearitySpec.soler()),
    (REP2, NonlinearitySpec.thirring()),
    (REP3, NonlinearitySpec.thirring()),
])
def test_gauge_covariance(rep, spec):
    for seed in range(25):
        psi = random_spinor(rep, seed)
        alpha = 0.1 + 0.2 * seed
        lhs = eval_nonlinearity(spec, np.exp(1j * alpha) * psi, rep)
        rhs = np.exp(1j * alpha) * eval_nonlinearity(spec, psi, rep)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_soler_resonant_pieces():
    spec = NonlinearitySpec.soler()
    pieces = resonant_decompose(spec, REP3)
    psi = random_spinor(REP3, 3)
    assert np.allclose(pieces(1, psi), eval_nonlinearity(spec, psi, REP3))
    for k in (-3, -1, 3):
        assert np.max(np.abs(pieces(k, psi))) == 0.0


def test_thirring_oracle_harmonics():
    spec = NonlinearitySpec.thirring()
    psi = random_spinor(REP3, 4)
    extracted = extract_pieces_oracle(spec, psi, REP3)
    scale = np.max(np.abs(psi)) ** 3
    assert np.max(np.abs(extracted[-1])) <= 1e-12 * scale
    assert np.max(np.abs(extracted[3])) <= 1e-12 * scale
    assert np.max(np.abs(extracted[-3])) > 1e-3 * scale  # genuinely present


@pytest.mark.parametrize("rep,spec", [
    (REP3, NonlinearitySpec.soler()),
    (REP3, NonlinearitySpec.thirring()),
    (REP2, NonlinearitySpec.thirring()),
])
def test_closed_form_matches_oracle(rep, spec):
    pieces = resonant_decompose(spec, rep)
    for seed in range(30):
        psi = random_spinor(rep, seed)
        extracted = extract_pieces_oracle(spec, psi, rep)
        scale = max(np.max(np.abs(psi)) ** 3, 1e-30)
        for k in RESONANT_HARMONICS:
            assert np.max(np.abs(pieces(k, psi) - extracted[k])) <= 1e-12 * scale


def test_general_gamma5_spec_matches_oracle():
    rep = REP3
    spec = NonlinearitySpec.general([(1.0, rep.gamma5, rep.gamma5)], rep)
    pieces = resonant_decompose(spec, rep)
    for seed in range(100):
        psi = random_spinor(rep, seed)
        extracted = extract_pieces_oracle(spec, psi, rep)
        scale = max(np.max(np.abs(psi)) ** 3, 1e-30)
        for k in RESONANT_HARMONICS:
            assert np.max(np.abs(pieces(k, psi) - extracted[k])) <= 1e-12 * scale


def test_reconstruction_identity():
    for rep, spec in [
        (REP3, NonlinearitySpec.thirring()),
        (REP3, NonlinearitySpec.soler()),
        (REP2, NonlinearitySpec.thirring()),
    ]:
        pieces = resonant_decompose(spec, rep)
        for seed in range(34):
            rng = np.random.default_rng(1000 + seed)
            psi = random_spinor(rep, seed)
            theta = float(rng.uniform(0, 2 * np.pi))
            lhs = eval_nonlinearity(spec, phase_apply(theta, psi, rep), rep)
            rhs = pieces.reconstruct(theta, psi, rep)
            # relative to the summand size |psi|^3 (|F| itself can degenerate)
            scale = max(np.max(np.abs(lhs)), np.max(np.abs(psi)) ** 3, 1e-30)
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_oracle_zero_spinor():
    extracted = extract_pieces_oracle(NonlinearitySpec.thirring(), np.zeros(4, dtype=complex), REP3)
    for k in RESONANT_HARMONICS:
        assert np.max(np.abs(extracted[k])) == 0.0


def test_oracle_rejects_non_cubic_map():
    class FakeSpec:
        kind = "general"
        terms = ()

    # a quadratic map produces the even harmonic k = 2 -> harmonic fit must fail
    import diraclab.nonlinearity as nl

    def quadratic(spec, psi, rep=None):
        data = np.asarray(psi, dtype=complex)
        return data * data

    nl_eval = nl.eval_nonlinearity
    try:
        nl.eval_nonlinearity = quadratic
        with pytest.raises(ValueError, match="not cubic"):
            nl.extract_pieces_oracle(FakeSpec(), random_spinor(REP3, 1), REP3)
    finally:
        nl.eval_nonlinearity = nl_eval


def test_eval_on_fields_pointwise():
    g = Grid(dim=2, n=8, box_length=1.0)
    f = to_physical(random_field(g, seed=12))
    out = eval_nonlinearity(NonlinearitySpec.soler(), f)
    assert out.repr == "physical"
    # pointwise check at one grid point
    point = f.data[:, 3, 5]
    expected = soler_term(point, REP2)
    assert np.allclose(out.data[:, 3, 5], expected, rtol=1e-13)


def test_parse_nonlinearity():
    assert parse_nonlinearity("soler", REP3).kind == "soler"
    assert parse_nonlinearity("none", REP3) is None
    spec = parse_nonlinearity("general: 1.0*gamma5*gamma5", REP3)
    assert spec.kind == "general" and len(spec.terms) == 1
    assert np.array_equal(spec.terms[0][1], REP3.gamma5)
    with pytest.raises(ValueError):
        parse_nonlinearity("quartic", REP3)
    with pytest.raises(ValueError, match="gamma5"):
        named_matrix("gamma5", REP2)
