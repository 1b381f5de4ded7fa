"""Cubic nonlinearities (Soler, Thirring, general null pairs), Fierz
cross-validation, and the resonant decomposition

    F(exp(i theta gamma^0) psi) = sum_{k in {-3,-1,1,3}} exp(i k theta gamma^0) F_k(psi).

The Thirring model is evaluated through its Fierz form (the null-structured
summands); the direct gamma^mu current form is kept for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import GammaRep, build_gamma, sandwich
from .fields import PHYSICAL, SpinorField

SOLER = "soler"
THIRRING = "thirring"
GENERAL = "general"

_NAMED_MATRICES = ("identity", "gamma0", "gamma1", "gamma2", "gamma3", "gamma5")


def named_matrix(name, rep):
    if name == "identity":
        return np.eye(rep.spinor_dim, dtype=complex)
    if name == "gamma5":
        if rep.gamma5 is None:
            raise ValueError("gamma5 exists only for d=3")
        return rep.gamma5
    if name.startswith("gamma"):
        mu = int(name[5:])
        if mu <= rep.dim:
            return rep.gamma[mu]
    raise ValueError(f"unknown matrix name {name!r}")


def null_condition_residual(mat, rep):
    """Max-norm of gamma^0 gamma^j A - A gamma^0 gamma^j over spatial j (exact zero required)."""
    worst = 0.0
    for alpha_j in rep.alpha():
        worst = max(worst, float(np.max(np.abs(alpha_j @ mat - mat @ alpha_j))))
    return worst


@dataclass(frozen=True)
class NonlinearitySpec:
    """Soler | Thirring | general list of (coeff, A1, A2) sandwich terms.

    General terms must satisfy the commutation (null) condition
    gamma^0 gamma^j A = A gamma^0 gamma^j exactly, checked at construction.
    """

    kind: str
    terms: tuple = ()

    @classmethod
    def soler(cls):
        return cls(kind=SOLER)

    @classmethod
    def thirring(cls):
        return cls(kind=THIRRING)

    @classmethod
    def general(cls, terms, rep):
        checked = []
        for coeff, a1, a2 in terms:
            a1 = np.asarray(a1, dtype=complex)
            a2 = np.asarray(a2, dtype=complex)
            for mat in (a1, a2):
                if null_condition_residual(mat, rep) != 0.0:
                    raise ValueError("general term violates the null condition gamma^0 gamma^j A = A gamma^0 gamma^j")
            checked.append((complex(coeff), a1, a2))
        return cls(kind=GENERAL, terms=tuple(checked))

    def to_config_value(self):
        """Serialize for the flat experiment config."""
        if self.kind != GENERAL:
            return self.kind
        raise ValueError("general specs serialize by named matrices only; build via parse_nonlinearity")


def parse_nonlinearity(text, rep):
    """Parse a config value: 'soler', 'thirring', 'none', or
    'general: coeff*name*name; coeff*name*name; ...' with named matrices."""
    text = text.strip()
    if text in (SOLER, THIRRING):
        return NonlinearitySpec(kind=text)
    if text in ("none", "linear", ""):
        return None
    if text.startswith("general:"):
        terms = []
        for chunk in text[len("general:"):].split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            coeff_s, a1_s, a2_s = (p.strip() for p in chunk.split("*"))
            terms.append((complex(coeff_s), named_matrix(a1_s, rep), named_matrix(a2_s, rep)))
        return NonlinearitySpec.general(terms, rep)
    raise ValueError(f"unknown nonlinearity {text!r}")


def _as_array(psi):
    if isinstance(psi, SpinorField):
        if psi.repr != PHYSICAL:
            raise ValueError("nonlinearities evaluate in the physical representation")
        return psi.data, psi
    return np.asarray(psi, dtype=complex), None


def _wrap(data, template):
    if template is None:
        return data
    return SpinorField(template.grid, data, PHYSICAL)


def soler_term(psi, rep):
    """(psibar psi) psi, pointwise."""
    s = sandwich(psi, np.eye(rep.spinor_dim), psi, rep)
    return s * psi


def pseudoscalar_term(psi, rep):
    """(psibar gamma^5 psi) gamma^5 psi (d=3), pointwise."""
    s = sandwich(psi, rep.gamma5, psi, rep)
    return s * np.einsum("ab,b...->a...", rep.gamma5, psi)


def thirring_direct(psi, rep):
    """(psibar gamma^mu psi) gamma_mu psi with indices lowered via the metric."""
    out = np.zeros_like(psi)
    for mu in range(rep.dim + 1):
        s = sandwich(psi, rep.gamma[mu], psi, rep)
        out += rep.metric[mu, mu] * s * np.einsum("ab,b...->a...", rep.gamma[mu], psi)
    return out


def thirring_fierz(psi, rep):
    """Fierz form of the Thirring cubic: Soler in d=2, Soler minus the
    pseudoscalar term in d=3."""
    if rep.dim == 2:
        return soler_term(psi, rep)
    return soler_term(psi, rep) - pseudoscalar_term(psi, rep)


def eval_nonlinearity(spec, psi, rep=None):
    """Pointwise cubic evaluation on a spinor or a physical SpinorField."""
    data, template = _as_array(psi)
    if rep is None:
        rep = build_gamma(template.grid.dim if template is not None else {2: 2, 4: 3}[data.shape[0]])
    if spec.kind == SOLER:
        out = soler_term(data, rep)
    elif spec.kind == THIRRING:
        out = thirring_fierz(data, rep)
    else:
        out = np.zeros_like(data)
        for coeff, a1, a2 in spec.terms:
            s = sandwich(data, a1, data, rep)
            out += coeff * s * np.einsum("ab,b...->a...", a2, data)
    return _wrap(out, template)


def fierz_residual(psi, rep):
    """Norm gap between the direct current form and the Fierz form.

    d=3: ||(psibar gamma^mu psi) gamma_mu psi - [(psibar psi) psi - (psibar g5 psi) g5 psi]||.
    d=2: the identity Thirring = Soler is checked instead.
    """
    data, _ = _as_array(psi)
    gap = thirring_direct(data, rep) - thirring_fierz(data, rep)
    return float(np.max(np.abs(gap)))


def phase_apply(theta, psi, rep):
    """exp(i theta gamma^0) psi = exp(i theta) E+ psi + exp(-i theta) E- psi."""
    ep = rep.energy_plus.matrix
    em = rep.energy_minus.matrix
    return np.exp(1j * theta) * np.einsum("ab,b...->a...", ep, psi) + np.exp(
        -1j * theta
    ) * np.einsum("ab,b...->a...", em, psi)


RESONANT_HARMONICS = (-3, -1, 1, 3)


@dataclass(frozen=True)
class ResonantPieces:
    """The four cubic maps F_k of the resonant decomposition."""

    pieces: dict

    def __call__(self, k, psi):
        return self.pieces[k](psi)

    @property
    def f1(self):
        return self.pieces[1]

    def reconstruct(self, theta, psi, rep):
        """Sum exp(i k theta gamma^0) F_k(psi) over the four harmonics."""
        total = None
        for k in RESONANT_HARMONICS:
            term = phase_apply(k * theta, self.pieces[k](psi), rep)
            total = term if total is None else total + term
        return total


def extract_pieces_oracle(spec, psi, rep):
    """Numerical inverse of the resonant decomposition by 8-point phase sampling.

    Evaluates F(exp(i theta_j gamma^0) psi) at theta_j = 2 pi j / 8 and solves the
    four-harmonic discrete Fourier system separately on the E+ and E- blocks
    (where exp(i theta gamma^0) acts as the scalars exp(+-i theta)).  Exact for
    cubic maps with one conjugation, since only the harmonics k in {-3,-1,1,3}
    occur.  Raises if the harmonic fit has residual above 1e-10 (the map is
    then not cubic/phase-compatible).
    """
    data, _ = _as_array(psi)
    ep = rep.energy_plus.matrix
    em = rep.energy_minus.matrix
    thetas = 2 * np.pi * np.arange(8) / 8
    samples = [np.asarray(eval_nonlinearity(spec, phase_apply(t, data, rep), rep)) for t in thetas]
    pieces = {}
    for k in RESONANT_HARMONICS:
        plus = sum(
            np.exp(-1j * k * t) * np.einsum("ab,b...->a...", ep, s)
            for t, s in zip(thetas, samples)
        ) / 8.0
        minus = sum(
            np.exp(+1j * k * t) * np.einsum("ab,b...->a...", em, s)
            for t, s in zip(thetas, samples)
        ) / 8.0
        pieces[k] = plus + minus
    scale = max(float(np.max(np.abs(s))) for s in samples) or 1.0
    worst = 0.0
    for t, s in zip(thetas, samples):
        recon = sum(phase_apply(k * t, pieces[k], rep) for k in RESONANT_HARMONICS)
        worst = max(worst, float(np.max(np.abs(recon - s))))
    if worst > 1e-10 * scale:
        raise ValueError("nonlinearity is not cubic/phase-compatible: harmonic fit residual too large")
    return pieces


def resonant_decompose(spec, rep):
    """Closed-form resonant pieces for Soler/Thirring; oracle-backed for general.

    Soler: F_1 = F, all others zero.  Thirring (d=3):
        F_1(psi)  = (psibar psi) psi - a+ g5 E- psi - a- g5 E+ psi
        F_-3(psi) = -(a- g5 E- psi + a+ g5 E+ psi)
    with a+ = (ov{E- psi} g5 E+ psi), a- = (ov{E+ psi} g5 E- psi); the sign of
    F_-3 is fixed by the extraction oracle (reconstruction must hold verbatim).
    """
    zero = lambda psi: np.zeros_like(np.asarray(psi, dtype=complex))
    if spec.kind == SOLER or (spec.kind == THIRRING and rep.dim == 2):
        pieces = {k: zero for k in RESONANT_HARMONICS}
        pieces[1] = lambda psi: eval_nonlinearity(spec, psi, rep)
        return ResonantPieces(pieces=pieces)
    if spec.kind == THIRRING:
        ep = rep.energy_plus.matrix
        em = rep.energy_minus.matrix
        g5 = rep.gamma5

        def split(psi):
            psi = np.asarray(psi, dtype=complex)
            pp = np.einsum("ab,b...->a...", ep, psi)
            pm = np.einsum("ab,b...->a...", em, psi)
            a_plus = sandwich(pm, g5, pp, rep)
            a_minus = sandwich(pp, g5, pm, rep)
            g5p = np.einsum("ab,b...->a...", g5, pp)
            g5m = np.einsum("ab,b...->a...", g5, pm)
            return a_plus, a_minus, g5p, g5m

        def f1(psi):
            a_plus, a_minus, g5p, g5m = split(psi)
            return soler_term(np.asarray(psi, dtype=complex), rep) - a_plus * g5m - a_minus * g5p

        def fm3(psi):
            a_plus, a_minus, g5p, g5m = split(psi)
            return -(a_minus * g5m + a_plus * g5p)

        pieces = {1: f1, -3: fm3, -1: zero, 3: zero}
        return ResonantPieces(pieces=pieces)
    # general: the extraction oracle is the definition
    pieces = {
        k: (lambda psi, k=k: extract_pieces_oracle(spec, psi, rep)[k]) for k in RESONANT_HARMONICS
    }
    return ResonantPieces(pieces=pieces)
