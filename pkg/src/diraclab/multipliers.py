"""Fourier multiplier operators: spectral projections, free flows, Sobolev
weights, Littlewood-Paley / cap localizations, and the transfer operators
that measure the gap between propagators.

Conventions.  With the unitary FFT of fields.py, a multiplier p(xi) acting as
f_hat(xi) -> p(xi) f_hat(xi) realizes the operator p(-i grad).  The Dirac
Hamiltonian symbol is H_m(xi) = gamma^0 (gamma^j xi_j + m), with eigenvalues
+-<xi>_m where <xi>_m = (m^2 + |xi|^2)^(1/2), and

    Pi_+-(xi) = (I -+ H_m(xi)/<xi>_m) / 2.

Free flows:
    dirac mass m : U_m(t) = exp(+it<xi>_m) Pi_+ + exp(-it<xi>_m) Pi_-
    dirac speed c: V_c(t) = exp(+ict<xi>_c) PiAdj_{c,+} + exp(-ict<xi>_c) PiAdj_{c,-}
    schrodinger  : V_inf(t) = exp(-i(t/2)|xi|^2) E+ + exp(+i(t/2)|xi|^2) E-
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import build_gamma
from .caps import CapFamily, MetricCap
from .fields import FREQUENCY, SpinorField, to_frequency, to_physical

_REPS = {2: build_gamma(2), 3: build_gamma(3)}


def gamma_rep(dim):
    return _REPS[dim]


DIRAC_MASS = "dirac_mass"
DIRAC_SPEED = "dirac_speed"
SCHRODINGER = "schrodinger"


@dataclass(frozen=True)
class PropagatorSpec:
    """Which linear flow: Dirac with mass m, Dirac with speed c, or the
    Schrodinger limit flow."""

    kind: str
    mass: float = 0.0
    speed: float = 1.0

    def __post_init__(self):
        if self.kind not in (DIRAC_MASS, DIRAC_SPEED, SCHRODINGER):
            raise ValueError(f"unknown propagator kind {self.kind!r}")
        if self.kind == DIRAC_SPEED and self.speed < 1.0:
            raise ValueError("dirac_speed requires c >= 1")

    @classmethod
    def dirac_mass(cls, m):
        return cls(kind=DIRAC_MASS, mass=float(m))

    @classmethod
    def dirac_speed(cls, c):
        return cls(kind=DIRAC_SPEED, speed=float(c))

    @classmethod
    def schrodinger(cls):
        return cls(kind=SCHRODINGER)


def mass_bracket(xi_norm, m):
    """<xi>_m = sqrt(m^2 + |xi|^2)."""
    return np.sqrt(m * m + np.asarray(xi_norm) ** 2)


def pi_matrix(xi, m, dim, sign):
    """Pi_{+-}(xi) at a single frequency, as an (N, N) matrix.

    For m = 0 the symbol is singular at xi = 0; the convention Pi_{+-}(0) = I/2
    keeps Pi_+ + Pi_- = I there.
    """
    rep = gamma_rep(dim)
    xi = np.asarray(xi, dtype=float)
    eye = np.eye(rep.spinor_dim, dtype=complex)
    norm = float(np.linalg.norm(xi))
    if m == 0.0 and norm == 0.0:
        return 0.5 * eye
    ham = rep.gamma0 @ (
        sum(xi[j] * rep.gamma[j + 1] for j in range(dim)) + m * np.eye(rep.spinor_dim)
    )
    return 0.5 * (eye - sign * ham / mass_bracket(norm, m))


def projection_symbol(grid, m, sign):
    """Pi_{+-}(xi) on the full lattice: array of shape (N, N, n, ..., n)."""
    rep = gamma_rep(grid.dim)
    nd = rep.spinor_dim
    grids = grid.freq_grids()
    bracket = mass_bracket(grid.freq_norm(), m)
    eye = np.eye(nd)
    # H_m(xi) = gamma^0 (gamma^j xi_j + m)
    ham = np.zeros((nd, nd) + grid.shape, dtype=complex)
    for j in range(grid.dim):
        mat = rep.gamma0 @ rep.gamma[j + 1]
        ham += mat.reshape((nd, nd) + (1,) * grid.dim) * grids[j]
    ham += (rep.gamma0 * m).reshape((nd, nd) + (1,) * grid.dim)
    if m == 0.0:
        bracket = bracket.copy()
        bracket[(0,) * grid.dim] = 1.0  # convention Pi(0) = I/2; ham(0) = 0 already
    return 0.5 * (eye.reshape((nd, nd) + (1,) * grid.dim) - sign * ham / bracket)


def adjusted_projection_symbol(grid, c, sign):
    """PiAdj_{c,+-}(xi) = (I -+ gamma^0(gamma^j xi_j + c)/<xi>_c)/2.

    Same formula as the mass-c projection; as c -> infty, PiAdj_{c,-+} -> E_{+-}
    entrywise at fixed xi.
    """
    return projection_symbol(grid, float(c), sign)


def apply_matrix_symbol(f, sym):
    """Pointwise matrix multiply f_hat(xi) -> sym(xi) f_hat(xi)."""
    if f.repr != FREQUENCY:
        raise ValueError("matrix symbols apply in the frequency representation")
    data = np.einsum("ab...,b...->a...", sym, f.data)
    return SpinorField(f.grid, data, FREQUENCY)


def apply_projection(f, grid_sym):
    """Apply a precomputed projection symbol (alias of apply_matrix_symbol)."""
    return apply_matrix_symbol(f, grid_sym)


class Propagator:
    """A PropagatorSpec bound to a grid, with precomputed projection symbols.

    flow(t) acts on frequency fields as exp(+i t omega) P_plus + exp(-i t omega) P_minus.
    """

    def __init__(self, spec, grid):
        self.spec = spec
        self.grid = grid
        rep = gamma_rep(grid.dim)
        nd = rep.spinor_dim
        xi_norm = grid.freq_norm()
        if spec.kind == DIRAC_MASS:
            self.omega = mass_bracket(xi_norm, spec.mass)
            self.p_plus = projection_symbol(grid, spec.mass, +1)
            self.p_minus = projection_symbol(grid, spec.mass, -1)
        elif spec.kind == DIRAC_SPEED:
            c = spec.speed
            self.omega = c * mass_bracket(xi_norm, c)
            self.p_plus = adjusted_projection_symbol(grid, c, +1)
            self.p_minus = adjusted_projection_symbol(grid, c, -1)
        else:
            self.omega = 0.5 * xi_norm**2
            shape = (nd, nd) + (1,) * grid.dim
            # V_inf(t) = exp(-i(t/2)|xi|^2) E+ + exp(+i(t/2)|xi|^2) E-
            self.p_plus = np.broadcast_to(rep.energy_minus.matrix.reshape(shape), (nd, nd) + grid.shape)
            self.p_minus = np.broadcast_to(rep.energy_plus.matrix.reshape(shape), (nd, nd) + grid.shape)
        # P+ + P- = I everywhere, so flow(t) = cos(t w) I + i sin(t w) D with
        # the Hermitian involution D = P+ - P- (one matrix apply per flow)
        self.invol = self.p_plus - self.p_minus

    def apply(self, f, t):
        if f.repr != FREQUENCY:
            raise ValueError("free flows apply in the frequency representation")
        if t == 0.0:
            return f.copy()
        rotated = np.einsum("ab...,b...->a...", self.invol, f.data)
        data = np.cos(t * self.omega) * f.data + (1j * np.sin(t * self.omega)) * rotated
        return SpinorField(f.grid, data, FREQUENCY)

    def max_group_speed(self, active_mask=None):
        """Largest group velocity |grad_xi omega| over active modes (wrap-around cap)."""
        xi_norm = self.grid.freq_norm()
        if self.spec.kind == DIRAC_MASS:
            bracket = mass_bracket(xi_norm, self.spec.mass)
            speed = np.divide(xi_norm, bracket, out=np.zeros_like(xi_norm), where=bracket > 0)
        elif self.spec.kind == DIRAC_SPEED:
            c = self.spec.speed
            speed = c * xi_norm / mass_bracket(xi_norm, c)
        else:
            speed = xi_norm
        if active_mask is None:
            active_mask = self.grid.dealias_mask()
        return float(np.max(speed[active_mask]))


def apply_free_flow(f, spec, t):
    """One-shot free flow application (constructs the propagator ad hoc)."""
    return Propagator(spec, f.grid).apply(f, t)


def box_horizon(spec, grid):
    """T_box = L / (2 * max group speed): largest horizon safe from wrap-around."""
    v = Propagator(spec, grid).max_group_speed()
    if v == 0.0:
        return np.inf
    return grid.box_length / (2.0 * v)


@dataclass(frozen=True)
class SobolevWeight:
    """Weight |xi|^sigma <xi>_m^(s-sigma) of the two-scale Sobolev norm."""

    s: float
    sigma: float
    m: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    def values(self, grid):
        xi_norm = grid.freq_norm()
        bracket = mass_bracket(xi_norm, self.m)
        origin = (0,) * grid.dim
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.sigma == 0.0:
                low = np.ones_like(xi_norm)
            else:
                low = xi_norm**self.sigma
            if self.m == 0.0:
                bracket = bracket.copy()
                bracket[origin] = 1.0
            high = bracket ** (self.s - self.sigma)
        w = low * high
        if self.sigma > 0.0:
            w[origin] = 0.0
        elif self.m == 0.0:
            # |xi|^0 <xi>_0^s: the zero mode carries weight 0 unless s == 0
            w[origin] = 1.0 if self.s == 0.0 else 0.0
        return w


def sobolev_norm(f, s, sigma, m):
    """H^{s,sigma}_m norm: l2 of weight(xi) * f_hat(xi) (transforms internally)."""
    if f.repr != FREQUENCY:
        f = to_frequency(f)
    w = SobolevWeight(s, sigma, m).values(f.grid)
    return float(np.sqrt(np.sum((w**2) * np.sum(np.abs(f.data) ** 2, axis=0))))


def shell_mask(grid, lam):
    """Sharp dyadic shell {lam/2 < |xi| <= lam}."""
    xi_norm = grid.freq_norm()
    return (xi_norm > lam / 2.0) & (xi_norm <= lam)


def band_mask(grid, lo, hi):
    """Sharp band {lo <= |xi| <= hi} (lo = 0 includes the zero mode)."""
    xi_norm = grid.freq_norm()
    return (xi_norm >= lo) & (xi_norm <= hi)


def littlewood_paley(f, lam):
    """P_lam: sharp restriction to the dyadic shell lam/2 < |xi| <= lam."""
    if f.repr != FREQUENCY:
        raise ValueError("littlewood_paley applies in the frequency representation")
    out = f.copy()
    out.data *= shell_mask(f.grid, lam)
    return out


def band_project(f, lo, hi):
    """P_{[lo, hi]}: sharp restriction to lo <= |xi| <= hi."""
    if f.repr != FREQUENCY:
        raise ValueError("band_project applies in the frequency representation")
    out = f.copy()
    out.data *= band_mask(f.grid, lo, hi)
    return out


def lattice_shells(grid):
    """The dyadic lam in 2^Z whose shells meet the (nonzero) frequency lattice."""
    xi_norm = grid.freq_norm()
    positive = xi_norm[xi_norm > 0]
    lo, hi = float(np.min(positive)), float(np.max(positive))
    k_min = int(np.ceil(np.log2(lo)))
    k_max = int(np.ceil(np.log2(hi)))
    return [2.0**k for k in range(k_min, k_max + 1)]


def direction_mask(grid, cap, sign=+1, family=None, cap_index=None):
    """Lattice mask of {xi != 0 : sign * xi/|xi| in cap}.

    Pass either a MetricCap via `cap`, or a (CapFamily, index) pair for the
    sharp partition families.  The zero mode belongs to no cap.
    """
    grids = np.meshgrid(*([grid.freq_axis()] * grid.dim), indexing="ij")
    vecs = np.stack(grids, axis=-1)
    norms = np.linalg.norm(vecs, axis=-1)
    nonzero = norms > 0
    dirs = np.zeros_like(vecs)
    dirs[nonzero] = sign * vecs[nonzero] / norms[nonzero][..., None]
    if family is not None:
        member = family.index_of(dirs) == cap_index
    else:
        member = cap.contains(dirs)
    return member & nonzero


def cap_project(f, cap, sign=+1, family=None, cap_index=None):
    """R_kappa: sharp restriction to frequencies with sign*xi/|xi| in the cap."""
    if f.repr != FREQUENCY:
        raise ValueError("cap_project applies in the frequency representation")
    out = f.copy()
    out.data *= direction_mask(f.grid, cap, sign=sign, family=family, cap_index=cap_index)
    return out


def spinor_cap_project(f, lam, m, family, cap_index):
    """P_{lam,kappa} = P_lam (R_kappa Pi_+ + R_{-kappa} Pi_-), the spinor cap cutoff."""
    if f.repr != FREQUENCY:
        raise ValueError("spinor_cap_project applies in the frequency representation")
    plus = apply_matrix_symbol(f, projection_symbol(f.grid, m, +1))
    minus = apply_matrix_symbol(f, projection_symbol(f.grid, m, -1))
    part_plus = cap_project(plus, None, sign=+1, family=family, cap_index=cap_index)
    part_minus = cap_project(minus, None, sign=-1, family=family, cap_index=cap_index)
    return littlewood_paley(part_plus + part_minus, lam)


def critical_exponents(dim):
    """(s_d, sigma_d) = ((d-1)/2, (d-2)/2)."""
    return (dim - 1) / 2.0, (dim - 2) / 2.0


def transfer_massless(f, m, sigma, t):
    """R_m^sigma(t) = (|xi|/<xi>_m)^(s_d - sigma) U_m(t) U_0(-t), applied pointwise."""
    if f.repr != FREQUENCY:
        raise ValueError("transfer operators apply in the frequency representation")
    grid = f.grid
    s_d, _ = critical_exponents(grid.dim)
    g = apply_free_flow(f, PropagatorSpec.dirac_mass(0.0), -t)
    g = apply_free_flow(g, PropagatorSpec.dirac_mass(m), t)
    xi_norm = grid.freq_norm()
    ratio = np.ones_like(xi_norm) if m == 0.0 else xi_norm / mass_bracket(xi_norm, m)
    out = g.copy()
    out.data *= ratio ** (s_d - sigma)
    return out


def phase_matrix(dim, theta):
    """exp(i theta gamma^0) = exp(i theta) E+ + exp(-i theta) E- (constant matrix)."""
    rep = gamma_rep(dim)
    return np.exp(1j * theta) * rep.energy_plus.matrix + np.exp(-1j * theta) * rep.energy_minus.matrix


def transfer_nonrel_mod(f, c, t):
    """RAdj_c^mod(t) = <xi/c>^(-1/2) exp(i t c^2 gamma^0) V_c(t) V_inf(-t).

    As c -> infty at fixed (t, xi) the symbol converges to the identity; the
    exp(i t c^2 gamma^0) factor alone is an exact isometry.
    """
    if f.repr != FREQUENCY:
        raise ValueError("transfer operators apply in the frequency representation")
    grid = f.grid
    g = apply_free_flow(f, PropagatorSpec.schrodinger(), -t)
    g = apply_free_flow(g, PropagatorSpec.dirac_speed(c), t)
    mod = phase_matrix(grid.dim, t * c * c)
    data = np.einsum("ab,b...->a...", mod, g.data)
    weight = mass_bracket(grid.freq_norm() / c, 1.0) ** -0.5
    return SpinorField(grid, weight * data, FREQUENCY)
