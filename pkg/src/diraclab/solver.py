"""Interaction-picture exponential time integrator for the three evolutions:
cubic Dirac with mass m, cubic Dirac with speed c, and the limiting cubic NLS.

The state marched in time is the pulled-back variable u(t) = Flow(-t) psi(t),
which satisfies u'(t) = i Flow(-t) [gamma^0 F(Flow(t) u(t))].  The linear flow
is applied exactly through its Fourier symbol, so the step size is set by the
nonlinearity alone (uniformly in m and c); the ODE is integrated with
classical RK4.  Cubic products are evaluated in physical space and dealiased
with the 1/2 rule, so the marched system is the exact truncated convolution
dynamics on the dealiased lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import FREQUENCY, SpinorField, dealias_cubic, to_frequency, to_physical
from .multipliers import (
    SCHRODINGER,
    Propagator,
    PropagatorSpec,
    box_horizon,
    critical_exponents,
    gamma_rep,
    sobolev_norm,
)
from .nonlinearity import eval_nonlinearity, resonant_decompose


class SolverAbort(RuntimeError):
    """Raised when the state goes non-finite or leaves the small-data regime."""

    def __init__(self, message, time, norm_history):
        super().__init__(f"{message} at t={time:.6g}; charge history {norm_history}")
        self.time = time
        self.norm_history = norm_history


@dataclass
class EvolutionProblem:
    """One evolution run: propagator + nonlinearity + data + time stepping."""

    propagator: PropagatorSpec
    nonlinearity: object  # NonlinearitySpec or None for the free flow
    initial_data: SpinorField
    horizon: float
    dt: float
    sample_stride: int = 10
    blowup_factor: float = 10.0
    enforce_box_horizon: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.enforce_box_horizon:
            cap = box_horizon(self.propagator, self.initial_data.grid)
            if self.horizon > cap + 1e-12:
                raise ValueError(
                    f"horizon {self.horizon} exceeds the wrap-around cap T_box = {cap:.6g}"
                )


class _Context:
    """Precomputed machinery for one problem: flow symbols and the RHS."""

    def __init__(self, problem):
        grid = problem.initial_data.grid
        self.grid = grid
        self.rep = gamma_rep(grid.dim)
        self.prop = Propagator(problem.propagator, grid)
        self.gamma0 = self.rep.gamma0
        spec = problem.nonlinearity
        if spec is None:
            self.nonlin = None
        elif problem.propagator.kind == SCHRODINGER:
            pieces = resonant_decompose(spec, self.rep)
            self.nonlin = lambda data: pieces(1, data)
        else:
            self.nonlin = lambda data: eval_nonlinearity(spec, data, self.rep)

    def rhs(self, u, t):
        """i Flow(-t) gamma^0 F(Flow(t) u), dealiased."""
        if self.nonlin is None:
            return SpinorField.zeros(self.grid, FREQUENCY)
        psi = to_physical(self.prop.apply(u, t))
        f_val = self.nonlin(psi.data)
        data = 1j * np.einsum("ab,b...->a...", self.gamma0, f_val)
        g = to_frequency(SpinorField(self.grid, data, "physical"))
        g = dealias_cubic(g)
        return self.prop.apply(g, -t)

    def rk4_step(self, u, t, dt):
        k1 = self.rhs(u, t)
        k2 = self.rhs(u + (dt / 2.0) * k1, t + dt / 2.0)
        k3 = self.rhs(u + (dt / 2.0) * k2, t + dt / 2.0)
        k4 = self.rhs(u + dt * k3, t + dt)
        return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(problem, u, t, dt=None):
    """One classical RK4 step of the interaction-picture ODE.

    u must be a frequency-representation field (the pulled-back variable).
    dt defaults to problem.dt; a negative value steps backward in time
    (time-reversal diagnostics).
    """
    if u.repr != FREQUENCY:
        raise ValueError("interaction-picture state must be in frequency representation")
    ctx = _Context(problem)
    out = ctx.rk4_step(u, t, problem.dt if dt is None else dt)
    if not np.all(np.isfinite(out.data)):
        raise SolverAbort("non-finite state after step", t, [u.l2_norm()])
    return out


@dataclass
class Trajectory:
    """Sampled interaction-picture states u(t_k) = Flow(-t_k) psi(t_k) plus
    recorded charge and Sobolev norms of psi (which equal those of u, since
    scalar weights commute with the pointwise-unitary flow)."""

    problem: EvolutionProblem
    times: np.ndarray
    states: list
    charges: np.ndarray
    norms: dict

    def interaction_state(self, i):
        return self.states[i]

    def physical_state(self, i):
        ctx = _Context(self.problem)
        return to_physical(ctx.prop.apply(self.states[i], float(self.times[i])))

    def sample_index(self, t):
        return int(np.argmin(np.abs(self.times - t)))

    def to_csv(self, path, snapshot_ref=None):
        norm_names = sorted(self.norms)
        with open(path, "w") as fh:
            fh.write("# trajectory export: interaction-picture samples\n")
            cols = "t,charge," + ",".join(norm_names)
            if snapshot_ref is not None:
                cols += ",snapshot"
            fh.write(cols + "\n")
            for i, t in enumerate(self.times):
                row = [format(float(t), ".17g"), format(float(self.charges[i]), ".17g")]
                row += [format(float(self.norms[name][i]), ".17g") for name in norm_names]
                if snapshot_ref is not None:
                    row.append(snapshot_ref if i == len(self.times) - 1 else "")
                fh.write(",".join(row) + "\n")


def _norm_mass(spec):
    if spec.kind == "dirac_mass":
        return spec.mass
    if spec.kind == "dirac_speed":
        return 1.0
    return 0.0


def evolve(problem):
    """Iterate RK4 over [0, horizon]; record states and norms at sample times."""
    data = problem.initial_data
    if data.repr != FREQUENCY:
        data = to_frequency(data)
    u = dealias_cubic(data)
    ctx = _Context(problem)
    nsteps = max(1, int(round(problem.horizon / problem.dt)))
    dt = problem.horizon / nsteps
    grid = u.grid
    s_d, sigma_d = critical_exponents(grid.dim)
    m_rec = _norm_mass(problem.propagator)
    times = [0.0]
    states = [u.copy()]
    charges = [u.l2_norm()]
    norms = {"h_crit": [], "hdot_crit": []}
    norms["h_crit"].append(sobolev_norm(u, s_d, sigma_d, m_rec))
    norms["hdot_crit"].append(sobolev_norm(u, s_d, s_d, 0.0))
    charge0 = charges[0]
    for n in range(nsteps):
        t = n * dt
        u = ctx.rk4_step(u, t, dt)
        if (n + 1) % problem.sample_stride == 0 or n == nsteps - 1:
            t_next = (n + 1) * dt
            charge = u.l2_norm()
            if not np.isfinite(charge) or not np.all(np.isfinite(u.data)):
                raise SolverAbort("non-finite state", t_next, charges)
            if charge0 > 0 and charge > problem.blowup_factor * charge0:
                raise SolverAbort("norm growth beyond small-data monitor", t_next, charges)
            times.append(t_next)
            states.append(u.copy())
            charges.append(charge)
            norms["h_crit"].append(sobolev_norm(u, s_d, sigma_d, m_rec))
            norms["hdot_crit"].append(sobolev_norm(u, s_d, s_d, 0.0))
    return Trajectory(
        problem=problem,
        times=np.array(times),
        states=states,
        charges=np.array(charges),
        norms={k: np.array(v) for k, v in norms.items()},
    )


def evolve_nls(problem):
    """evolve() for the Schrodinger-limit flow with the resonant piece F_1."""
    if problem.propagator.kind != SCHRODINGER:
        raise ValueError("evolve_nls requires the schrodinger propagator")
    return evolve(problem)


@dataclass
class ScatteringProxy:
    """Finite-horizon stand-in for the scattering state: u(T) and the Cauchy
    increments of u over {T/4, T/2, T}."""

    state: SpinorField
    horizon: float
    increments: tuple


def scattering_proxy(trajectory):
    T = float(trajectory.times[-1])
    i_q = trajectory.sample_index(T / 4.0)
    i_h = trajectory.sample_index(T / 2.0)
    u_q = trajectory.states[i_q]
    u_h = trajectory.states[i_h]
    u_T = trajectory.states[-1]
    return ScatteringProxy(
        state=u_T.copy(),
        horizon=T,
        increments=((u_h - u_q).l2_norm(), (u_T - u_h).l2_norm()),
    )
