"""Acceptance suite: one test per criterion, each printing a PASS line with
its runtime and asserting the stated tolerance and budget.

Budgets (wall clock): algebra < 1 s, Fierz/resonant < 5 s, solver < 5 min,
each linear rate < 2 min, nonlinear limits < 30 min, estimates < 10 min.
"""

import itertools
import time

import numpy as np
import pytest

from diraclab.algebra import anticommutator_residual, build_gamma
from diraclab.caps import whitney_pairs
from diraclab.cli import main as cli_main
from diraclab.estimates import (
    PVarPath,
    bilinear_l2_sweep,
    modulation_identity_check,
    null_gain_sweep,
    strichartz_sweep,
    vp_variation,
    whitney_reconstruct,
)
from diraclab.fields import Grid, random_field, to_frequency, to_physical
from diraclab.limits import (
    SweepConfig,
    bump_profile,
    massless_limit_run,
    nonrel_limit_run,
    normalize_sobolev,
)
from diraclab.multipliers import (
    PropagatorSpec,
    adjusted_projection_symbol,
    apply_free_flow,
    critical_exponents,
    projection_symbol,
)
from diraclab.nonlinearity import (
    NonlinearitySpec,
    RESONANT_HARMONICS,
    eval_nonlinearity,
    extract_pieces_oracle,
    fierz_residual,
    null_condition_residual,
    phase_apply,
    resonant_decompose,
)
from diraclab.solver import EvolutionProblem, evolve


def report(criterion, name, t0):
    print(f"ACCEPTANCE {criterion} ({name}): PASS ({time.time() - t0:.1f}s)")


def profile(grid, **kw):
    return bump_profile(grid, **kw)


# ---------------------------------------------------------------- criterion 1


def test_criterion_1_algebra_suite():
    t0 = time.time()
    for dim in (2, 3):
        rep = build_gamma(dim)
        assert anticommutator_residual(rep) == 0.0
        ep, em = rep.energy_plus.matrix, rep.energy_minus.matrix
        assert np.array_equal(ep @ ep, ep) and np.array_equal(ep + em, np.eye(rep.spinor_dim))
        assert null_condition_residual(np.eye(rep.spinor_dim, dtype=complex), rep) == 0.0
        grid = Grid(dim=dim, n=16 if dim == 2 else 8, box_length=2 * np.pi)
        for m in (0.0, 0.5, 2.0):
            pp = projection_symbol(grid, m, +1)
            pm = projection_symbol(grid, m, -1)
            nd = grid.spinor_dim
            eye = np.eye(nd).reshape((nd, nd) + (1,) * dim)
            idem = np.abs(np.einsum("ab...,bc...->ac...", pp, pp) - pp)
            orth = np.abs(np.einsum("ab...,bc...->ac...", pp, pm))
            if m == 0.0:
                origin = (slice(None), slice(None)) + (0,) * dim
                idem[origin] = 0.0
                orth[origin] = 0.0
            assert float(np.max(idem)) <= 1e-12
            assert float(np.max(orth)) <= 1e-12
            assert float(np.max(np.abs(pp + pm - eye))) <= 1e-12
            assert float(np.max(np.abs(pp - np.conj(np.swapaxes(pp, 0, 1))))) <= 1e-12
        for c in (2.0, 16.0):
            pa = adjusted_projection_symbol(grid, c, +1)
            assert float(np.max(np.abs(np.einsum("ab...,bc...->ac...", pa, pa) - pa))) <= 1e-12
    rep3 = build_gamma(3)
    assert np.array_equal(rep3.gamma5 @ rep3.gamma5, np.eye(4, dtype=complex))
    assert np.array_equal(rep3.gamma0 @ rep3.gamma5 + rep3.gamma5 @ rep3.gamma0, np.zeros((4, 4)))
    assert null_condition_residual(rep3.gamma5, rep3) == 0.0
    elapsed = time.time() - t0
    assert elapsed < 1.0
    report(1, "algebra suite", t0)


# ---------------------------------------------------------------- criterion 2


def test_criterion_2_fierz_resonant_suite():
    t0 = time.time()
    rep3 = build_gamma(3)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        worst = max(worst, fierz_residual(psi, rep3))
    assert worst <= 1e-12

    for spec, rep in (
        (NonlinearitySpec.soler(), rep3),
        (NonlinearitySpec.thirring(), rep3),
        (NonlinearitySpec.thirring(), build_gamma(2)),
    ):
        pieces = resonant_decompose(spec, rep)
        for _ in range(50):
            psi = rng.standard_normal(rep.spinor_dim) + 1j * rng.standard_normal(rep.spinor_dim)
            theta = float(rng.uniform(0, 2 * np.pi))
            lhs = eval_nonlinearity(spec, phase_apply(theta, psi, rep), rep)
            rhs = pieces.reconstruct(theta, psi, rep)
            # roundoff scales with the summand size |psi|^3, not with |F|,
            # which can degenerate (psibar psi is an indefinite form)
            cube = max(float(np.max(np.abs(psi))) ** 3, 1e-30)
            scale = max(float(np.max(np.abs(lhs))), cube)
            assert float(np.max(np.abs(lhs - rhs))) <= 1e-12 * scale
            extracted = extract_pieces_oracle(spec, psi, rep)
            for k in RESONANT_HARMONICS:
                assert float(np.max(np.abs(pieces(k, psi) - extracted[k]))) <= 1e-12 * cube
            if spec.kind == "soler":
                for k in (-3, -1, 3):
                    assert float(np.max(np.abs(extracted[k]))) <= 1e-12 * cube
            if spec.kind == "thirring" and rep.dim == 3:
                assert float(np.max(np.abs(extracted[-1]))) <= 1e-12 * cube
                assert float(np.max(np.abs(extracted[3]))) <= 1e-12 * cube
    elapsed = time.time() - t0
    assert elapsed < 5.0
    report(2, "Fierz + resonant suite", t0)


# ---------------------------------------------------------------- criterion 3


def test_criterion_3_solver_suite():
    t0 = time.time()
    s_d, sigma_d = critical_exponents(2)

    # free-flow exactness
    grid_small = Grid(dim=2, n=32, box_length=2 * np.pi)
    f = profile(grid_small, center=[1.0, 0.0], seed=1)
    f = normalize_sobolev(f, s_d, sigma_d, 1.0, 0.5)
    prob = EvolutionProblem(
        propagator=PropagatorSpec.dirac_mass(1.0), nonlinearity=None, initial_data=f,
        horizon=1.0, dt=0.25,
    )
    traj = evolve(prob)
    assert (traj.states[-1] - traj.states[0]).l2_norm() <= 1e-12
    expected = apply_free_flow(traj.states[0], prob.propagator, float(traj.times[-1]))
    got = to_frequency(traj.physical_state(len(traj.times) - 1))
    assert (got - expected).l2_norm() <= 1e-12

    # charge drift at the reference settings (d=2, n=128, dt=1e-3, T=1)
    grid_ref = Grid(dim=2, n=128, box_length=16 * np.pi)
    f_ref = profile(grid_ref, seed=2, projection_mass=1.0, band=(1.0, 4.0))
    f_ref = normalize_sobolev(f_ref, s_d, sigma_d, 1.0, 0.05)
    prob = EvolutionProblem(
        propagator=PropagatorSpec.dirac_mass(1.0),
        nonlinearity=NonlinearitySpec.soler(),
        initial_data=f_ref, horizon=1.0, dt=1e-3, sample_stride=10,
    )
    traj = evolve(prob)
    drift = float(np.max(np.abs(traj.charges - traj.charges[0])) / traj.charges[0])
    assert drift <= 1e-8

    # RK4 self-convergence on dt halving
    f_conv = profile(grid_small, seed=3)
    f_conv = (2.0 / f_conv.l2_norm()) * f_conv

    def run(dt):
        p = EvolutionProblem(
            propagator=PropagatorSpec.dirac_mass(1.0),
            nonlinearity=NonlinearitySpec.soler(),
            initial_data=f_conv, horizon=0.4, dt=dt, sample_stride=10**9,
        )
        return evolve(p).states[-1]

    ref = run(0.0025)
    ratio = (run(0.02) - ref).l2_norm() / (run(0.01) - ref).l2_norm()
    assert 12.0 <= ratio <= 20.0

    # mass-rescaling equivalence (alpha = 2)
    alpha, m_low, T, dt = 2.0, 0.5, 0.4, 0.004
    grid_half = Grid(dim=2, n=32, box_length=np.pi)
    f_m = profile(grid_small, seed=4)
    f_m = (1.0 / f_m.l2_norm()) * f_m

    def soler_run(grid, data, horizon, dt, mass):
        p = EvolutionProblem(
            propagator=PropagatorSpec.dirac_mass(mass),
            nonlinearity=NonlinearitySpec.soler(),
            initial_data=data, horizon=horizon, dt=dt, sample_stride=10**9,
        )
        return evolve(p)

    traj_m = soler_run(grid_small, f_m, alpha * T, dt, m_low)
    psi_end = traj_m.physical_state(len(traj_m.times) - 1)
    from diraclab.fields import SpinorField

    phi0 = SpinorField(grid_half, np.sqrt(alpha) * to_physical(f_m).data, "physical")
    traj_am = soler_run(grid_half, phi0, T, dt / alpha, alpha * m_low)
    phi_end = traj_am.physical_state(len(traj_am.times) - 1)
    gap = np.max(np.abs(phi_end.data - np.sqrt(alpha) * psi_end.data))
    assert gap <= 1e-6 * np.max(np.abs(phi_end.data))

    # c-rescaling equivalence (c = 2)
    c = 2.0
    grid_big = Grid(dim=2, n=32, box_length=c * 2 * np.pi)
    f_c = profile(grid_small, seed=5)
    f_c = (1.0 / f_c.l2_norm()) * f_c
    prob_c = EvolutionProblem(
        propagator=PropagatorSpec.dirac_speed(c),
        nonlinearity=NonlinearitySpec.soler(),
        initial_data=f_c, horizon=T / c**2, dt=dt / c**2, sample_stride=10**9,
    )
    traj_c = evolve(prob_c)
    psi_end = traj_c.physical_state(len(traj_c.times) - 1)
    phi0 = SpinorField(grid_big, to_physical(f_c).data / c, "physical")
    traj_1 = soler_run(grid_big, phi0, T, dt, 1.0)
    phi_end = traj_1.physical_state(len(traj_1.times) - 1)
    gap = np.max(np.abs(phi_end.data - psi_end.data / c))
    assert gap <= 1e-6 * np.max(np.abs(phi_end.data))

    elapsed = time.time() - t0
    assert elapsed < 300.0
    report(3, "solver suite", t0)


# ---------------------------------------------------------------- criterion 4


def test_criterion_4_massless_linear_rate():
    t0 = time.time()
    grid = Grid(dim=2, n=64, box_length=8 * np.pi)
    s_d, sigma_d = critical_exponents(2)
    data = profile(grid, seed=11, projection_mass=0.0, band=(1.0, 4.0))
    data = normalize_sobolev(data, s_d, sigma_d, 0.5, 0.05)
    cfg = SweepConfig(
        kind="mass",
        values=(0.5, 0.25, 0.125, 0.0625, 0.03125),
        grid=grid, nonlinearity=None, data=data, horizon=1.0, cutoff=4.0,
    )
    rep = massless_limit_run(cfg)
    slope = rep.fitted_slope("transfer_residual")
    assert 0.8 <= slope <= 1.2
    elapsed = time.time() - t0
    assert elapsed < 120.0
    report(4, f"massless linear rate, slope {slope:+.3f}", t0)


# ---------------------------------------------------------------- criterion 5


def test_criterion_5_nonrel_linear_rate():
    t0 = time.time()
    grid = Grid(dim=2, n=64, box_length=8 * np.pi)
    _, sigma_d = critical_exponents(2)
    data = profile(grid, center=[1.0, 0.0], width=0.75, seed=12, projection_mass=1.0, band=(0.0, 4.0))
    data = normalize_sobolev(data, sigma_d + 0.5, sigma_d, 1.0, 0.05)
    cfg = SweepConfig(
        kind="speed",
        values=(2.0, 4.0, 8.0, 16.0),
        grid=grid, nonlinearity=None, data=data, horizon=1.0, cutoff=4.0,
    )
    rep = nonrel_limit_run(cfg)
    slope = rep.fitted_slope("transfer_residual")
    assert -1.2 <= slope <= -0.8
    elapsed = time.time() - t0
    assert elapsed < 120.0
    report(5, f"nonrel linear rate, slope {slope:+.3f}", t0)


# ---------------------------------------------------------------- criterion 6


def _assert_monotone_quarter(values, label):
    assert all(b < a for a, b in zip(values, values[1:])), f"{label}: {values}"
    assert values[-1] <= 0.25 * values[0], f"{label}: final/initial {values[-1] / values[0]:.3f}"


def test_criterion_6_nonlinear_limits():
    t0 = time.time()
    s_d, sigma_d = critical_exponents(2)
    grid2 = Grid(dim=2, n=128, box_length=16 * np.pi)

    # massless sweeps, d=2 (Thirring = Soler in d=2 but runs the Fierz path)
    data_m = profile(grid2, seed=21, projection_mass=0.0, band=(1.0, 4.0))
    data_m = normalize_sobolev(data_m, s_d, sigma_d, 0.5, 0.05)
    for spec in (NonlinearitySpec.soler(), NonlinearitySpec.thirring()):
        cfg = SweepConfig(
            kind="mass",
            values=(0.5, 0.25, 0.125, 0.0625, 0.03125),
            grid=grid2, nonlinearity=spec, data=data_m, horizon=1.0, dt=1e-3,
            sample_stride=10,
        )
        rep = massless_limit_run(cfg)
        _, pull = rep.series("pullback_hdot_sup")
        _assert_monotone_quarter(pull, f"massless {spec.kind}")

    # non-relativistic sweep, Soler at d=2
    data_c = profile(grid2, center=[1.0, 0.0], width=0.75, seed=22, projection_mass=1.0, band=(0.0, 4.0))
    data_c = normalize_sobolev(data_c, sigma_d + 0.5, sigma_d, 1.0, 0.05)
    cfg = SweepConfig(
        kind="speed",
        values=(2.0, 4.0, 8.0, 16.0),
        grid=grid2, nonlinearity=NonlinearitySpec.soler(), data=data_c, horizon=1.0,
        dt=1e-3, sample_stride=10,
    )
    rep = nonrel_limit_run(cfg)
    _, gaps = rep.series("corrected_gap_sup")
    _assert_monotone_quarter(gaps, "nonrel soler")

    # non-relativistic sweep, Thirring with the gamma5 resonant corrections:
    # these exist only in d=3, so this sweep runs on the d=3 desk grid
    grid3 = Grid(dim=3, n=32, box_length=8 * np.pi)
    _, sigma_3 = critical_exponents(3)
    data_3 = profile(grid3, center=[1.0, 0.0, 0.0], width=0.75, seed=23, projection_mass=1.0, band=(0.0, 2.0))
    data_3 = normalize_sobolev(data_3, sigma_3 + 0.5, sigma_3, 1.0, 0.05)
    rep3 = build_gamma(3)
    spec = NonlinearitySpec.thirring()
    pieces = resonant_decompose(spec, rep3)
    phys = to_physical(data_3)
    full = eval_nonlinearity(spec, phys.data, rep3)
    gamma5_part = np.max(np.abs(pieces(1, phys.data) - full))
    assert gamma5_part > 1e-3 * np.max(np.abs(full))  # resonant target differs from F
    cfg = SweepConfig(
        kind="speed",
        values=(2.0, 4.0, 8.0, 16.0),
        grid=grid3, nonlinearity=spec, data=data_3, horizon=1.0, dt=2e-3,
        sample_stride=10, cutoff=2.0,
    )
    rep = nonrel_limit_run(cfg)
    _, gaps = rep.series("corrected_gap_sup")
    _assert_monotone_quarter(gaps, "nonrel thirring d=3")

    elapsed = time.time() - t0
    assert elapsed < 1800.0
    report(6, "nonlinear limits", t0)


# ---------------------------------------------------------------- criterion 7


def brute_force_vp(values, p):
    vals = np.asarray(values, dtype=complex).reshape(len(values), -1)
    best = 0.0
    for size in range(2, len(vals) + 1):
        for combo in itertools.combinations(range(len(vals)), size):
            total = sum(
                np.linalg.norm(vals[combo[k + 1]] - vals[combo[k]]) ** p
                for k in range(size - 1)
            )
            best = max(best, total)
    return best ** (1.0 / p)


def test_criterion_7_estimates_suite():
    t0 = time.time()
    grid = Grid(dim=2, n=64, box_length=4 * np.pi)

    stri = strichartz_sweep(
        grid, m=0.0, q=6.0, r=6.0, lams=[1.0, 2.0, 4.0, 8.0, 16.0], draws=64,
        time_samples=257, seed=70,
    )
    _, values = stri.series("ratio_max")
    assert len(values) == 5
    assert max(values) / min(values) <= 8.0

    bili = bilinear_l2_sweep(
        grid, m=0.0, lam=16.0, mus=[1.0, 2.0, 4.0], alphas=[1.0, 0.5, 0.25], draws=64,
        time_samples=257, seed=71,
    )
    bvalues = [v for _, _, v in bili.rows]
    assert len(bvalues) >= 6  # a couple of thin-lattice combos may be skipped
    assert max(bvalues) / min(bvalues) <= 16.0

    gain = null_gain_sweep(grid, lam=4.0, mu=4.0, alphas=[1.0, 0.5, 0.25], draws=64,
                           time_samples=257, seed=72)
    _, over = gain.series("gain_over_alpha")
    assert len(over) == 3
    assert all(0.5 <= v <= 2.0 for v in over)

    f = random_field(grid, seed=73)
    g = random_field(grid, seed=74)
    for m in (0.0, 1.0):
        out = whitney_reconstruct(f, g, lam=8.0, mu=4.0, m=m, max_level=5)
        assert out.residual <= 1e-12
    trivial = whitney_pairs(2, 100.0, 1.0, 1.0, max_level=5)
    assert list(trivial) == [1]

    assert modulation_identity_check(10000, 2, seed=75) <= 1e-10
    assert modulation_identity_check(10000, 3, seed=76) <= 1e-10

    rng = np.random.default_rng(77)
    for _ in range(10):
        nsamp = int(rng.integers(2, 13))
        vals = rng.standard_normal((nsamp, 2)) + 1j * rng.standard_normal((nsamp, 2))
        p = float(rng.uniform(1.0, 3.0))
        path = PVarPath(times=np.arange(float(nsamp)), values=vals)
        assert vp_variation(path, p) == pytest.approx(brute_force_vp(vals, p), rel=1e-12)

    elapsed = time.time() - t0
    assert elapsed < 600.0
    report(7, "estimates suite", t0)


# ---------------------------------------------------------------- criterion 8


def test_criterion_8_determinism(tmp_path):
    t0 = time.time()
    est_cfg = tmp_path / "est.cfg"
    est_cfg.write_text(
        "grid.dim = 2\n"
        "estimates.n = 32\n"
        "estimates.box_length = 2pi\n"
        "estimates.draws = 6\n"
        "estimates.time_samples = 65\n"
        "estimates.lams = 1, 2, 4\n"
        "run.seed = 11\n"
    )
    lim_cfg = tmp_path / "lim.cfg"
    lim_cfg.write_text(
        "grid.dim = 2\n"
        "grid.n = 32\n"
        "grid.box_length = 4pi\n"
        "problem.nonlinearity = none\n"
        "problem.horizon = 0.5\n"
        "sweep.masses = 0.5, 0.25, 0.125\n"
        "sweep.cutoff = 2\n"
        "run.seed = 11\n"
        "assertions.enabled = false\n"
        "output.svg = true\n"
    )
    outs = []
    for run in ("a", "b"):
        out = tmp_path / f"run-{run}"
        assert cli_main(["verify-estimates", "--config", str(est_cfg), "--out", str(out)]) in (0, 1)
        assert cli_main(["limit-massless", "--config", str(lim_cfg), "--out", str(out)]) == 0
        assert cli_main(["verify-algebra", "--config", str(est_cfg), "--out", str(out)]) == 0
        outs.append(out)
    names = [p.name for p in sorted(outs[0].iterdir())]
    assert "strichartz.csv" in names and "limit-massless.csv" in names
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
    report(8, "determinism", t0)
