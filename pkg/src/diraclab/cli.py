"""Batch entry point.

    diraclab <command> [--config PATH] [--out DIR] [--seed U64] [--threads N]

Commands: verify-algebra | simulate | limit-massless | limit-nonrel |
verify-estimates.  Reports are written as CSV (plus SVG when requested) into
the output directory; one PASS/FAIL line per assertion group goes to stdout.
Exit codes: 0 all assertions pass, 1 named assertion failed, 2 config error,
3 solver abort.  The same config and seed reproduce byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys

import numpy as np

from .algebra import anticommutator_residual, build_gamma
from .caps import whitney_pairs
from .config import ConfigError, RunConfig, parse_config_file
from .estimates import (
    PVarPath,
    bilinear_l2_sweep,
    modulation_identity_check,
    null_gain_sweep,
    strichartz_sweep,
    vp_variation,
    whitney_reconstruct,
)
from .fields import Grid, random_field, save_snapshot
from .limits import (
    SweepConfig,
    bump_profile,
    massless_limit_run,
    nonrel_limit_run,
    normalize_sobolev,
)
from .multipliers import (
    PropagatorSpec,
    adjusted_projection_symbol,
    critical_exponents,
    projection_symbol,
)
from .nonlinearity import (
    NonlinearitySpec,
    RESONANT_HARMONICS,
    eval_nonlinearity,
    extract_pieces_oracle,
    fierz_residual,
    null_condition_residual,
    parse_nonlinearity,
    phase_apply,
    resonant_decompose,
)
from .reporting import ExperimentReport
from .solver import EvolutionProblem, SolverAbort, evolve

COMMANDS = ("verify-algebra", "simulate", "limit-massless", "limit-nonrel", "verify-estimates")


class Checks:
    """Named assertion groups with PASS/FAIL reporting."""

    def __init__(self):
        self.failures = []

    def check(self, name, ok, detail=""):
        if ok:
            print(f"PASS {name}")
        else:
            print(f"FAIL {name}" + (f": {detail}" if detail else ""))
            self.failures.append(name)
        return ok


def _grid_from_config(cfg):
    """Grid from config; a supplied config file must pin the grid completely
    (desk-scale defaults apply only when running without --config)."""
    dim = cfg.get_int("grid.dim", 2)
    if cfg.from_file:
        n = cfg.get_int("grid.n")
        box = cfg.get_float("grid.box_length")
    else:
        n = cfg.get_int("grid.n", 128 if dim == 2 else 32)
        box = cfg.get_float("grid.box_length", 16 * math.pi if dim == 2 else 8 * math.pi)
    return Grid(dim=dim, n=n, box_length=box)


def _data_from_config(cfg, grid, default_projection, default_band, seed,
                      default_center=1.5, default_width=1.0):
    projection = cfg.get_str("data.projection", default_projection)
    if projection == "none":
        proj_mass = None
    elif projection.startswith("pi_plus:"):
        proj_mass = float(projection.split(":", 1)[1])
    else:
        raise ConfigError("data.projection must be 'none' or 'pi_plus:<mass>'")
    band = cfg.get_float_list("data.band", default_band)
    band = tuple(band) if band else None
    return bump_profile(
        grid,
        center=cfg.get_float_list("data.center", [default_center] + [0.0] * (grid.dim - 1)),
        width=cfg.get_float("data.width", default_width),
        seed=cfg.get_int("data.seed", seed),
        projection_mass=proj_mass,
        band=band,
    )


def _write(report, outdir, name, svg):
    path = os.path.join(outdir, name + ".csv")
    report.to_csv(path)
    if svg:
        report.to_svg(os.path.join(outdir, name + ".svg"))
    return path


# ---------------------------------------------------------------- commands


def cmd_verify_algebra(cfg, outdir, seed, svg):
    checks = Checks()
    report = ExperimentReport(name="verify-algebra", metadata={"seed": seed})
    rng = np.random.default_rng(seed)
    for dim in (2, 3):
        rep = build_gamma(dim)
        r = anticommutator_residual(rep)
        report.add(dim, "anticommutator_residual", r)
        checks.check(f"algebra.anticommutation.d{dim}", r == 0.0, f"residual {r}")
        if dim == 3:
            g5 = rep.gamma5
            ok = np.array_equal(g5 @ g5, np.eye(4, dtype=complex)) and np.array_equal(
                rep.gamma0 @ g5 + g5 @ rep.gamma0, np.zeros((4, 4))
            )
            checks.check("algebra.gamma5", ok)
        # projection identities on a small lattice, several masses
        grid = Grid(dim=dim, n=16 if dim == 2 else 8, box_length=2 * math.pi)
        worst = 0.0
        for m in (0.0, 0.5, 1.0, 4.0):
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
            worst = max(
                worst,
                float(np.max(idem)),
                float(np.max(orth)),
                float(np.max(np.abs(pp + pm - eye))),
                float(np.max(np.abs(pp - np.conj(np.swapaxes(pp, 0, 1))))),
            )
        for c in (2.0, 8.0):
            pa = adjusted_projection_symbol(grid, c, +1)
            pb = adjusted_projection_symbol(grid, c, -1)
            nd = grid.spinor_dim
            eye = np.eye(nd).reshape((nd, nd) + (1,) * dim)
            worst = max(
                worst,
                float(np.max(np.abs(np.einsum("ab...,bc...->ac...", pa, pa) - pa))),
                float(np.max(np.abs(pa + pb - eye))),
            )
        report.add(dim, "projection_identity_residual", worst)
        checks.check(f"algebra.projection-identities.d{dim}", worst <= 1e-12, f"residual {worst}")
        # energy projections
        ep, em = rep.energy_plus.matrix, rep.energy_minus.matrix
        ok = np.array_equal(ep @ ep, ep) and np.array_equal(ep + em, np.eye(rep.spinor_dim))
        checks.check(f"algebra.energy-projections.d{dim}", ok)
        # null condition for the Soler matrix (identity) and gamma5 (d=3)
        nc = null_condition_residual(np.eye(rep.spinor_dim, dtype=complex), rep)
        if dim == 3:
            nc = max(nc, null_condition_residual(rep.gamma5, rep))
        report.add(dim, "null_condition_residual", nc)
        checks.check(f"algebra.null-condition.d{dim}", nc == 0.0)

    # Fierz + resonant suite (d=3 heavy part)
    rep = build_gamma(3)
    worst_fierz = 0.0
    for _ in range(1000):
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        worst_fierz = max(worst_fierz, fierz_residual(psi, rep))
    report.add(3, "fierz_residual", worst_fierz)
    checks.check("nonlinearity.fierz", worst_fierz <= 1e-12, f"residual {worst_fierz}")

    worst_recon = 0.0
    worst_gap = 0.0
    for spec_name, spec, dim in (
        ("soler", NonlinearitySpec.soler(), 3),
        ("thirring", NonlinearitySpec.thirring(), 3),
        ("thirring", NonlinearitySpec.thirring(), 2),
    ):
        rep_d = build_gamma(dim)
        pieces = resonant_decompose(spec, rep_d)
        for trial in range(100):
            psi = rng.standard_normal(rep_d.spinor_dim) + 1j * rng.standard_normal(rep_d.spinor_dim)
            theta = float(rng.uniform(0, 2 * math.pi))
            lhs = eval_nonlinearity(spec, phase_apply(theta, psi, rep_d), rep_d)
            rhs = pieces.reconstruct(theta, psi, rep_d)
            # roundoff scale: the summand size |psi|^3 (|F| can degenerate)
            scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(psi))) ** 3, 1e-30)
            worst_recon = max(worst_recon, float(np.max(np.abs(lhs - rhs))) / scale)
            extracted = extract_pieces_oracle(spec, psi, rep_d)
            for k in RESONANT_HARMONICS:
                gap = np.max(np.abs(pieces(k, psi) - extracted[k]))
                worst_gap = max(worst_gap, float(gap) / max(np.max(np.abs(psi)) ** 3, 1e-30))
    report.add(3, "resonant_reconstruction_residual", worst_recon)
    report.add(3, "resonant_oracle_gap", worst_gap)
    checks.check("nonlinearity.resonant-reconstruction", worst_recon <= 1e-12)
    checks.check("nonlinearity.resonant-oracle", worst_gap <= 1e-12)
    # Soler F1 = F and Thirring F_{-1} = F_3 = 0 against the oracle
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    soler_pieces = extract_pieces_oracle(NonlinearitySpec.soler(), psi, rep)
    thirring_pieces = extract_pieces_oracle(NonlinearitySpec.thirring(), psi, rep)
    scale = float(np.max(np.abs(psi))) ** 3
    ok = (
        max(np.max(np.abs(soler_pieces[k])) for k in (-3, -1, 3)) <= 1e-12 * scale
        and np.max(np.abs(thirring_pieces[-1])) <= 1e-12 * scale
        and np.max(np.abs(thirring_pieces[3])) <= 1e-12 * scale
    )
    checks.check("nonlinearity.resonant-support", ok)
    _write(report, outdir, "verify-algebra", svg)
    return checks


def cmd_simulate(cfg, outdir, seed, svg):
    checks = Checks()
    grid = _grid_from_config(cfg)
    rep = build_gamma(grid.dim)
    kind = cfg.get_str("simulate.propagator", "mass:1")
    if kind == "schrodinger":
        prop = PropagatorSpec.schrodinger()
    elif kind.startswith("mass:"):
        prop = PropagatorSpec.dirac_mass(float(kind.split(":", 1)[1]))
    elif kind.startswith("speed:"):
        prop = PropagatorSpec.dirac_speed(float(kind.split(":", 1)[1]))
    else:
        raise ConfigError("simulate.propagator must be 'mass:<m>', 'speed:<c>' or 'schrodinger'")
    nonlin = parse_nonlinearity(cfg.get_str("problem.nonlinearity", "soler"), rep)
    data = _data_from_config(cfg, grid, "pi_plus:1", [1.0, 4.0], seed)
    s_d, sigma_d = critical_exponents(grid.dim)
    amplitude = cfg.get_float("problem.amplitude", 0.05)
    data = normalize_sobolev(data, s_d, sigma_d, m=1.0, target=amplitude)
    problem = EvolutionProblem(
        propagator=prop,
        nonlinearity=nonlin,
        initial_data=data,
        horizon=cfg.get_float("problem.horizon", 1.0),
        dt=cfg.get_float("problem.dt", 1e-3),
        sample_stride=cfg.get_int("problem.sample_stride", 10),
    )
    traj = evolve(problem)
    snapshot_ref = None
    if cfg.get_bool("output.snapshot", False):
        snapshot_ref = "final-state.csv"
        save_snapshot(traj.states[-1], os.path.join(outdir, snapshot_ref))
    traj.to_csv(os.path.join(outdir, "trajectory.csv"), snapshot_ref=snapshot_ref)
    drift = float(np.max(np.abs(traj.charges - traj.charges[0])) / traj.charges[0])
    checks.check("simulate.charge-drift", drift <= 1e-8, f"relative drift {drift:.3e}")
    print(f"wrote {os.path.join(outdir, 'trajectory.csv')}")
    return checks


def cmd_limit_massless(cfg, outdir, seed, svg):
    checks = Checks()
    grid = _grid_from_config(cfg)
    rep = build_gamma(grid.dim)
    nonlin = parse_nonlinearity(cfg.get_str("problem.nonlinearity", "none"), rep)
    masses = cfg.get_float_list("sweep.masses", [0.5, 0.25, 0.125, 0.0625, 0.03125])
    cutoff = cfg.get_float("sweep.cutoff", 4.0)
    data = _data_from_config(cfg, grid, "pi_plus:0", [1.0, cutoff], seed)
    s_d, sigma_d = critical_exponents(grid.dim)
    m_max = max([m for m in masses if m > 0], default=1.0)
    data = normalize_sobolev(data, s_d, sigma_d, m=m_max, target=cfg.get_float("problem.amplitude", 0.05))
    sweep = SweepConfig(
        kind="mass",
        values=tuple(masses),
        grid=grid,
        nonlinearity=nonlin,
        data=data,
        horizon=cfg.get_float("problem.horizon", 1.0),
        dt=cfg.get_float("problem.dt", 1e-3),
        sample_stride=cfg.get_int("problem.sample_stride", 10),
        cutoff=cutoff,
    )
    report = massless_limit_run(sweep)
    report.metadata["seed"] = seed
    _write(report, outdir, "limit-massless", svg)
    if cfg.get_bool("assertions.enabled", True):
        if nonlin is None:
            slope = report.fitted_slope("transfer_residual")
            checks.check(
                "massless.linear-rate", 0.8 <= slope <= 1.2, f"slope {slope:.3f} outside [0.8, 1.2]"
            )
        else:
            _, pull = report.series("pullback_hdot_sup")
            mono = all(b < a for a, b in zip(pull, pull[1:]))
            checks.check("massless.monotone", mono, f"values {pull}")
            checks.check(
                "massless.quarter", pull[-1] <= 0.25 * pull[0], f"final/initial {pull[-1]/pull[0]:.3f}"
            )
    return checks


def cmd_limit_nonrel(cfg, outdir, seed, svg):
    checks = Checks()
    grid = _grid_from_config(cfg)
    rep = build_gamma(grid.dim)
    nonlin = parse_nonlinearity(cfg.get_str("problem.nonlinearity", "none"), rep)
    speeds = cfg.get_float_list("sweep.speeds", [2.0, 4.0, 8.0, 16.0])
    cutoff = cfg.get_float("sweep.cutoff", 4.0)
    # concentrate the bump at low frequency so the c = 2 entry is not
    # saturated by modes with |xi|/c = O(1)
    data = _data_from_config(
        cfg, grid, "pi_plus:1", [0.0, cutoff], seed, default_center=1.0, default_width=0.75
    )
    _, sigma_d = critical_exponents(grid.dim)
    data = normalize_sobolev(
        data, sigma_d + 0.5, sigma_d, m=1.0, target=cfg.get_float("problem.amplitude", 0.05)
    )
    sweep = SweepConfig(
        kind="speed",
        values=tuple(speeds),
        grid=grid,
        nonlinearity=nonlin,
        data=data,
        horizon=cfg.get_float("problem.horizon", 1.0),
        dt=cfg.get_float("problem.dt", 1e-3),
        sample_stride=cfg.get_int("problem.sample_stride", 10),
        cutoff=cutoff,
    )
    report = nonrel_limit_run(sweep)
    report.metadata["seed"] = seed
    _write(report, outdir, "limit-nonrel", svg)
    if cfg.get_bool("assertions.enabled", True):
        if nonlin is None:
            slope = report.fitted_slope("transfer_residual")
            checks.check(
                "nonrel.linear-rate", -1.2 <= slope <= -0.8, f"slope {slope:.3f} outside [-1.2, -0.8]"
            )
        else:
            _, gaps = report.series("corrected_gap_sup")
            mono = all(b < a for a, b in zip(gaps, gaps[1:]))
            checks.check("nonrel.monotone", mono, f"values {gaps}")
            checks.check(
                "nonrel.quarter", gaps[-1] <= 0.25 * gaps[0], f"final/initial {gaps[-1]/gaps[0]:.3f}"
            )
    return checks


def cmd_verify_estimates(cfg, outdir, seed, svg):
    checks = Checks()
    n = cfg.get_int("estimates.n", 64)
    box = cfg.get_float("estimates.box_length", 4 * math.pi)
    grid = Grid(dim=cfg.get_int("grid.dim", 2), n=n, box_length=box)
    draws = cfg.get_int("estimates.draws", 64)
    time_samples = cfg.get_int("estimates.time_samples", 257)

    lams = cfg.get_float_list("estimates.lams", [1.0, 2.0, 4.0, 8.0, 16.0])
    stri = strichartz_sweep(
        grid, m=cfg.get_float("estimates.mass", 0.0), q=6.0, r=6.0, lams=lams,
        draws=draws, time_samples=time_samples, seed=seed,
    )
    _write(stri, outdir, "strichartz", svg)
    _, values = stri.series("ratio_max")
    band = max(values) / min(values)
    checks.check("estimates.strichartz-band", band <= 8.0, f"band {band:.2f} > 8")

    bili = bilinear_l2_sweep(
        grid, m=0.0, lam=16.0, mus=[1.0, 2.0, 4.0], alphas=[1.0, 0.5, 0.25],
        draws=draws, time_samples=time_samples, seed=seed + 1,
    )
    _write(bili, outdir, "bilinear-l2", svg)
    bvalues = [v for _, _, v in bili.rows]
    bband = max(bvalues) / min(bvalues)
    checks.check("estimates.bilinear-band", bband <= 16.0, f"band {bband:.2f} > 16")

    gain = null_gain_sweep(
        grid, lam=4.0, mu=4.0, alphas=[1.0, 0.5, 0.25], draws=max(8, draws // 4),
        time_samples=time_samples, seed=seed + 2,
    )
    _write(gain, outdir, "bilinear-null-gain", svg)
    _, over = gain.series("gain_over_alpha")
    ok = all(0.5 <= v <= 2.0 for v in over)
    checks.check("estimates.null-gain", ok, f"gain/alpha {over}")

    f = random_field(grid, seed=seed + 3)
    g = random_field(grid, seed=seed + 4)
    wres = whitney_reconstruct(f, g, lam=8.0, mu=4.0, m=0.0, max_level=5)
    wres_mass = whitney_reconstruct(f, g, lam=8.0, mu=4.0, m=1.0, max_level=5)
    wrep = ExperimentReport(name="whitney", metadata={"lam": 8.0, "mu": 4.0})
    wrep.add(0.0, "residual", wres.residual)
    wrep.add(1.0, "residual", wres_mass.residual)
    for level, count in sorted(wres.cover.items()):
        wrep.add(0.0, f"cover_pairs[level={level}]", count)
    _write(wrep, outdir, "whitney", svg)
    worst = max(wres.residual, wres_mass.residual)
    checks.check("estimates.whitney", worst <= 1e-12, f"residual {worst:.2e}")
    trivial = whitney_pairs(grid.dim, 100.0, 1.0, 1.0, max_level=5)
    checks.check("estimates.whitney-trivial-cover", list(trivial) == [1])

    mod = max(
        modulation_identity_check(10000, 2, seed=seed + 5),
        modulation_identity_check(10000, 3, seed=seed + 6),
    )
    checks.check("estimates.modulation-identity", mod <= 1e-10, f"residual {mod:.2e}")

    rng = np.random.default_rng(seed + 7)
    ok = True
    for _ in range(10):
        nsamp = int(rng.integers(2, 13))
        vals = rng.standard_normal((nsamp, 2))
        p = float(rng.uniform(1.0, 3.0))
        path = PVarPath(times=np.arange(float(nsamp)), values=vals)
        dp = vp_variation(path, p)
        brute = _brute_force_vp(vals, p)
        if abs(dp - brute) > 1e-12 * max(brute, 1.0):
            ok = False
    checks.check("estimates.vp-dp-bruteforce", ok)
    return checks


def _brute_force_vp(values, p):
    vals = np.asarray(values, dtype=complex).reshape(len(values), -1)
    n = len(vals)
    best = 0.0
    for size in range(2, n + 1):
        for combo in itertools.combinations(range(n), size):
            total = sum(
                np.linalg.norm(vals[combo[k + 1]] - vals[combo[k]]) ** p for k in range(size - 1)
            )
            best = max(best, total)
    return best ** (1.0 / p) if n >= 2 else 0.0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="diraclab", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="flat 'section.key = value' config file")
    parser.add_argument("--out", default="diraclab-out", help="output directory for reports")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides run.seed)")
    parser.add_argument("--threads", type=int, default=None,
                        help="accepted for interface compatibility; runs are sequential")
    args = parser.parse_args(argv)
    try:
        values = parse_config_file(args.config) if args.config else {}
        cfg = RunConfig(values, from_file=args.config is not None)
        seed = args.seed if args.seed is not None else cfg.get_int("run.seed", 0)
        svg = cfg.get_bool("output.svg", False)
        os.makedirs(args.out, exist_ok=True)
        handler = {
            "verify-algebra": cmd_verify_algebra,
            "simulate": cmd_simulate,
            "limit-massless": cmd_limit_massless,
            "limit-nonrel": cmd_limit_nonrel,
            "verify-estimates": cmd_verify_estimates,
        }[args.command]
        checks = handler(cfg, args.out, seed, svg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SolverAbort as err:
        print(f"solver abort: {err}", file=sys.stderr)
        return 3
    if checks.failures:
        print(f"FAILED checks: {', '.join(checks.failures)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
