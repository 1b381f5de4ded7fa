"""Numerical verification of the frequency-localized estimate layer:
Strichartz constant sweeps, transverse bilinear L^2 scaling, the angular
Whitney reconstruction, exact p-variation norms, and the modulation identity.

Continuum suprema are replaced by Monte-Carlo maxima over random frequency
data (plus deterministic single-mode and flat-spectrum candidates), and
global time integrals by the trapezoid rule over [0, T_box].  The measured
quantities are ratios against the claimed constants; bands, not constants,
are the testable content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import build_gamma
from .caps import CapFamily, MetricCap, angle_metric, whitney_pairs
from .fields import FREQUENCY, SpinorField, to_physical
from .multipliers import (
    PropagatorSpec,
    apply_matrix_symbol,
    box_horizon,
    gamma_rep,
    littlewood_paley,
    mass_bracket,
    projection_symbol,
    shell_mask,
    spinor_cap_project,
)
from .reporting import ExperimentReport

# ---------------------------------------------------------------------------
# p-variation


@dataclass(frozen=True)
class PVarPath:
    """Sampled path t_1 < ... < t_N with values in a finite inner-product space."""

    times: np.ndarray
    values: np.ndarray  # shape (N, ...) flattened internally

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) != len(self.values):
            raise ValueError("times and values must have matching length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")


def vp_variation(path, p):
    """Exact |v|_{V^p}: sup over subsequences of (sum of increment norms^p)^(1/p).

    Dynamic programming over the increment DAG; exact because the supremum
    over continuum partitions of a sampled path is attained on sample points.
    """
    if p < 1:
        raise ValueError("p-variation requires p >= 1")
    vals = np.asarray(path.values, dtype=complex).reshape(len(path.times), -1)
    n = len(vals)
    if n < 2:
        return 0.0
    diffs = vals[:, None, :] - vals[None, :, :]
    dist = np.linalg.norm(diffs, axis=-1)  # dist[i, j] = ||v_i - v_j||
    best = np.zeros(n)
    for j in range(1, n):
        best[j] = np.max(best[:j] + dist[:j, j] ** p)
    return float(np.max(best) ** (1.0 / p))


def vp_norm(path, p):
    """||v||_{V^p} = sup_t ||v(t)|| + |v|_{V^p} (L^inf term over samples)."""
    vals = np.asarray(path.values, dtype=complex).reshape(len(path.times), -1)
    sup = float(np.max(np.linalg.norm(vals, axis=-1)))
    return sup + vp_variation(path, p)


# ---------------------------------------------------------------------------
# modulation identity (the pointwise three-term expansion of
# | |s1 <xi>_m - s2 <eta>_m|^2 - <xi - eta>_m^2 | )


def modulation_identity_residual(xi, eta, m, s1, s2):
    """Relative gap between the two sides, scaled by the squared bracket size."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    nx, ne = np.linalg.norm(xi), np.linalg.norm(eta)
    bx, be = mass_bracket(nx, m), mass_bracket(ne, m)
    lhs = abs((s1 * bx - s2 * be) ** 2 - mass_bracket(np.linalg.norm(xi - eta), m) ** 2)
    ss = s1 * s2
    rhs = (
        2.0 * m * m * (nx - ne) ** 2 / (bx * be + m * m + nx * ne)
        + (2.0 - ss) * m * m
        + 2.0 * (nx * ne - ss * float(np.dot(xi, eta)))
    )
    return abs(lhs - rhs) / max((bx + be) ** 2, 1e-300)


def modulation_identity_check(count, dim, seed=0):
    """Max relative residual of the identity over random (xi, eta, m, signs)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        xi = rng.standard_normal(dim) * rng.choice([0.1, 1.0, 10.0])
        eta = rng.standard_normal(dim) * rng.choice([0.1, 1.0, 10.0])
        m = float(rng.choice([0.0, abs(rng.standard_normal()), 10 * abs(rng.standard_normal())]))
        s1, s2 = int(rng.choice([-1, 1])), int(rng.choice([-1, 1]))
        worst = max(worst, modulation_identity_residual(xi, eta, m, s1, s2))
    return worst


# ---------------------------------------------------------------------------
# Whitney reconstruction


@dataclass
class WhitneyResult:
    residual: float
    cover: dict  # level -> number of cap pairs used


def whitney_reconstruct(f, g, lam, mu, m, max_level=5):
    """Residual of the angular Whitney decomposition of (f_lam)^dagger g_mu.

    Both fields are localized to their dyadic shells; the right-hand side sums
    (P_{lam,kappa} f)^dagger (P_{mu,kappa'} g) over the dyadic Whitney pair
    sets.  With sharp nested cap partitions the residual is zero to rounding.
    """
    if f.repr != FREQUENCY or g.repr != FREQUENCY:
        raise ValueError("whitney_reconstruct expects frequency-representation fields")
    grid = f.grid
    f_l = littlewood_paley(f, lam)
    g_m = littlewood_paley(g, mu)
    lhs = np.sum(np.conj(to_physical(f_l).data) * to_physical(g_m).data, axis=0)
    pairs = whitney_pairs(grid.dim, m, lam, mu, max_level=max_level)
    rhs = np.zeros_like(lhs)
    cover = {}
    for level, plist in pairs.items():
        fam = CapFamily(grid.dim, level)
        cover[level] = len(plist)
        cache_f, cache_g = {}, {}
        for (k1, k2) in plist:
            if k1 not in cache_f:
                cache_f[k1] = to_physical(spinor_cap_project(f, lam, m, fam, k1)).data
            if k2 not in cache_g:
                cache_g[k2] = to_physical(spinor_cap_project(g, mu, m, fam, k2)).data
            rhs += np.sum(np.conj(cache_f[k1]) * cache_g[k2], axis=0)
    scale = float(np.sqrt(np.sum(np.abs(lhs) ** 2)))
    residual = float(np.sqrt(np.sum(np.abs(rhs - lhs) ** 2))) / max(scale, 1e-300)
    return WhitneyResult(residual=residual, cover=cover)


# ---------------------------------------------------------------------------
# free-wave ensembles and mixed-norm machinery


@dataclass
class FreeWaveEnsemble:
    """Random unit-normalized Fourier data on a dyadic shell, optionally
    restricted to a cap and/or projected on a Pi branch."""

    grid: object
    lam: float
    m: float
    count: int
    seed: int = 0
    cap: object = None  # MetricCap
    cap_sign: int = +1
    spinor: bool = False
    projection_sign: int = +1

    def support_mask(self):
        mask = shell_mask(self.grid, self.lam)
        if self.cap is not None:
            grids = np.meshgrid(*([self.grid.freq_axis()] * self.grid.dim), indexing="ij")
            vecs = np.stack(grids, axis=-1)
            norms = np.linalg.norm(vecs, axis=-1)
            dirs = np.zeros_like(vecs)
            nz = norms > 0
            dirs[nz] = self.cap_sign * vecs[nz] / norms[nz][..., None]
            mask &= self.cap.contains(dirs) & nz
        return mask

    def draws(self):
        """Yield unit-l2 frequency data arrays; the first two draws are the
        deterministic candidates (single mode, flat spectrum)."""
        mask = self.support_mask()
        idx = np.argwhere(mask)
        if len(idx) == 0:
            return
        nd = self.grid.spinor_dim if self.spinor else 1
        proj = (
            projection_symbol(self.grid, self.m, self.projection_sign) if self.spinor else None
        )

        def finish(raw):
            if self.spinor and proj is not None:
                raw = np.einsum("ab...,b...->a...", proj, raw)
                raw *= mask
            norm = np.sqrt(np.sum(np.abs(raw) ** 2))
            return raw / norm if norm > 0 else None

        single = np.zeros((nd,) + self.grid.shape, dtype=complex)
        single[(0,) + tuple(idx[0])] = 1.0
        out = finish(single)
        if out is not None:
            yield out
        flat = np.zeros((nd,) + self.grid.shape, dtype=complex)
        flat[0][mask] = 1.0
        out = finish(flat)
        if out is not None:
            yield out
        for j in range(self.count):
            rng = np.random.default_rng([self.seed, int(self.lam * 1024), j])
            raw = np.zeros((nd,) + self.grid.shape, dtype=complex)
            coeffs = rng.standard_normal((nd, len(idx))) + 1j * rng.standard_normal((nd, len(idx)))
            for comp in range(nd):
                raw[comp][tuple(idx.T)] = coeffs[comp]
            out = finish(raw)
            if out is not None:
                yield out


def _free_wave_batch(grid, data_hat, m, sign, times):
    """exp(sign * i t <grad>_m) applied to scalar data, batched over times.

    Returns the physical-space array of shape (nt,) + grid.shape."""
    bracket = mass_bracket(grid.freq_norm(), m)
    t_shape = (len(times),) + (1,) * grid.dim
    phases = np.exp(1j * sign * times.reshape(t_shape) * bracket[None])
    hat = phases * data_hat[None]
    return np.fft.ifftn(hat, axes=tuple(range(1, grid.dim + 1)), norm="ortho")


def _lq_lr_norm(u_phys, grid, q, r, times):
    """L^q_t L^r_x norm on [0, T] by trapezoid in t, volume-weighted in x."""
    dv = grid.spacing**grid.dim
    axes = tuple(range(1, grid.dim + 1))
    lr = (np.sum(np.abs(u_phys) ** r, axis=axes) * dv) ** (1.0 / r)
    if math.isinf(q):
        return float(np.max(lr))
    return float(np.trapezoid(lr**q, times) ** (1.0 / q))


def _l2_field(data_hat, grid):
    return float(np.sqrt(np.sum(np.abs(data_hat) ** 2) * grid.spacing**grid.dim))


# ---------------------------------------------------------------------------
# Strichartz sweeps


def wave_admissible(dim, q, r):
    if not (2 <= q) or not (2 <= r < math.inf):
        return False
    lhs = (0.0 if math.isinf(q) else 1.0 / q) + (dim - 1) / (2.0 * r)
    return abs(lhs - (dim - 1) / 4.0) <= 1e-9


def schrodinger_admissible(dim, q, p):
    if not (2 <= q) or not (2 <= p < math.inf):
        return False
    lhs = (0.0 if math.isinf(q) else 1.0 / q) + dim / (2.0 * p)
    return abs(lhs - dim / 4.0) <= 1e-9


def strichartz_sweep(grid, m, q, r, lams, kind="wave", draws=64, time_samples=257, horizon=None, seed=0):
    """Monte-Carlo ratio sweep for the frequency-localized Strichartz bound.

    kind='wave': denominator lam^sigma <lam>_m^(s-sigma) with the wave
    admissible exponents; kind='schrodinger' (m != 0): |m|^(-2/(dq)) <lam>_m^s'.
    The homogeneous-weight ratio (denominator lam^s) is recorded alongside for
    the low-frequency comparison.
    """
    d = grid.dim
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    if kind == "wave":
        if not wave_admissible(d, q, r):
            raise ValueError(f"(q={q}, r={r}) is not wave admissible in d={d}")
        s = (d + 1) / (d - 1) * inv_q
        sigma = 2.0 / (d - 1) * inv_q
    elif kind == "schrodinger":
        if m == 0:
            raise ValueError("schrodinger-admissible sweep requires m != 0")
        if not schrodinger_admissible(d, q, r):
            raise ValueError(f"(q={q}, p={r}) is not schrodinger admissible in d={d}")
        s = (d + 2) / d * inv_q
        sigma = 0.0
    else:
        raise ValueError("kind must be 'wave' or 'schrodinger'")
    if horizon is None:
        horizon = box_horizon(PropagatorSpec.dirac_mass(m), grid)
    times = np.linspace(0.0, horizon, time_samples)
    report = ExperimentReport(
        name="strichartz-sweep",
        metadata={
            "kind": kind, "q": q, "r": r, "m": m, "s": s, "sigma": sigma,
            "horizon": horizon, "draws": draws, "grid.n": grid.n,
            "grid.box_length": grid.box_length, "grid.dim": d,
        },
    )
    for lam in lams:
        if kind == "wave":
            denom_weight = lam**sigma * mass_bracket(lam, m) ** (s - sigma)
        else:
            denom_weight = abs(m) ** (-2.0 / (d * q)) * mass_bracket(lam, m) ** s
        homog_weight = lam**s
        ensemble = FreeWaveEnsemble(grid=grid, lam=lam, m=m, count=draws, seed=seed)
        best = 0.0
        n_draws = 0
        for data in ensemble.draws():
            u = _free_wave_batch(grid, data[0], m, +1, times)
            num = _lq_lr_norm(u, grid, q, r, times)
            best = max(best, num / (_l2_field(data[0], grid) * denom_weight))
            n_draws += 1
        if n_draws == 0:
            report.warnings.append(f"lam={lam}: empty shell on this lattice, skipped")
            continue
        report.add(lam, "ratio_max", best)
        # comparison weights: homogeneous lam^s and inhomogeneous <lam>_m^s
        report.add(lam, "ratio_homog_max", best * denom_weight / homog_weight)
        report.add(lam, "ratio_sigma0_max", best * denom_weight / mass_bracket(lam, m) ** s)
    params, values = report.series("ratio_max")
    if values:
        report.metadata["band.ratio_max"] = max(values) / min(values)
    return report


# ---------------------------------------------------------------------------
# bilinear L^2 sweeps


def _transversality_ok(lam, mu, alpha, m, threshold=8.0):
    if m == 0:
        return True
    return lam / mu + alpha * mass_bracket(mu, m) / abs(m) >= threshold


def _make_cap_pair(dim, alpha, mu, m):
    """Two caps of scale alpha whose centers realize the Whitney-type angle
    relation angle(k1, k2) + |m|/<mu>_m ~ alpha.  Returns None if the mass
    floor makes the relation unattainable."""
    m_term = 0.0 if m == 0 else abs(m) / mass_bracket(mu, m)
    target = alpha - m_term
    if target < 0 or m_term > 2 * alpha:
        return None
    c1 = np.array([1.0] + [0.0] * (dim - 1))
    phi = math.acos(max(-1.0, 1.0 - target * target))
    c2 = np.array([math.cos(phi), math.sin(phi)] + [0.0] * (dim - 2))
    radius = alpha / 4.0
    return MetricCap(c1, radius), MetricCap(c2, radius)


def bilinear_l2_sweep(
    grid, m, lam, mus, alphas, sign=+1, draws=64, time_samples=257, horizon=None, seed=0,
    null_projected=False,
):
    """Ratio of || conj(u) v ||_{L^2_{t,x}} for cap-transverse free waves to
    the transverse bilinear constant alpha^{-1/2} mu^{1/2} (alpha mu)^{(d-2)/2}
    (<lam>_m/lam)^{1/2} (full-grid frequency window R).

    With null_projected=True the data are Pi_+ projected spinors and the
    product is the Lorentz sandwich u^dagger gamma^0 v, which gains an extra
    factor ~ alpha over the plain product.  Combinations that violate the
    transversality threshold or have empty lattice support are skipped with an
    annotation.
    """
    d = grid.dim
    if horizon is None:
        horizon = box_horizon(PropagatorSpec.dirac_mass(m), grid)
    times = np.linspace(0.0, horizon, time_samples)
    rep_mat = gamma_rep(d).gamma0
    report = ExperimentReport(
        name="bilinear-l2-sweep" + ("-null" if null_projected else ""),
        metadata={
            "m": m, "lam": lam, "sign": sign, "horizon": horizon, "draws": draws,
            "grid.n": grid.n, "grid.box_length": grid.box_length, "grid.dim": d,
            "null_projected": str(null_projected),
        },
    )
    dv = grid.spacing**d
    for mu in mus:
        for alpha in alphas:
            tag = f"mu={mu:g},alpha={alpha:g}"
            if not _transversality_ok(lam, mu, alpha, m):
                report.warnings.append(f"{tag}: transversality threshold violated, skipped")
                continue
            pair = _make_cap_pair(d, alpha, mu, m)
            if pair is None:
                report.warnings.append(f"{tag}: angle relation unattainable at this mass, skipped")
                continue
            cap1, cap2 = pair
            ens_f = FreeWaveEnsemble(
                grid=grid, lam=lam, m=m, count=draws, seed=seed, cap=cap1,
                spinor=null_projected,
            )
            ens_g = FreeWaveEnsemble(
                grid=grid, lam=mu, m=m, count=draws, seed=seed + 1, cap=cap2, cap_sign=sign,
                spinor=null_projected,
            )
            fs = list(ens_f.draws())
            gs = list(ens_g.draws())
            if not fs or not gs:
                report.warnings.append(f"{tag}: empty lattice support, skipped")
                continue
            denom_weight = (
                alpha**-0.5
                * mu**0.5
                * (alpha * mu) ** ((d - 2) / 2.0)
                * (mass_bracket(lam, m) / lam) ** 0.5
            )
            best = 0.0
            for f_hat, g_hat in zip(fs, gs):
                if null_projected:
                    u = np.stack([_free_wave_batch(grid, comp, m, +1, times) for comp in f_hat])
                    v = np.stack([_free_wave_batch(grid, comp, m, sign, times) for comp in g_hat])
                    prod = np.einsum("at...,ab,bt...->t...", np.conj(u), rep_mat, v)
                else:
                    u = _free_wave_batch(grid, f_hat[0], m, +1, times)
                    v = _free_wave_batch(grid, g_hat[0], m, sign, times)
                    prod = np.conj(u) * v
                sq = np.sum(np.abs(prod) ** 2, axis=tuple(range(1, d + 1))) * dv
                num = float(np.sqrt(np.trapezoid(sq, times)))
                l2f = float(np.sqrt(np.sum(np.abs(f_hat) ** 2) * dv))
                l2g = float(np.sqrt(np.sum(np.abs(g_hat) ** 2) * dv))
                best = max(best, num / (denom_weight * l2f * l2g))
            report.add(mu, f"ratio_max[alpha={alpha:g}]", best)
    values = [v for _, _, v in report.rows]
    if values:
        report.metadata["band.ratio_max"] = max(values) / min(values)
    return report


def null_gain_sweep(grid, lam, mu, alphas, draws=64, time_samples=257, horizon=None, seed=0):
    """Paired sweep: the ratio (null-projected)/(plain) at each alpha, which
    tracks the angular gain of the projection sandwich."""
    report = ExperimentReport(
        name="bilinear-null-gain",
        metadata={"lam": lam, "mu": mu, "grid.n": grid.n, "grid.dim": grid.dim},
    )
    for alpha in alphas:
        plain = bilinear_l2_sweep(
            grid, 0.0, lam, [mu], [alpha], draws=draws, time_samples=time_samples,
            horizon=horizon, seed=seed, null_projected=False,
        )
        null = bilinear_l2_sweep(
            grid, 0.0, lam, [mu], [alpha], draws=draws, time_samples=time_samples,
            horizon=horizon, seed=seed, null_projected=True,
        )
        _, pv = plain.series(f"ratio_max[alpha={alpha:g}]")
        _, nv = null.series(f"ratio_max[alpha={alpha:g}]")
        if not pv or not nv:
            report.warnings.append(f"alpha={alpha:g}: skipped combination")
            continue
        report.add(alpha, "gain_factor", nv[0] / pv[0])
        report.add(alpha, "gain_over_alpha", nv[0] / pv[0] / alpha)
    return report
