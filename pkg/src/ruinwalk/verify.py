"""Three-layer agreement suite: closed forms vs exact solver vs Monte Carlo.

Each check returns a named pass/fail record so the CLI can print one line
per identity and name the first failure.  The default grids match the
acceptance criteria; ``quick=True`` skips the Monte Carlo layer.

The errata checks are deliberately two-sided: the implemented form must
match the oracle *and* the rejected variant must miss it by a clear margin,
so a silent regression to the wrong algebra cannot pass.  ``inject_wrong_mb``
flips the strategy-B mean-time check to the rejected variant; it exists as a
negative control for the suite itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import charpoly as cp
from . import metrics, mgf, oracle
from .core import Strategy, WalkParams

GRID_P = (0.3, 0.45, 0.5, 0.55, 0.7)
GRID_S = (0.1, 0.5, 0.9)
GRID_I0 = (1, 2, 3, 5)

MC_GRID = (
    (0.5, 0.5, 1, Strategy.B),
    (0.5, 0.5, 1, Strategy.C),
    (0.3, 0.1, 2, Strategy.A),
    (0.7, 0.1, 1, Strategy.B),
    (0.45, 0.9, 3, Strategy.C),
    (0.55, 0.5, 5, Strategy.A),
    (0.5, 0.1, 2, Strategy.B),
    (0.3, 0.9, 1, Strategy.C),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, worst: float, tol: float, extra: str = "") -> CheckResult:
    detail = f"worst={worst:.3e} tol={tol:.0e}"
    if extra:
        detail += f" {extra}"
    return CheckResult(name=name, passed=worst <= tol, detail=detail)


def _interior_grid():
    for p in GRID_P:
        for s in GRID_S:
            for i0 in GRID_I0:
                yield WalkParams(p, s, i0)


# ---------------------------------------------------------------------------
# identity checks (closed forms against their own defining relations)


def check_step_roots(n_samples: int = 1000, seed: int = 20240914) -> CheckResult:
    rng_ = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        z = float(rng_.uniform(1e-3, 1.0))
        p = float(rng_.uniform(1e-3, 1.0 - 1e-3))
        params = WalkParams(p, 0.5, 1)
        roots = cp.tau_roots(z, params)
        for tau in (roots.tau1, roots.tau2):
            # backward-error form: the raw residual scales with tau as z -> 0
            residual = abs(params.q * z * tau * tau - tau + p * z)
            worst = max(worst, residual / max(1.0, tau))
        worst = max(worst, abs(roots.tau1 * roots.tau2 - params.omega) / params.omega)
        vieta_sum = 1.0 / (params.q * z)
        worst = max(worst, abs(roots.tau1 + roots.tau2 - vieta_sum) / vieta_sum)
    return _result("step-root residuals and Vieta identities", worst, 1e-12)


def check_barrier_roots() -> CheckResult:
    worst = 0.0
    ordered = True
    for params in _interior_grid():
        for z in (0.2, 0.5, 0.8, 1.0):
            phi = cp.phi_roots(cp.theta(z, params))
            if not phi.phi1 > 1.0 > phi.phi2 > 0.0:
                ordered = False
            worst = max(
                worst,
                abs(phi.phi1 * phi.phi2 - params.omega_pow) / params.omega_pow,
            )
    res = _result("barrier-root ordering and product identity", worst, 1e-12)
    if not ordered:
        return CheckResult(res.name, False, res.detail + " (ordering violated)")
    return res


def check_theta_symmetric_limit(eps: float = 1e-5) -> CheckResult:
    worst = 0.0
    for s in GRID_S:
        for i0 in GRID_I0:
            limit = 2.0 * (i0 / (1.0 - s) + 1.0 - i0)
            scale = max(1.0, abs(limit))
            for p in (0.5 - eps, 0.5 + eps):
                got = cp.theta(1.0, WalkParams(p, s, i0)).theta
                worst = max(worst, abs(got - limit) / scale)
    return _result("theta approaches its driftless limit", worst, 1e-3)


def check_b_from_a_relation() -> CheckResult:
    worst = 0.0
    for params in _interior_grid():
        for z in (0.3, 0.7, 1.0):
            for k in range(0, 5):
                ua = mgf.mgf_a(params, z, k)
                vb = mgf.mgf_b(params, z, k)
                delta = 1.0 if k == 1 else 0.0
                lhs = ua
                rhs = delta + (1.0 - params.s) * vb
                worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    return _result("A/B generating-function relation", worst, 1e-12)


def check_barrier_recurrence() -> CheckResult:
    worst = 0.0
    for params in _interior_grid():
        for z in (0.4, 0.9, 1.0):
            char = cp.theta(z, params)
            vals = {k: mgf.mgf_a(params, z, k) for k in range(1, 8)}
            scale = max(vals[1], 1e-300)
            for k in range(2, 7):
                res = (
                    vals[k + 1]
                    - char.theta * vals[k]
                    + params.omega_pow * vals[k - 1]
                )
                worst = max(worst, abs(res) / scale)
    return _result("three-term barrier recurrence", worst, 1e-10)


def check_c_seed_relations() -> CheckResult:
    worst = 0.0
    for params in _interior_grid():
        for z in (0.4, 0.9, 1.0):
            roots = cp.tau_roots(z, params)
            phi = cp.phi_roots(cp.theta(z, params))
            w1 = mgf.mgf_c(params, z, 1)
            w2 = mgf.mgf_c(params, z, 2)
            i0 = params.i0
            s_i0 = roots.tau1 ** i0 + roots.tau2 ** i0
            d_i0 = cp.power_divided_difference(roots, i0)
            seed = params.q * z * (s_i0 * w1 - (1.0 - params.s) * w2) - d_i0
            worst = max(worst, abs(seed) / max(d_i0, 1e-300))
            link = params.omega_pow * w1 - (1.0 - params.s) * phi.phi1 * w2
            worst = max(worst, abs(link) / max(params.omega_pow * w1, 1e-300))
    return _result("strategy-C seed and barrier-link relations", worst, 1e-10)


def check_mgf_monotonicity() -> CheckResult:
    zs = [0.1 * j for j in range(1, 11)]
    worst = 0.0
    for params in _interior_grid():
        positions = [0, params.i0, 2 * params.i0]
        if params.i0 >= 2:
            positions.append(params.i0 + 1)
        for strategy in Strategy:
            for pos in positions:
                prev = -math.inf
                for z in zs:
                    val = mgf.mgf_value(params, strategy, z, pos)
                    worst = max(worst, prev - val)
                    prev = val
    return _result("generating functions nondecreasing in z", worst, 1e-12)


def check_barrier_geometry() -> CheckResult:
    worst = 0.0
    for params in _interior_grid():
        for z in (0.5, 1.0):
            phi2 = cp.phi_roots(cp.theta(z, params)).phi2
            for k in (1, 2, 3):
                ua, ua1 = mgf.mgf_a(params, z, k), mgf.mgf_a(params, z, k + 1)
                worst = max(worst, abs(ua1 / ua - phi2) / phi2)
            for k in (2, 3):
                wc, wc1 = mgf.mgf_c(params, z, k), mgf.mgf_c(params, z, k + 1)
                worst = max(worst, abs(wc1 / wc - phi2) / phi2)
    return _result("geometric decay of barrier values", worst, 1e-12)


def check_mass_conservation() -> CheckResult:
    worst = 0.0
    for params in _interior_grid():
        for strategy in Strategy:
            prof = metrics.absorption_profile(params, strategy, kmax=256)
            # the counted mass may sit below 1 by at most the tail bound
            over = prof.total - 1.0
            under = (1.0 - prof.total) - prof.tail_bound
            worst = max(worst, over, under)
    return _result("absorption mass sums to one", max(worst, 0.0), 1e-9)


def check_a_b_time_scaling() -> CheckResult:
    worst = 0.0
    for params in _interior_grid():
        ma = metrics.mean_time_any(params, Strategy.A)
        mb = metrics.mean_time_any(params, Strategy.B)
        worst = max(worst, abs(ma - (1.0 - params.s) * mb) / max(ma, 1e-300))
    return _result("A's mean time is (1-s) of B's", worst, 1e-12)


def check_bc_ratio() -> CheckResult:
    worst = 0.0
    below_one = True
    for params in _interior_grid():
        ratio = metrics.bc_ratio(params)
        if not ratio < 1.0:
            below_one = False
        pb = metrics.absorption_profile(params, Strategy.B, kmax=8)
        pc = metrics.absorption_profile(params, Strategy.C, kmax=8)
        worst = max(worst, abs(ratio - pb.p0 / pc.p0))
        for k in (2, 3, 5):
            worst = max(
                worst, abs(ratio - pb.probability(k) / pc.probability(k))
            )
    res = _result("B/C absorption ratio constant and below one", worst, 1e-10)
    if not below_one:
        return CheckResult(res.name, False, res.detail + " (ratio >= 1)")
    return res


def check_time_decomposition() -> CheckResult:
    worst = 0.0
    for params in _interior_grid():
        if params.symmetric:
            continue
        phi2 = cp.phi_roots(cp.theta(1.0, params)).phi2
        kmax = max(64, int(math.log(1e-12) / math.log(phi2)) + 8)
        for strategy in Strategy:
            tp = metrics.time_profile(params, strategy, kmax=kmax)
            gap = abs(sum(tp.et.values()) - tp.m_total)
            worst = max(worst, max(gap - tp.tail_bound, 0.0))
    return _result("killed times sum to the total mean", worst, 1e-8)


def check_derivatives_fd() -> CheckResult:
    def one_sided(f, h=1e-4):
        def diff(hh):
            return (f(1.0) - f(1.0 - hh)) / hh

        d1, d2, d3 = diff(h), diff(h / 2), diff(h / 4)
        e1, e2 = 2 * d2 - d1, 2 * d3 - d2
        return (4 * e2 - e1) / 3

    worst = 0.0
    for params in _interior_grid():
        if params.symmetric:
            continue
        der = cp.derivatives_at_1(params)
        fd_theta = one_sided(lambda z: cp.theta(z, params).theta)
        worst = max(worst, abs(der.dtheta - fd_theta) / max(abs(fd_theta), 1e-300))
        fd_phi2 = one_sided(lambda z: cp.phi_roots(cp.theta(z, params)).phi2)
        worst = max(worst, abs(der.dphi2 - fd_phi2) / max(abs(fd_phi2), 1e-300))
    return _result("derivatives match finite differences", worst, 1e-6)


# ---------------------------------------------------------------------------
# oracle agreement


def check_exact_agreement(tol_prob: float = 1e-9, tol_time: float = 1e-7) -> list[CheckResult]:
    worst_p = 0.0
    worst_t = 0.0
    for params in _interior_grid():
        for strategy in Strategy:
            sol = oracle.solve_exact(params, strategy, tol=1e-11)
            prof = metrics.absorption_profile(params, strategy, kmax=64)
            worst_p = max(worst_p, abs(prof.p0 - sol.p0))
            for k in range(1, 65):
                worst_p = max(
                    worst_p, abs(prof.probability(k) - sol.pk.get(k, 0.0))
                )
            m = metrics.mean_time_any(params, strategy)
            worst_t = max(
                worst_t, abs(m - sol.m_total) / max(abs(sol.m_total), 1e-300)
            )
            if not params.symmetric:
                tp = metrics.time_profile(params, strategy, kmax=64)
                for k in range(0, 65):
                    ref = sol.et.get(k, 0.0)
                    gap = abs(tp.killed_time(k) - ref)
                    worst_t = max(worst_t, gap / max(abs(ref), 1e-9))
    return [
        _result("absorption profiles match the exact solver", worst_p, tol_prob),
        _result("mean times match the exact solver", worst_t, tol_time),
    ]


# ---------------------------------------------------------------------------
# errata regressions


def check_errata(inject_wrong_mb: bool = False) -> list[CheckResult]:
    results = []

    # 1. theta coupling: the 1/(1-s) scaling on the tau-power gap is required.
    params = WalkParams(0.4, 0.5, 2)
    roots = cp.tau_roots(1.0, params)
    d_i0 = cp.power_divided_difference(roots, params.i0)
    d_prev = cp.power_divided_difference(roots, params.i0 - 1)
    rejected = (d_i0 - 2.0 * params.p * d_prev) / params.q
    implemented = cp.theta(1.0, params).theta
    sol = oracle.solve_exact(params, Strategy.B, tol=1e-11)
    prof = metrics.absorption_profile(params, Strategy.B, kmax=64)
    ok = (
        abs(prof.p0 - sol.p0) < 1e-9
        and abs(implemented - rejected) > 1e-3
        and _phi_is_consistent(implemented, params)
        and not _phi_is_consistent_or_matches(rejected, params, sol.p0)
    )
    results.append(
        CheckResult(
            "theta coupling (stop-scaled numerator)",
            ok,
            f"implemented={implemented:.6f} rejected={rejected:.6f}",
        )
    )

    # 2. strategy-B mean time carries a 1/s, not the bare barrier factor.
    params = WalkParams(0.5, 0.5, 1)
    sol = oracle.solve_exact(params, Strategy.B, tol=1e-11)
    phi = cp.phi_roots(cp.theta(1.0, params))
    rejected_mb = params.i0 * (1.0 - 1.0 / phi.phi1)
    implemented_mb = metrics.mean_time_any(params, Strategy.B)
    candidate = rejected_mb if inject_wrong_mb else implemented_mb
    ok = (
        abs(candidate - sol.m_total) < 1e-9
        and abs(rejected_mb - sol.m_total) > 1e-2
    )
    results.append(
        CheckResult(
            "m_B relation (mean time of the delayed strategy)",
            ok,
            f"checked={candidate:.9f} oracle={sol.m_total:.9f} rejected={rejected_mb:.9f}",
        )
    )

    # 3. ruin-time prefactor at s=0: the killed time is omega**-i0 times
    #    the z-derivative of phi2, not that derivative alone.
    params = WalkParams(0.4, 0.0, 2)
    sol = oracle.solve_exact(params, Strategy.B, tol=1e-11)
    der = cp.derivatives_at_1(params)
    implemented_et0 = metrics.mean_time_at(params, Strategy.B, 0)
    rejected_et0 = der.dphi2  # bare derivative, missing the omega**-i0 factor
    ok = (
        abs(implemented_et0 - sol.et[0]) < 1e-7 * sol.et[0]
        and abs(implemented_et0 - der.dphi2 / params.omega_pow) < 1e-9
        and abs(rejected_et0 - sol.et[0]) > 1e-2
    )
    results.append(
        CheckResult(
            "ruin-time prefactor (s=0 killed time)",
            ok,
            f"implemented={implemented_et0:.6f} oracle={sol.et[0]:.6f} "
            f"rejected={rejected_et0:.6f}",
        )
    )
    return results


def _phi_is_consistent(theta_val: float, params: WalkParams) -> bool:
    return theta_val * theta_val >= 4.0 * params.omega_pow


def _phi_is_consistent_or_matches(
    theta_val: float, params: WalkParams, p0: float
) -> bool:
    """True if the rejected theta would still reproduce the oracle's p0."""
    if not _phi_is_consistent(theta_val, params):
        return False
    phi1 = 0.5 * (theta_val + math.sqrt(theta_val ** 2 - 4.0 * params.omega_pow))
    phi2 = params.omega_pow / phi1
    candidate = phi2 / (params.omega_pow * (1.0 - params.s))
    return abs(candidate - p0) < 1e-6


# ---------------------------------------------------------------------------
# Monte Carlo concordance


def check_monte_carlo(
    trials: int = 1_000_000, seed: int = 20240914, sigmas: float = 4.0
) -> list[CheckResult]:
    results = []
    for p, s, i0, strategy in MC_GRID:
        params = WalkParams(p, s, i0)
        sol = oracle.solve_exact(params, strategy, tol=1e-11)
        passed, detail = _mc_point(params, strategy, sol, trials, seed, sigmas)
        if not passed:  # one retry with a fresh stream, recorded
            passed, retry_detail = _mc_point(
                params, strategy, sol, trials, seed + 1, sigmas
            )
            detail = f"{detail}; retry: {retry_detail}"
        results.append(
            CheckResult(
                f"Monte Carlo concordance p={p} s={s} i0={i0} {strategy.value}",
                passed,
                detail,
            )
        )
    return results


def _mc_point(params, strategy, sol, trials, seed, sigmas):
    sim = oracle.simulate(params, strategy, trials, seed=seed)
    worst_z = 0.0
    est, se = sim.probability(0)
    worst_z = max(worst_z, abs(est - sol.p0) / max(se, 1e-12))
    for k in (1, 2, 3):
        est, se = sim.probability(k * params.i0)
        ref = sol.pk.get(k, 0.0)
        if ref == 0.0 and est == 0.0:
            continue
        worst_z = max(worst_z, abs(est - ref) / max(se, 1e-12))
    mt, mse = sim.mean_time, sim.mean_time_se
    worst_z = max(worst_z, abs(mt - sol.m_total) / max(mse, 1e-12))
    return worst_z <= sigmas, f"worst z-score {worst_z:.2f} (seed {seed})"


# ---------------------------------------------------------------------------
# top level


def run_all(
    quick: bool = False,
    trials: int = 1_000_000,
    seed: int = 20240914,
    inject_wrong_mb: bool = False,
) -> list[CheckResult]:
    checks = [
        check_step_roots(),
        check_barrier_roots(),
        check_theta_symmetric_limit(),
        check_b_from_a_relation(),
        check_barrier_recurrence(),
        check_c_seed_relations(),
        check_mgf_monotonicity(),
        check_barrier_geometry(),
        check_mass_conservation(),
        check_a_b_time_scaling(),
        check_bc_ratio(),
        check_time_decomposition(),
        check_derivatives_fd(),
    ]
    checks.extend(check_exact_agreement())
    checks.extend(check_errata(inject_wrong_mb=inject_wrong_mb))
    if not quick:
        checks.extend(check_monte_carlo(trials=trials, seed=seed))
    return checks
