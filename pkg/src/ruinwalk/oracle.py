"""Independent ground truth: Monte Carlo, exact linear solves, mass propagation.

Nothing in this module uses the closed forms from :mod:`ruinwalk.charpoly`,
:mod:`ruinwalk.mgf` or :mod:`ruinwalk.metrics`; it knows only the walk
dynamics.  Three layers:

* :func:`solve_exact` conditions on the first transition out of every state
  to get tridiagonal systems for per-barrier absorption probabilities and
  killed expected times on a truncated lattice, then doubles the truncation
  until the answers stabilize (with Aitken acceleration for the slowly
  converging no-barrier cases).
* :func:`mgf_dp` propagates the surviving probability mass step by step and
  accumulates the visit generating function directly from its definition.
* :func:`simulate` runs seeded Monte Carlo trials with a counter-based
  per-trial random stream, so results are bit-identical for any chunking or
  worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import rng
from .core import ParameterError, Strategy, WalkParams

_CHUNK = 1 << 16


class ConvergenceError(RuntimeError):
    """The truncation-doubling loop failed to stabilize."""


# ---------------------------------------------------------------------------
# exact first-step solver


@dataclass(frozen=True)
class ExactSolution:
    """Absorption profile and killed time profile from the truncated solver."""

    truncation_k: int
    p0: float
    pk: dict[int, float]
    et: dict[int, float]
    m_total: float
    escape_mass: float
    error_estimate: float

    def probability(self, k: int) -> float:
        return self.p0 if k == 0 else self.pk.get(k, 0.0)

    def killed_time(self, k: int) -> float:
        return self.et.get(k, 0.0)


def _steady_barrier_mask(strategy: Strategy, n_states: int, i0: int) -> np.ndarray:
    """Active-barrier mask over states 0..n_states-1 for times t > 0."""
    states = np.arange(n_states)
    kmin = Strategy(strategy).first_barrier_multiple
    return (states % i0 == 0) & (states >= kmin * i0)


def _solve_truncated(params: WalkParams, strategy: Strategy, trunc_k: int) -> dict:
    """Solve the first-step systems with the lattice cut at trunc_k * i0.

    The top state acts as an artificial sink (its absorption mass is the
    escape estimate).  Unknowns are values per *presence* at a state: at a
    barrier the walker is absorbed with probability s and otherwise steps,
    which makes the systems tridiagonal with row weights 1-s on barrier
    rows.  Strategy A's stop decision at t=0 and strategy B's inactive
    start barrier live only in the start-state assembly, not in the matrix.
    """
    p, q, s, i0 = params.p, params.q, params.s, params.i0
    strategy = Strategy(strategy)
    top = trunc_k * i0
    n_int = top - 1
    barrier = _steady_barrier_mask(strategy, top, i0)  # top itself excluded
    alpha = np.where(barrier[1:top], 1.0 - s, 1.0)  # row weights, states 1..top-1

    ab = np.zeros((3, n_int))
    ab[1, :] = 1.0
    ab[0, 1:] = -alpha[:-1] * p
    ab[2, :-1] = -alpha[1:] * q

    if s == 0.0:
        targets = [0]  # no barrier can absorb; every other column is zero
    else:
        targets = [0] + [k * i0 for k in range(1, trunc_k)]
    rhs = np.zeros((n_int, len(targets)))
    for col, y in enumerate(targets):
        if y == 0:
            rhs[0, col] = alpha[0] * q  # boundary h_0 = 1 folded into row 1
        elif barrier[y]:
            rhs[y - 1, col] = s

    h = np.zeros((top + 1, len(targets)))
    h[1:top] = solve_banded((1, 1), ab, rhs)
    if targets[0] == 0:
        h[0, 0] = 1.0

    rhs_t = alpha[:, None] * (p * h[2 : top + 1] + q * h[0 : top - 1])
    t = np.zeros((top + 1, len(targets)))
    t[1:top] = solve_banded((1, 1), ab, rhs_t)

    up_h, dn_h = h[i0 + 1], h[i0 - 1]
    up_ht, dn_ht = h[i0 + 1] + t[i0 + 1], h[i0 - 1] + t[i0 - 1]
    if strategy is Strategy.A:
        start_h = (1.0 - s) * (p * up_h + q * dn_h)
        start_t = (1.0 - s) * (p * up_ht + q * dn_ht)
        for col, y in enumerate(targets):
            if y == i0:
                start_h[col] += s
    elif strategy is Strategy.B:
        start_h = p * up_h + q * dn_h
        start_t = p * up_ht + q * dn_ht
    else:
        start_h = h[i0].copy()
        start_t = t[i0].copy()

    out = {"p0": 0.0, "m_total": float(start_t.sum())}
    pk: dict[int, float] = {}
    et: dict[int, float] = {}
    for col, y in enumerate(targets):
        if y == 0:
            out["p0"] = float(start_h[col])
            et[0] = float(start_t[col])
        else:
            pk[y // i0] = float(start_h[col])
            et[y // i0] = float(start_t[col])
    if s == 0.0:
        for k in range(1, trunc_k):
            pk[k] = 0.0
            et[k] = 0.0
    out["pk"] = pk
    out["et"] = et
    out["escape"] = float(max(0.0, 1.0 - start_h.sum()))
    return out


def _flatten(sol: dict) -> dict[str, float]:
    flat = {"p0": sol["p0"], "m_total": sol["m_total"]}
    for k, v in sol["pk"].items():
        flat[f"pk{k}"] = v
    for k, v in sol["et"].items():
        flat[f"et{k}"] = v
    return flat


def _pair_diff(a: dict[str, float], b: dict[str, float]) -> float:
    worst = 0.0
    for key in a.keys() & b.keys():
        va, vb = a[key], b[key]
        if math.isinf(va) and math.isinf(vb):
            continue
        worst = max(worst, abs(va - vb))
    return worst


_TIME_PREFIXES = ("et", "m_total")


def _aitken(v1: dict, v2: dict, v3: dict, tol: float) -> tuple[dict, bool]:
    """Per-scalar Aitken extrapolation of three doubling solutions.

    Returns the extrapolated dict and a flag saying whether every scalar was
    tractable (geometric decay, already converged, or a time-like quantity
    growing without bound, reported as inf).
    """
    out: dict[str, float] = {}
    ok = True
    tiny = max(tol / 10.0, 1e-15)
    for key in v1.keys() & v2.keys() & v3.keys():
        a, b, c = v1[key], v2[key], v3[key]
        d1, d2 = b - a, c - b
        if abs(d2) <= tiny and abs(d1) <= tiny:
            out[key] = c
            continue
        if abs(d1) <= tiny:
            out[key] = c
            ok = False
            continue
        r = d2 / d1
        if r >= 1.02:
            if key.startswith(_TIME_PREFIXES):
                out[key] = math.inf
            else:
                raise ConvergenceError(
                    f"absorption probability diverges under truncation doubling ({key})"
                )
        elif abs(r) < 0.97:
            out[key] = c + d2 * r / (1.0 - r)
        else:
            out[key] = c
            ok = False
    return out, ok


def solve_exact(
    params: WalkParams,
    strategy: Strategy,
    tol: float = 1e-10,
    start_k: int = 8,
    max_k: int = 1024,
) -> ExactSolution:
    """First-step-analysis solution, truncation-doubled until stable.

    Doubles the barrier count from ``start_k`` and accepts once consecutive
    solutions agree within ``tol`` on every shared entry.  When plain
    doubling stalls (no stopping barriers and a flat or upward drift, where
    truncation error decays like 1/K or the mean time is infinite), Aitken
    extrapolation over the doubling sequence supplies the limit, with
    genuinely divergent time entries reported as ``inf``.
    """
    if tol <= 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    strategy = Strategy(strategy)
    history: list[dict] = []
    flats: list[dict[str, float]] = []
    prev_extrap: dict[str, float] | None = None
    trunc_k = start_k
    while trunc_k <= max_k:
        sol = _solve_truncated(params, strategy, trunc_k)
        history.append(sol)
        flats.append(_flatten(sol))
        if len(flats) >= 2:
            diff = _pair_diff(flats[-1], flats[-2])
            if diff < tol:
                return _finish(sol, trunc_k, diff)
        if len(flats) >= 3:
            extrap, ok = _aitken(flats[-3], flats[-2], flats[-1], tol)
            if ok and prev_extrap is not None:
                ediff = _pair_diff(extrap, prev_extrap)
                if ediff < tol:
                    merged = _apply_extrapolation(sol, extrap)
                    return _finish(merged, trunc_k, ediff)
            prev_extrap = extrap if ok else None
        trunc_k *= 2
    raise ConvergenceError(
        f"no stable solution up to truncation {max_k} barriers "
        f"(p={params.p}, s={params.s}, i0={params.i0}, strategy={strategy.value})"
    )


def _apply_extrapolation(sol: dict, extrap: dict[str, float]) -> dict:
    out = {
        "p0": extrap.get("p0", sol["p0"]),
        "m_total": extrap.get("m_total", sol["m_total"]),
        "pk": dict(sol["pk"]),
        "et": dict(sol["et"]),
    }
    for k in out["pk"]:
        out["pk"][k] = extrap.get(f"pk{k}", out["pk"][k])
    for k in out["et"]:
        out["et"][k] = extrap.get(f"et{k}", out["et"][k])
    # keep the escape estimate consistent with the extrapolated masses
    out["escape"] = max(0.0, 1.0 - out["p0"] - sum(out["pk"].values()))
    return out


def _finish(sol: dict, trunc_k: int, err: float) -> ExactSolution:
    return ExactSolution(
        truncation_k=trunc_k,
        p0=sol["p0"],
        pk=dict(sorted(sol["pk"].items())),
        et=dict(sorted(sol["et"].items())),
        m_total=sol["m_total"],
        escape_mass=sol["escape"],
        error_estimate=err,
    )


# ---------------------------------------------------------------------------
# step-by-step generating-function evaluation


def mgf_dp(
    params: WalkParams,
    strategy: Strategy,
    z: float,
    state: int,
    tol: float = 1e-10,
) -> float:
    """Visit generating function evaluated by propagating surviving mass.

    Needs ``0 < z < 1`` strictly: the remaining-tail bound
    ``z**m * alive / (1 - z)`` is what terminates the sum.  Values at z=1
    come from :func:`solve_exact` instead.  For strategy B the m=0 presence
    at the start state is excluded, matching the delayed-barrier bookkeeping
    of the closed forms.
    """
    if not 0.0 < z < 1.0:
        raise ParameterError(f"mass propagation needs 0 < z < 1, got z={z}")
    if state < 0:
        raise ParameterError(f"state must be >= 0, got {state}")
    strategy = Strategy(strategy)
    i0 = params.i0
    trunc_k = max(8, 2 * (state // i0 + 2))
    prev = None
    while trunc_k <= 1 << 20:
        value = _dp_once(params, strategy, z, state, trunc_k, tol / 4.0)
        if prev is not None and abs(value - prev) < tol:
            if strategy is Strategy.B and state == i0:
                value -= 1.0
            return value
        prev = value
        trunc_k *= 2
    raise ConvergenceError("lattice doubling did not stabilize the generating function")


def _dp_once(
    params: WalkParams,
    strategy: Strategy,
    z: float,
    state: int,
    trunc_k: int,
    tail_tol: float,
) -> float:
    p, q, s, i0 = params.p, params.q, params.s, params.i0
    top = trunc_k * i0
    stop_steady = np.zeros(top, dtype=float)
    stop_steady[_steady_barrier_mask(strategy, top, i0)] = s
    stop_steady[0] = 1.0
    stop_t0 = stop_steady.copy()
    if strategy is not Strategy.A:
        stop_t0[i0] = 0.0

    w = np.zeros(top)  # index 0..top-1; mass reaching `top` escapes
    w[i0] = 1.0
    value = 0.0
    zpow = 1.0
    alive = 1.0
    m = 0
    max_terms = 5_000_000
    while zpow * alive / (1.0 - z) >= tail_tol:
        if m >= max_terms:
            raise ConvergenceError(
                f"propagation tail did not close within {max_terms} terms "
                f"(z={z} too close to 1 for tolerance {tail_tol})"
            )
        if state < top:
            value += zpow * w[state]
        surv = w * (1.0 - (stop_t0 if m == 0 else stop_steady))
        nxt = np.zeros_like(w)
        nxt[1:] += p * surv[:-1]
        nxt[:-1] += q * surv[1:]
        w = nxt
        alive = float(w.sum())
        zpow *= z
        m += 1
    return value


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class SimResult:
    """Aggregated Monte Carlo outcome with enough sums for standard errors."""

    trials: int
    seed: int
    generator: tuple[tuple[str, object], ...]
    escaped: int
    absorption_counts: dict[int, int]
    time_sum_by_state: dict[int, float]
    time_sq_sum_by_state: dict[int, float]

    def probability(self, state: int) -> tuple[float, float]:
        """(estimate, standard error) of absorption exactly at ``state``."""
        n = self.trials
        est = self.absorption_counts.get(state, 0) / n
        se = math.sqrt(max(est * (1.0 - est), 0.0) / n)
        return est, se

    def killed_time(self, state: int) -> tuple[float, float]:
        """(estimate, standard error) of E[time * 1{absorbed at state}]."""
        n = self.trials
        mean = self.time_sum_by_state.get(state, 0.0) / n
        mean_sq = self.time_sq_sum_by_state.get(state, 0.0) / n
        var = max(mean_sq - mean * mean, 0.0)
        return mean, math.sqrt(var / n)

    @property
    def mean_time(self) -> float:
        return sum(self.time_sum_by_state.values()) / self.trials

    @property
    def mean_time_se(self) -> float:
        n = self.trials
        mean = self.mean_time
        mean_sq = sum(self.time_sq_sum_by_state.values()) / n
        return math.sqrt(max(mean_sq - mean * mean, 0.0) / n)


def _chunk_trials(
    params: WalkParams,
    strategy: Strategy,
    seed: int,
    lo: int,
    hi: int,
    max_steps: int,
) -> tuple[dict[int, int], dict[int, float], dict[int, float], int]:
    p, s, i0 = params.p, params.s, params.i0
    kmin = strategy.first_barrier_multiple
    ids = np.arange(lo, hi, dtype=np.uint64)
    x = np.full(hi - lo, i0, dtype=np.int64)
    counts: dict[int, int] = {}
    tsum: dict[int, float] = {}
    tsq: dict[int, float] = {}

    def record(states: np.ndarray, when: int) -> None:
        vals, cnt = np.unique(states, return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            counts[v] = counts.get(v, 0) + c
            tsum[v] = tsum.get(v, 0.0) + c * float(when)
            tsq[v] = tsq.get(v, 0.0) + c * float(when) ** 2

    t = 0
    while x.size and t < max_steps:
        u = rng.step_uniforms(seed, ids, t)
        on_barrier = (x % i0 == 0) & (x >= kmin * i0)
        if strategy is Strategy.B and t == 0:
            on_barrier &= x != i0
        sbar = np.where(on_barrier, s, 0.0)
        stopped = u < sbar
        if stopped.any():
            record(x[stopped], t)
            keep = ~stopped
            x, ids, u, sbar = x[keep], ids[keep], u[keep], sbar[keep]
        up = u < sbar + (1.0 - sbar) * p
        x = x + np.where(up, 1, -1)
        ruined = x == 0
        if ruined.any():
            record(x[ruined], t + 1)
            keep = ~ruined
            x, ids = x[keep], ids[keep]
        t += 1
    return counts, tsum, tsq, int(x.size)


def simulate(
    params: WalkParams,
    strategy: Strategy,
    trials: int,
    seed: int,
    max_steps: int = 10_000_000,
    workers: int = 1,
) -> SimResult:
    """Monte Carlo estimate of the absorption profile and killed times.

    Trial ``t`` draws its uniforms from the counter-based stream
    ``(seed, t, step)``, so the result is bit-identical for any chunking or
    ``workers`` value.  Trials still alive after ``max_steps`` are counted
    as escaped, never dropped silently.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if max_steps < 1:
        raise ParameterError(f"max_steps must be >= 1, got {max_steps}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    strategy = Strategy(strategy)
    bounds = [(lo, min(lo + _CHUNK, trials)) for lo in range(0, trials, _CHUNK)]

    def run(b: tuple[int, int]):
        return _chunk_trials(params, strategy, seed, b[0], b[1], max_steps)

    if workers == 1 or len(bounds) == 1:
        partials = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run, bounds))  # order matches `bounds`

    counts: dict[int, int] = {}
    tsum: dict[int, float] = {}
    tsq: dict[int, float] = {}
    escaped = 0
    for c, ts, t2, esc in partials:
        escaped += esc
        for k in sorted(c):
            counts[k] = counts.get(k, 0) + c[k]
            tsum[k] = tsum.get(k, 0.0) + ts[k]
            tsq[k] = tsq.get(k, 0.0) + t2[k]
    key = rng.split_key(seed)
    return SimResult(
        trials=trials,
        seed=seed,
        generator=(
            ("name", rng.GENERATOR_NAME),
            ("key", key),
            ("counter_layout", "(step, trial_lo32, trial_hi32, 0)"),
            ("output_lane", 0),
        ),
        escaped=escaped,
        absorption_counts=dict(sorted(counts.items())),
        time_sum_by_state=dict(sorted(tsum.items())),
        time_sq_sum_by_state=dict(sorted(tsq.items())),
    )
