"""Closed-form visit generating functions for the three stopping strategies.

For a walk started at ``i0``, the generating function of a state ``j`` is
``sum_m P(at j after m steps, not yet absorbed) * z**m`` for ``0 < z <= 1``;
at z=1 it is the expected number of arrivals at ``j`` before absorption.
Strategy B's functions follow strategy A's through a single factor ``1-s``
(surviving the t=0 stop decision), which removes the m=0 self-term at the
start state: B's function at ``i0`` sums from m=1.

Barrier states carry the closed forms; states strictly between barriers are
reconstructed from the two neighbouring barrier values via the divided
differences of tau powers, one segment at a time.  All formulas here are
cross-checked against the step-by-step propagation oracle in
:mod:`ruinwalk.oracle`.
"""

from __future__ import annotations

from .charpoly import (
    CharData,
    PhiPair,
    RootPair,
    phi_roots,
    power_divided_difference,
    tau_roots,
    theta,
)
from .core import ParameterError, Strategy, UnsupportedRegimeError, WalkParams


def _require_interior_s(params: WalkParams) -> None:
    if not 0.0 < params.s < 1.0:
        raise UnsupportedRegimeError(
            f"closed-form generating functions need 0 < s < 1, got s={params.s}; "
            "the s=0 and s=1 cases are served by the metrics special branches"
        )


def _char_context(params: WalkParams, z: float) -> tuple[RootPair, CharData, PhiPair]:
    roots = tau_roots(z, params)
    char = theta(z, params)
    return roots, char, phi_roots(char)


def mgf_a(params: WalkParams, z: float, k: int) -> float:
    """Strategy-A generating function on the barrier state k*i0 (k >= 0)."""
    _require_interior_s(params)
    if k < 0:
        raise ParameterError(f"barrier index must be >= 0, got {k}")
    roots, _, phi = _char_context(params, z)
    if k == 0:
        return phi.phi2 / params.omega_pow
    d_i0 = power_divided_difference(roots, params.i0)
    base = d_i0 / (params.q * (1.0 - params.s) * z * params.omega_pow)
    return base * phi.phi2 ** k


def mgf_b(params: WalkParams, z: float, k: int) -> float:
    """Strategy-B generating function on k*i0: A's value rescaled by 1/(1-s).

    The start state additionally sheds its m=0 self-term, so
    ``value_B = (value_A - delta(k,1)) / (1-s)``.
    """
    ua = mgf_a(params, z, k)
    delta = 1.0 if k == 1 else 0.0
    return (ua - delta) / (1.0 - params.s)


def mgf_c(params: WalkParams, z: float, k: int) -> float:
    """Strategy-C generating function on the barrier state k*i0 (k >= 0)."""
    _require_interior_s(params)
    if k < 0:
        raise ParameterError(f"barrier index must be >= 0, got {k}")
    roots, _, phi = _char_context(params, z)
    i0 = params.i0
    denom = roots.tau1 ** i0 + roots.tau2 ** i0 - phi.phi2
    if k == 0:
        return 1.0 / denom
    d_i0 = power_divided_difference(roots, i0)
    if k == 1:
        return d_i0 / (params.q * z * denom)
    return (
        d_i0
        * phi.phi2 ** (k - 1)
        / (params.q * (1.0 - params.s) * z * denom)
    )


def _barrier_fn(strategy: Strategy):
    return {Strategy.A: mgf_a, Strategy.B: mgf_b, Strategy.C: mgf_c}[
        Strategy(strategy)
    ]


def mgf_interior(params: WalkParams, strategy: Strategy, z: float, position: int) -> float:
    """Generating function on a state strictly between barriers.

    With ``position = k*i0 + n`` (0 < n < i0), the value is a convex-like
    bridge between the two neighbouring barrier values:

    ``value = (scale) * [left * omega**n * D_{i0-n} + right * D_n] / D_i0``

    where ``D_m`` is the divided difference of tau powers, ``left``/``right``
    are the barrier values that bound the segment and ``scale`` carries the
    per-segment stop factor.  On the lowest segment the left boundary is the
    absorbing state 0, which contributes nothing.
    """
    _require_interior_s(params)
    i0 = params.i0
    if i0 < 2:
        raise ParameterError("interior states require i0 >= 2")
    k, n = divmod(position, i0)
    if n == 0:
        raise ParameterError(
            f"position {position} is a barrier-lattice state; use the barrier forms"
        )
    strategy = Strategy(strategy)
    roots, _, _ = _char_context(params, z)
    d_n = power_divided_difference(roots, n)
    d_co = power_divided_difference(roots, i0 - n)
    d_i0 = power_divided_difference(roots, i0)
    one_ms = 1.0 - params.s
    omega_n = params.omega ** n

    if strategy in (Strategy.A, Strategy.B):
        u_next = mgf_a(params, z, k + 1)
        if k == 0:
            value = one_ms * u_next * d_n / d_i0
        else:
            u_here = mgf_a(params, z, k)
            value = one_ms * (u_here * omega_n * d_co + u_next * d_n) / d_i0
        if strategy is Strategy.B:
            value /= one_ms
        return value

    w_next = mgf_c(params, z, k + 1)
    if k == 0:
        # the segment [0, i0] has normal states on both sides for C
        return w_next * d_n / d_i0
    w_here = mgf_c(params, z, k)
    if k == 1:
        # only the upper end (2*i0) of this segment is a barrier
        return (w_here * omega_n * d_co + one_ms * w_next * d_n) / d_i0
    return one_ms * (w_here * omega_n * d_co + w_next * d_n) / d_i0


def mgf_value(params: WalkParams, strategy: Strategy, z: float, position: int) -> float:
    """Generating function at an arbitrary state, dispatching barrier/interior."""
    if position < 0:
        raise ParameterError(f"position must be >= 0, got {position}")
    k, n = divmod(position, params.i0)
    if n == 0:
        return _barrier_fn(strategy)(params, z, k)
    return mgf_interior(params, strategy, z, position)


def mgf_b_s1(params: WalkParams, z: float, segment: int, n: int) -> float:
    """Strategy-B generating functions in the all-stop case s=1.

    With s=1 every barrier absorbs on arrival, so after the first step the
    walk is confined to one of two segments with absorbing ends:

    * ``segment=1``: states ``0..i0``, entered at ``i0 - 1``; ``n`` is the
      absolute state.
    * ``segment=2``: states ``i0..2*i0``, entered at ``i0 + 1``; ``n`` is
      the offset above ``i0``.

    Returns the generating function of state ``n`` (segment 1) or
    ``i0 + n`` (segment 2) for the segment walk.  For i0=1 the segments
    have no interior: the walk starts on an absorbing end, so the entry
    state carries value 1 and the opposite end 0.
    """
    if params.s != 1.0:
        raise UnsupportedRegimeError(f"this branch is the s=1 case, got s={params.s}")
    if segment not in (1, 2):
        raise ParameterError(f"segment must be 1 or 2, got {segment}")
    i0 = params.i0
    if not 0 <= n <= i0:
        raise ParameterError(f"offset must lie in [0, {i0}], got {n}")
    roots = tau_roots(z, params)
    if i0 == 1:
        if segment == 1:
            return 1.0 if n == 0 else 0.0
        return 1.0 if n == 1 else 0.0
    d_i0 = power_divided_difference(roots, i0)
    if segment == 1:
        if n == 0:
            return 1.0 / d_i0
        if n == i0:
            return params.omega * power_divided_difference(roots, i0 - 1) / d_i0
        return power_divided_difference(roots, n) / (params.q * z * d_i0)
    if n == 0:
        return power_divided_difference(roots, i0 - 1) / d_i0
    if n == i0:
        return params.omega ** (i0 - 1) / d_i0
    return (
        params.omega ** n
        * power_divided_difference(roots, i0 - n)
        / (params.p * z * d_i0)
    )
