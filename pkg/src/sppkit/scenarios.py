"""The three beam/plate set-ups, built by either route.

* on-axis Gaussian through a plate (r0 = 0)
* displaced Gaussian, no plate (q = 0)
* displaced Gaussian through a plate
"""

from __future__ import annotations

import math

from .classical import (SpectralDecomposition, TruncationPolicy, displaced_gaussian_coeffs,
                        displaced_spp_coeffs, gaussian_spp_coeffs)
from .errors import InvalidParameterError
from .quantum import (OperatorTruncation, TwoModeState, apply_spp_operator, displace_vacuum,
                      displaced_spp_quantum, state_to_lg_coeffs)


def alpha_from_displacement(r0: float, w0: float) -> float:
    """Coherent amplitude |alpha| = r0 / (sqrt(2) w0) of a beam displaced by r0."""
    return r0 / (math.sqrt(2.0) * w0)


def classical_decomposition(q: float, r0: float = 0.0, phi0: float = 0.0, w0: float = 1.0,
                            policy: TruncationPolicy | None = None,
                            dislocation_angle: float = 0.0) -> SpectralDecomposition:
    policy = policy or TruncationPolicy()
    if r0 < 0:
        raise InvalidParameterError("displacement must be non-negative")
    if r0 == 0:
        return gaussian_spp_coeffs(q, policy, w0, dislocation_angle)
    if q == 0:
        return displaced_gaussian_coeffs(r0, phi0, w0, policy)
    return displaced_spp_coeffs(q, r0, phi0, w0, policy, dislocation_angle)


def operator_truncation_for(policy: TruncationPolicy, state: TwoModeState, tail_tol: float = 0.1,
                            k_max: int | None = None) -> OperatorTruncation:
    """Operator cutoffs that fill the classical output window.

    Output sectors are capped at |L| <= l_max.  The harmonic cutoff is
    widened by the largest |L| in the input so that every output sector
    receives the same harmonics the classical composition uses.
    """
    top = max((abs(o.angular_momentum) for o in state.amplitudes), default=0)
    k = policy.k_max + top if k_max is None else k_max
    return OperatorTruncation(k_max=k, m_max=max(policy.p_max, k), tail_tol=tail_tol, l_max=policy.l_max)


def quantum_state(q: float, r0: float = 0.0, phi0: float = 0.0, w0: float = 1.0,
                  policy: TruncationPolicy | None = None, method: str = "operator", tail_tol: float = 0.1,
                  dislocation_angle: float = 0.0, k_max: int | None = None) -> TwoModeState:
    """Output two-mode state of the scenario, from the displaced vacuum."""
    policy = policy or TruncationPolicy()
    alpha = alpha_from_displacement(r0, w0)
    state = displace_vacuum(alpha, phi0)
    if q == 0:
        return state
    trunc = operator_truncation_for(policy, state, tail_tol, k_max)
    if method == "operator" and r0 == 0:
        return apply_spp_operator(state, q, trunc, dislocation_angle)
    return displaced_spp_quantum(q, alpha, phi0, trunc, method=method, dislocation_angle=dislocation_angle)


def quantum_decomposition(q: float, r0: float = 0.0, phi0: float = 0.0, w0: float = 1.0,
                          policy: TruncationPolicy | None = None, **kwargs) -> SpectralDecomposition:
    """Scenario state mapped to LG coefficients and cut to the policy window."""
    policy = policy or TruncationPolicy()
    state = quantum_state(q, r0, phi0, w0, policy, **kwargs)
    d = state_to_lg_coeffs(state, w0).restricted(policy.p_max, policy.l_max)
    return SpectralDecomposition(d.entries, w0, policy, q)
