"""Two-mode Fock-space engine for the spiral-phase-plate operator.

Occupations are labelled in the circular basis (n_plus, n_minus), with
angular momentum L = n_plus - n_minus and total quanta N = n_plus + n_minus.
The plate acts as sum_k C_qk e^{ik phi}, where each phase harmonic is the
ratio of rational powers of Y = a_+^dag + a_- and its adjoint.

Rational powers are continued through Gamma functions.  Where a Gamma pole
meets a vanishing binomial, every rational exponent is shifted by +eps and
the leading Laurent term is kept (see :mod:`sppkit.specfun`); terms of
positive order in eps vanish in the limit and are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .classical import SpectralDecomposition, TruncationPolicy
from .errors import GammaPoleError, InvalidParameterError, NonIntegralTargetError, TruncationOverflowError
from .paraxial import ModeIndex
from .specfun import binomial_lead, gamma_lead, is_pole, laguerre, reciprocal_gamma, sinc_phase

TARGET_TOL = 1e-9


@dataclass(frozen=True, order=True)
class CircularOccupation:
    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.n_plus < 0 or self.n_minus < 0:
            raise InvalidParameterError("occupations must be non-negative")
        object.__setattr__(self, "n_plus", int(self.n_plus))
        object.__setattr__(self, "n_minus", int(self.n_minus))

    @property
    def total(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def angular_momentum(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def mode(self) -> ModeIndex:
        """LG label (p, l) = (min(n_plus, n_minus), n_plus - n_minus)."""
        return ModeIndex(min(self.n_plus, self.n_minus), self.angular_momentum)

    @classmethod
    def from_mode(cls, idx: ModeIndex):
        return cls(idx.p + max(idx.l, 0), idx.p + max(-idx.l, 0))


class TwoModeState:
    """Sparse map CircularOccupation -> complex amplitude.

    ``info`` carries diagnostics from the operation that produced the state
    (captured power, tail estimate, dropped-term counter).
    """

    def __init__(self, amplitudes, info: dict | None = None):
        clean = {}
        for occ, a in dict(amplitudes).items():
            occ = occ if isinstance(occ, CircularOccupation) else CircularOccupation(*occ)
            a = complex(a)
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise InvalidParameterError(f"non-finite amplitude at {occ}")
            if a != 0:
                clean[occ] = clean.get(occ, 0j) + a
        self.amplitudes = dict(sorted(clean.items()))
        self.info = dict(info or {})

    @classmethod
    def vacuum(cls):
        return cls({CircularOccupation(0, 0): 1.0})

    def __len__(self):
        return len(self.amplitudes)

    def __getitem__(self, occ):
        occ = occ if isinstance(occ, CircularOccupation) else CircularOccupation(*occ)
        return self.amplitudes.get(occ, 0j)

    def __add__(self, other):
        merged = dict(self.amplitudes)
        for occ, a in other.amplitudes.items():
            merged[occ] = merged.get(occ, 0j) + a
        return TwoModeState(merged)

    def scaled(self, factor: complex):
        return TwoModeState({o: a * factor for o, a in self.amplitudes.items()})

    @property
    def norm(self) -> float:
        """Sum of |a|^2 over the stored entries."""
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    norm_report = norm

    def arrays(self):
        """Parallel arrays (n_plus, n_minus, amplitude)."""
        if not self.amplitudes:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex)
        occ = list(self.amplitudes)
        return (np.array([o.n_plus for o in occ], dtype=np.int64),
                np.array([o.n_minus for o in occ], dtype=np.int64),
                np.array(list(self.amplitudes.values()), dtype=complex))

    def sector_support(self):
        """Set of angular momenta L carrying nonzero amplitude."""
        return {o.angular_momentum for o in self.amplitudes}

    def __repr__(self):
        return f"TwoModeState(n={len(self)}, norm={self.norm:.12g})"


@dataclass(frozen=True)
class OperatorTruncation:
    """Cutoffs for the phase-operator expansion.

    Parameters
    ----------
    k_max : int
        Harmonics |k| <= k_max of the plate's Fourier series are applied.
    m_max : int
        Output occupations are kept up to radial index min(n_plus, n_minus)
        <= m_max.
    tail_tol : float
        Largest tolerated lost norm, ||in||^2 - ||out||^2, before
        :class:`TruncationOverflowError` is raised.
    l_max : int or None
        Optional cap on |L| of the output; by default every reachable
        sector is kept.
    """

    k_max: int = 40
    m_max: int = 60
    tail_tol: float = 0.1
    l_max: int | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.k_max < 0 or self.m_max < 0:
            raise InvalidParameterError("cutoffs must be non-negative")
        if self.m_max < self.k_max:
            raise InvalidParameterError("m_max must be at least k_max")
        if not self.tail_tol > 0:
            raise InvalidParameterError("tail_tol must be positive")


# ---------------------------------------------------------------------------
# rational ladder powers on a single mode
# ---------------------------------------------------------------------------


def _integral_target(n, alpha, beta):
    t = n + beta - alpha
    if abs(t - round(t)) > TARGET_TOL:
        raise NonIntegralTargetError(f"n + beta - alpha = {t!r} is not an integer")
    return int(round(t))


def rational_ladder_na(n: int, alpha: float, beta: float) -> tuple[int, float]:
    """a^alpha a_dag^beta |n> = factor |n + beta - alpha>.

    factor = Gamma(1+n+beta) / sqrt(n! Gamma(1+n+beta-alpha)); it is 0
    when the target occupation is negative.
    """
    if n < 0:
        raise InvalidParameterError("occupation must be non-negative")
    target = _integral_target(n, alpha, beta)
    if target < 0:
        return target, 0.0
    if is_pole(1 + n + beta):
        raise GammaPoleError("creation power runs through a Gamma pole")
    factor = math.gamma(1 + n + beta) / math.sqrt(math.factorial(n) * math.factorial(target))
    return target, factor


def rational_ladder_an(n: int, alpha: float, beta: float) -> tuple[int, float]:
    """a_dag^beta a^alpha |n> = factor |n + beta - alpha>.

    factor = sqrt(n! Gamma(1+n+beta-alpha)) / Gamma(1+n-alpha), zero at the
    poles of the denominator.
    """
    if n < 0:
        raise InvalidParameterError("occupation must be non-negative")
    target = _integral_target(n, alpha, beta)
    if target < 0:
        return target, 0.0
    return target, math.sqrt(math.factorial(n) * math.factorial(target)) * reciprocal_gamma(1 + n - alpha)


# ---------------------------------------------------------------------------
# phase harmonics e^{ik phi}
# ---------------------------------------------------------------------------


def phase_op_matrix_element(k: int, n_out: int, m_out: int, m_in: int, n_in: int) -> complex:
    """<n_out|<m_out| e^{ik phi} |m_in>|n_in>, with m the (+) and n the (-) occupation.

    Scalar reference implementation of the double binomial sum.  Nonzero
    only when n_out - n_in = m_out - m_in - k, i.e. the harmonic raises the
    angular momentum m - n by k.  With i = h + m_out - m_in,

        sum_h binom(k/2, i) binom(-k/2, h) sqrt(m_in! m_out!) / (m_in - h)!
              * Gamma(1 + n_in - k/2 - h) / sqrt(n_in! n_out!)

    regularised by shifting every k/2 by +eps.
    """
    if min(n_out, m_out, m_in, n_in) < 0:
        raise InvalidParameterError("occupations must be non-negative")
    if n_out - n_in != m_out - m_in - k:
        return 0j
    d = m_out - m_in
    half = 0.5 * k
    terms = []
    for h in range(max(0, -d), m_in + 1):
        c1, o1 = binomial_lead(half, h + d)
        c2, o2 = binomial_lead(-half, h)
        c3, o3 = gamma_lead(1 + n_in - half - h)
        order = o1 + o2 + o3
        if order > 0:
            continue
        if order < 0:
            raise ArithmeticError("divergent term in phase harmonic; regularisation failed")
        terms.append(c1 * c2 * c3 / math.factorial(m_in - h))
    if not terms:
        return 0j
    pref = math.exp(0.5 * (math.lgamma(m_in + 1) + math.lgamma(m_out + 1)
                           - math.lgamma(n_in + 1) - math.lgamma(n_out + 1)))
    return complex(pref * math.fsum(terms))


def _window(state: TwoModeState, trunc: OperatorTruncation):
    n_p, n_m, amp = state.arrays()
    if trunc.l_max is not None:
        return n_p, n_m, amp, int(trunc.l_max)
    top = int(np.abs(n_p - n_m).max()) if n_p.size else 0
    return n_p, n_m, amp, top + trunc.k_max


def _dense_to_state(out, l_cap, info):
    ps, cols = np.nonzero(out)
    amps = {}
    for p, c in zip(ps, cols):
        L = int(c) - l_cap
        amps[CircularOccupation(int(p) + max(L, 0), int(p) + max(-L, 0))] = out[p, c]
    return TwoModeState(amps, info)


def _run(state, ks, weights, trunc, unitary_weight):
    n_p, n_m, amp, l_cap = _window(state, trunc)
    out, dropped = kernels.apply_harmonics(n_p, n_m, amp, ks, weights, trunc.m_max, l_cap)
    captured = float(np.sum(np.abs(out) ** 2))
    tail = state.norm * unitary_weight - captured
    info = {"captured_power": captured, "tail": tail, "dropped_terms": dropped,
            "k_max": trunc.k_max, "m_max": trunc.m_max, "l_cap": l_cap}
    if tail > trunc.tail_tol:
        raise TruncationOverflowError(
            f"truncated expansion lost {tail:.3g} of the norm (tail_tol={trunc.tail_tol:g})", tail=tail)
    return _dense_to_state(out, l_cap, info)


def apply_phase_harmonic(state: TwoModeState, k: int, trunc: OperatorTruncation | None = None) -> TwoModeState:
    """Apply the single harmonic e^{ik phi}; maps the L sector to L + k."""
    trunc = trunc or OperatorTruncation()
    if k == 0:
        return TwoModeState(state.amplitudes, {"captured_power": state.norm, "tail": 0.0, "dropped_terms": 0})
    return _run(state, [int(k)], [1.0], trunc, 1.0)


def spp_weights(q: float, k_max: int, dislocation_angle: float = 0.0):
    """Harmonics and weights C_qk e^{-ik theta} for |k| <= k_max, zeros removed."""
    ks, ws = [], []
    for k in range(-k_max, k_max + 1):
        w = sinc_phase(q, k)
        if w != 0:
            ks.append(k)
            ws.append(w * np.exp(-1j * k * dislocation_angle))
    return np.array(ks, dtype=np.int64), np.array(ws, dtype=complex)


def apply_spp_operator(state: TwoModeState, q: float, trunc: OperatorTruncation | None = None,
                       dislocation_angle: float = 0.0) -> TwoModeState:
    """Apply sum_{|k| <= k_max} C_qk e^{ik phi} to ``state``.

    Raises
    ------
    TruncationOverflowError
        When the output has lost more than ``trunc.tail_tol`` of the input norm.
    """
    trunc = trunc or OperatorTruncation()
    ks, ws = spp_weights(q, trunc.k_max, dislocation_angle)
    # the plate is unitary: the full harmonic series preserves the norm
    return _run(state, ks, ws, trunc, 1.0)


def vacuum_harmonic_amplitude(k: int, n_plus: int, grouping: str = "62") -> float:
    """Closed-form amplitude of e^{ik phi}|0,0> on |n_plus, n_plus - k>.

    ``grouping="62"`` indexes by m = n_plus:
        Gamma(1+k/2) Gamma(1-k/2) / Gamma(1+k/2-m) / sqrt(m! (m-k)!)
    ``grouping="63"`` indexes by h = n_plus - k = n_minus:
        Gamma(1-k/2) Gamma(1+k/2) / Gamma(1-k/2-h) / sqrt(h! (h+k)!)
    Both are evaluated as Laurent leading terms with k/2 -> k/2 + eps.
    """
    half = 0.5 * k
    if grouping == "62":
        m = n_plus
        if m - k < 0 or m < 0:
            return 0.0
        den, od = gamma_lead(1 + half - m)
        fact = math.lgamma(m + 1) + math.lgamma(m - k + 1)
    elif grouping == "63":
        h = n_plus - k
        if h < 0 or n_plus < 0:
            return 0.0
        den, od = gamma_lead(1 - half - h, slope=-1.0)
        fact = math.lgamma(h + 1) + math.lgamma(h + k + 1)
    else:
        raise InvalidParameterError(f"unknown grouping {grouping!r}")
    # one regularisation direction for all three Gammas; 62 and 63 read it
    # from opposite ends of the ladder
    slope = -1.0 if grouping == "63" else 1.0
    a, oa = gamma_lead(1 + half, slope=slope)
    b, ob = gamma_lead(1 - half, slope=slope)
    order = oa + ob - od
    if order > 0:
        return 0.0
    if order < 0:
        raise ArithmeticError("divergent vacuum amplitude")
    return a * b / den * math.exp(-0.5 * fact)


# ---------------------------------------------------------------------------
# displaced (coherent) states and the LG dictionary
# ---------------------------------------------------------------------------


def displace_vacuum(alpha_mag: float, phi0: float = 0.0, tol: float = 1e-16, n_max: int = 200) -> TwoModeState:
    """Product coherent state with alpha_+ = |alpha| e^{-i phi0}, alpha_- = conj(alpha_+).

    Amplitudes e^{-|alpha|^2} alpha_+^{n+} alpha_-^{n-} / sqrt(n+! n-!) are
    kept while their magnitude is at least ``tol`` and both occupations are
    at most ``n_max``.
    """
    if alpha_mag < 0:
        raise InvalidParameterError("|alpha| must be non-negative")
    if alpha_mag == 0:
        return TwoModeState.vacuum()
    la = math.log(alpha_mag)
    single = []
    for n in range(n_max + 1):
        lm = -0.5 * alpha_mag**2 + n * la - 0.5 * math.lgamma(n + 1)
        single.append(lm)
        if n > alpha_mag**2 and math.exp(lm) < tol:
            break
    amps = {}
    logtol = math.log(tol)
    for npl, lp in enumerate(single):
        for nmi, lm in enumerate(single):
            if lp + lm < logtol:
                continue
            amps[CircularOccupation(npl, nmi)] = math.exp(lp + lm) * np.exp(-1j * (npl - nmi) * phi0)
    return TwoModeState(amps, {"captured_power": None})


def state_to_lg_coeffs(state: TwoModeState, w0: float = 1.0) -> SpectralDecomposition:
    """LG coefficients C_{p,l} = (-1)^p a_{n+,n-}, p = min(n+, n-), l = n+ - n-."""
    entries = {}
    for occ, a in state.amplitudes.items():
        idx = occ.mode
        entries[idx] = -a if idx.p % 2 else a
    return SpectralDecomposition(entries, w0)


def lg_coeffs_to_state(decomp: SpectralDecomposition) -> TwoModeState:
    amps = {}
    for idx, c in decomp.entries.items():
        amps[CircularOccupation.from_mode(idx)] = -c if idx.p % 2 else c
    return TwoModeState(amps)


def position_amplitude(occ: CircularOccupation, z_re: float, z_im: float) -> complex:
    """<z, zbar | n+, n-> in the complex coordinate z = z_re + i z_im."""
    z = complex(z_re, z_im)
    zz = abs(z) ** 2
    npl, nmi = occ.n_plus, occ.n_minus
    if npl >= nmi:
        lo, hi, w = nmi, npl, z
    else:
        lo, hi, w = npl, nmi, z.conjugate()
    a = hi - lo
    norm = math.exp(0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1))) / math.sqrt(math.pi)
    sign = -1.0 if lo % 2 else 1.0
    return complex(sign * norm * w**a * math.exp(-0.5 * zz) * laguerre(lo, a, zz))


# ---------------------------------------------------------------------------
# displaced beam through the plate
# ---------------------------------------------------------------------------


def _closed_form_spp(state: TwoModeState, q: float, trunc: OperatorTruncation, dislocation_angle: float):
    """Plate action through the Laguerre coupling kernel, sector by sector."""
    n_p, n_m, amp, l_cap = _window(state, trunc)
    ks, ws = spp_weights(q, trunc.k_max, dislocation_angle)
    out = np.zeros((trunc.m_max + 1, 2 * l_cap + 1), dtype=complex)
    by_L = {}
    for a, b, c in zip(n_p, n_m, amp):
        p = int(min(a, b))
        by_L.setdefault(int(a - b), {})[p] = c
    signs = np.where(np.arange(trunc.m_max + 1) % 2, -1.0, 1.0)
    for L, col in by_L.items():
        p_top = max(col)
        vec = np.zeros(p_top + 1, dtype=complex)
        for p, c in col.items():
            vec[p] = -c if p % 2 else c
        for k, w in zip(ks, ws):
            Lp = L + int(k)
            if abs(Lp) > l_cap:
                continue
            block = kernels.coupling_matrix(abs(L), abs(Lp), p_top, trunc.m_max)
            out[:, Lp + l_cap] += w * signs * (vec @ block)
    captured = float(np.sum(np.abs(out) ** 2))
    tail = state.norm - captured
    info = {"captured_power": captured, "tail": tail, "dropped_terms": 0, "k_max": trunc.k_max,
            "m_max": trunc.m_max, "l_cap": l_cap}
    if tail > trunc.tail_tol:
        raise TruncationOverflowError(
            f"truncated expansion lost {tail:.3g} of the norm (tail_tol={trunc.tail_tol:g})", tail=tail)
    return _dense_to_state(out, l_cap, info)


def displaced_spp_quantum(q: float, alpha_mag: float, phi0: float = 0.0,
                          trunc: OperatorTruncation | None = None, method: str = "operator",
                          dislocation_angle: float = 0.0, coherent_tol: float = 1e-16) -> TwoModeState:
    """Coherent state D(alpha_+) D(alpha_-)|0,0> sent through the plate.

    ``method="operator"`` applies the ladder-operator expansion term by term;
    ``method="closed"`` resums each harmonic into the Laguerre coupling
    kernel.  The two must agree.
    """
    trunc = trunc or OperatorTruncation()
    state = displace_vacuum(alpha_mag, phi0, tol=coherent_tol)
    if method == "operator":
        return apply_spp_operator(state, q, trunc, dislocation_angle)
    if method == "closed":
        return _closed_form_spp(state, q, trunc, dislocation_angle)
    raise InvalidParameterError(f"unknown method {method!r}")


def truncation_from_policy(policy: TruncationPolicy, tail_tol: float = 0.1) -> OperatorTruncation:
    """Operator cutoffs matching a classical truncation window."""
    k = policy.k_max
    return OperatorTruncation(k_max=k, m_max=max(policy.p_max, k), tail_tol=tail_tol)
