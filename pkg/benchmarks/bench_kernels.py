"""Timing of the numba kernels against their pure-numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py [--repeat N] [--quick]``.
Every pair is also checked for agreement before it is timed.
"""

import argparse
import time

import numpy as np

from sppkit import _accel, kernels
from sppkit.classical import TruncationPolicy, gaussian_spp_coeffs
from sppkit.paraxial import BeamGeometry, _grouped_coefficients
from sppkit.quantum import displace_vacuum, spp_weights


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def synthesis_case(n):
    d = gaussian_spp_coeffs(2.5, TruncationPolicy(40, 40))
    beam = BeamGeometry(1.0)
    ls, coefs = _grouped_coefficients(d.entries, 0.0, beam)
    x = np.linspace(-3, 3, n)
    X, Y = np.meshgrid(x, x)
    args = ((2 * (X * X + Y * Y)).ravel(), np.arctan2(Y, X).ravel(), ls, coefs)
    return f"synthesis {n}x{n}, {coefs.size} modes", kernels.synthesize_modes_numba, kernels.synthesize_modes_numpy, args


def operator_case(k_max, m_max):
    st = displace_vacuum(1 / np.sqrt(2), 0.3)
    n_p, n_m, amp = st.arrays()
    ks, ws = spp_weights(2.5, k_max)
    l_cap = int(np.abs(n_p - n_m).max()) + k_max
    args = (n_p, n_m, amp, ks, ws, m_max, l_cap)
    return (f"operator engine k_max={k_max} m_max={m_max}, {amp.size} inputs",
            kernels.apply_harmonics_numba, kernels.apply_harmonics_numpy, args)


def coupling_case(a, b, n):
    return f"coupling matrix |l|={a} |k|={b} {n + 1}x{n + 1}", kernels.coupling_matrix_numba, \
        kernels.coupling_matrix_numpy, (a, b, n, n)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    small = args.quick
    cases = [
        synthesis_case(128 if small else 512),
        operator_case(10 if small else 40, 20 if small else 60),
        coupling_case(3, 17, 20 if small else 60),
    ]
    print(f"{'case':<52} {'numba [s]':>10} {'numpy [s]':>10} {'speed-up':>9}")
    for name, fast, slow, fargs in cases:
        a = fast(*fargs)  # also compiles
        b = slow(*fargs)
        a0 = a[0] if isinstance(a, tuple) else a
        b0 = b[0] if isinstance(b, tuple) else b
        scale = max(float(np.abs(b0).max()), 1e-300)
        assert np.abs(a0 - b0).max() <= 1e-10 * scale, f"{name}: paths disagree"
        tf = _best(lambda: fast(*fargs), args.repeat)
        ts = _best(lambda: slow(*fargs), args.repeat)
        print(f"{name:<52} {tf:>10.4f} {ts:>10.4f} {ts / tf:>8.1f}x")


if __name__ == "__main__":
    main()
