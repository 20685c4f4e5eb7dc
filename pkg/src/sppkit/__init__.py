"""Spiral phase plate diffraction of Gaussian beams, computed two ways.

The classical route decomposes fields into Laguerre-Gaussian modes with
closed-form coefficients; the quantum route applies the plate as a phase
operator built from rational powers of two-mode ladder operators.  The
:mod:`sppkit.oracle` module checks both against direct quadrature.
"""

from .classical import (SpectralDecomposition, TruncationPolicy, bessel_azimuthal_spectrum,
                        displaced_gaussian_coeffs, displaced_spp_coeffs, gaussian_spp_coeffs,
                        spp_coupling_coeff)
from .errors import (DegenerateLoopError, GammaOverflowError, GammaPoleError, InvalidParameterError,
                     NonIntegralTargetError, NotConvergedError, SppkitError, TruncationOverflowError)
from .oracle import (QuadratureSpec, equivalence_report, kernel_quadrature, overlap_coefficient,
                     overlap_coefficients)
from .paraxial import (BeamGeometry, FieldGrid, ModeIndex, SppSpec, lg_mode, spp_charge, synthesize,
                       topological_charge)
from .quantum import (CircularOccupation, OperatorTruncation, TwoModeState, apply_phase_harmonic,
                      apply_spp_operator, displace_vacuum, displaced_spp_quantum, phase_op_matrix_element,
                      position_amplitude, rational_ladder_an, rational_ladder_na, state_to_lg_coeffs)

__version__ = "0.1.0"

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, type(__import__("sys")))]
