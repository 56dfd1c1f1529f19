"""Numerics for the slice of cubic polynomials f(z) = lam z + a z^2 + z^3 with a
parabolic fixed point of multiplier lam = exp(2 pi i p/q) at the origin."""

from .algebra import DensePolynomial, RootSet, TruncatedSeries, poly_roots, series_compose, series_self_iterate
from .angles import (RotationCycle, angle, angle_preimages, enumerate_cycles, orbit_under_mul,
                     reflect_cycle, theta_m)
from .coords import (BasinAddress, BoettcherMap, FatouChart, PetalChain, RayTrace, boettcher_eval,
                     extend_fatou_address, extrapolate_landing, fatou_attracting, green_potential, invert_address_in_model,
                     trace_dynamical_ray, trace_parameter_ray)
from .dynamics import (Family, FamilyParam, Slice, classify_double_parabolic_type, convert_param,
                       critical_points, double_parabolic_params, eval_family, parabolic_coefficient)
from .locus import (CoveringSample, LocusImage, ParamClass, SpecialCurveApprox, classify_param,
                    covering_eval, covering_fibers, psi_parametrize, render_locus, special_curve)

__version__ = "0.1.0"
