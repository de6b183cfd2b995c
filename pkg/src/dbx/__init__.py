"""Darboux-frame invariants of surface curves and constant-breadth partner curves."""

__version__ = "0.1.0"

from .breadth import (BreadthCase, BreadthPair, CaseKind, CoefficientTrajectory, asymptotic_closed_form_i,
                      asymptotic_closed_form_ii, construct_partner, geodesic_closed_form_i, geodesic_closed_form_ii,
                      integrate_system, principal_closed_form_helix, principal_closed_form_planar_or_helix,
                      system_rhs)
from .catalog import curve_on_surface, surface_from_id
from .classify import CurveClass, classify_curve
from .frames import (SampledCurve, darboux_frame, darboux_from_abstract, frenet_apparatus, sample_curve)
from .geom import CurveDef, MonotoneTable, arc_length_table, differentiate, theta_table
from .verify import (VerificationReport, check_breadth_constancy, check_frame_identities, check_m1f_constraint,
                     check_ode_residual, check_tangent_opposition, verify_pair)

__all__ = [
    "BreadthCase", "BreadthPair", "CaseKind", "CoefficientTrajectory", "CurveClass", "CurveDef", "MonotoneTable",
    "SampledCurve", "VerificationReport", "arc_length_table", "asymptotic_closed_form_i", "asymptotic_closed_form_ii",
    "check_breadth_constancy", "check_frame_identities", "check_m1f_constraint", "check_ode_residual",
    "check_tangent_opposition", "classify_curve", "construct_partner", "curve_on_surface", "darboux_frame",
    "darboux_from_abstract", "differentiate", "frenet_apparatus", "geodesic_closed_form_i", "geodesic_closed_form_ii",
    "integrate_system", "principal_closed_form_helix", "principal_closed_form_planar_or_helix", "sample_curve",
    "surface_from_id", "system_rhs", "theta_table", "verify_pair",
]
