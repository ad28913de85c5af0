"""Siegel upper half-space geometry and numerical certification of the
collapse of the Weil-Petersson metric near the boundary of A_g."""

from .errors import GeometryError, NumericalError, ValidationError
from .siegel import SiegelPoint, SymplecticMat, TangentVec, act, push_forward, siegel_distance, wp_norm_sq
from .reduction import in_siegel_set, reduce_sl2, reduce_spd, siegel_coords
from .tropical import trwp_distance, trwp_geodesic
from .horo import BasePoint, collapse_bounds, fiber_diameter_upper, fiber_path_length, project
from .collapse import DegenerationSpec, Profile, collapse_run, limit_compare, make_sequence, rate_fit

__version__ = "0.1.0"
