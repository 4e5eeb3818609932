"""Quasiconformal deformations of Laplacians and their determinants.

Genus-1 testbed: Beltrami solvers on tori and half planes, the holomorphic
operator family ``Delta_{mu,nu}``, matrix and zeta determinants, and cone
potentials of mixed 2-forms.
"""
__version__ = "0.1.0"

from .grid import LatticeSpec, CompactWindow, TorusGrid, RectGrid, SampledField, make_torus_grid, make_rect_grid  # noqa: E402,F401
from .beltrami import BeltramiCoefficient, QuasiconformalMap, solve_torus, solve_wmu, solve_fmn  # noqa: E402,F401
from .operators import HoloLaplacian, build_delta_mn, delta_mn, pullback_laplacian, symbol_report  # noqa: E402,F401
from .determinant import discretize, eigen_spectrum, log_det_branch, zeta_logdet_torus  # noqa: E402,F401
from .oracles import dedekind_eta, torus_logdet_exact, torus_logdet_extension, torus_eigenvalues  # noqa: E402,F401
