"""Numerical tolerances shared across the package.

All values are absolute unless noted. Region inequalities are stored with
unit row normals, so the geometric tolerances below are distances in
parameter space.
"""

SYM_TOL = 1e-10  # relative to max |A_ij|
PD_TOL = 1e-12  # relative to the largest diagonal entry
FACTOR_TOL = 1e-10
SOLVE_TOL = 1e-10
LP_TOL = 1e-9
DIM_TOL = 1e-7
FEAS_TOL = 1e-8
ACT_TOL = 1e-8
DUAL_TOL = 1e-8
KKT_TOL = 1e-7
OBJ_TOL = 1e-9
DUALITY_TOL = 1e-6
BND_TOL = 1e-7
CONT_TOL = 1e-7
LICQ_TOL = 1e-9  # relative pivot threshold for the rank test on G_E
FD_STEP = 1e-5
