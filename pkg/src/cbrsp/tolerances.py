"""Numerical tolerances shared by every module."""

#: algebraic identities (normalization, unitarity, completeness)
ATOL = 1e-12
#: smallest eigenvalue still accepted as positive semidefinite
PSD_FLOOR = 1e-10
#: a forced measurement outcome below this probability is impossible
PROB_FLOOR = 1e-15
#: simulation vs closed-form comparison
COMPARE_TOL = 1e-9
