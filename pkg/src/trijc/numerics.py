"""Central numerical tolerance profile.

Every module reads its tolerances from here so the whole package can be
retuned in one place.
"""

# Matrix property checks
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-10

# Dynamics
UNITARITY_TOL = 1e-12
TRUNCATION_TOL = 1e-12

# Entanglement criteria: an inequality counts as violated only when the
# left side exceeds the right side by more than this slack.
VIOLATION_TOL = 1e-9

# Witness SDP contract
SDP_GAP_TOL = 1e-7
SDP_FEAS_TOL = 1e-8
GENUINE_NEGATIVITY_FLOOR = 1e-6
