# Default parameters for the VSSEA toolkit. No measured plant data is bundled,
# so every value here is illustrative and overridable from a config file.

import math

# Plant (gear-side convention: J_e = N^2 J_me + J_g, tau_se = tau_s)
DEFAULT_J_L = 0.05
DEFAULT_B_L = 0.02
DEFAULT_J_E = 0.5
DEFAULT_B_E = 0.1
DEFAULT_K = 100.0
DEFAULT_GEAR_RATIO = 100.0
DEFAULT_J_MS = 0.01
DEFAULT_B_MS = 0.005
DEFAULT_UPSILON_TAU = 0.2
DEFAULT_UPSILON_K = 0.1  # Upsilon_tau / 2 makes stiffness the deflection derivative of torque
DEFAULT_THETA_MS_MIN = 0.02

# Stiffness-motor operating point; Upsilon_k / theta_ms^3 == DEFAULT_K here
DEFAULT_STIFFNESS_POSITION = 0.1

# Position controllers
DEFAULT_POLE = -4.0  # repeated four times; settles a unit step in about 2.3 s
DEFAULT_LQR_Q = (1.0, 0.1, 0.01, 0.001)
DEFAULT_LQR_R = 1.0

# Sliding mode: manifold poles triple at -4 -> s^3 + 12 s^2 + 48 s + 64
DEFAULT_SMC_S = (64.0, 48.0, 12.0)
DEFAULT_SMC_RHO = 200.0
DEFAULT_SMC_EPSILON = 0.5

# Stiffness-modulation loop
DEFAULT_STIFFNESS_KP = 4.0
DEFAULT_STIFFNESS_KD = 0.4
DEFAULT_STIFFNESS_DOB_BANDWIDTH = 50.0

# Second-order disturbance observer
DEFAULT_OBSERVER_BANDWIDTH = 100.0

# Reference
DEFAULT_REFERENCE_AMPLITUDE = 1.0

# Disturbance profile: "nonlinear, time-varying", active between 3 and 10 s
DEFAULT_DIST_LINK_BIAS = 0.5
DEFAULT_DIST_LINK_AMPLITUDE = 0.3
DEFAULT_DIST_LINK_FREQUENCY = 2.0 * math.pi * 0.5
DEFAULT_DIST_MOTOR_BIAS = 0.0
DEFAULT_DIST_MOTOR_AMPLITUDE = 0.2
DEFAULT_DIST_MOTOR_FREQUENCY = 2.0 * math.pi * 1.0
DEFAULT_DIST_T_ON = 3.0
DEFAULT_DIST_T_OFF = 10.0

# Simulation
DEFAULT_STEP = 1e-3  # 1 ms sampling of the real-time rig
DEFAULT_DURATION = 12.0
DEFAULT_DECIMATION = 10

# Numerics
RANK_TOLERANCE = 1e-10  # on singular values of the max-norm scaled matrix
LYAPUNOV_RESIDUAL_TOL = 1e-9
CARE_RESIDUAL_TOL = 1e-8
CARE_MAX_ITERATIONS = 50
ROUTH_EPSILON = 1e-9  # substitute for a zero leading entry in a Routh row

# Metrics
SETTLING_BAND = 0.02
STEADY_STATE_FRACTION = 0.1

# CSV
CSV_FLOAT_DIGITS = 17
TRACE_COLUMNS = (
    "t", "ref", "theta_l", "dtheta_l", "theta_e", "dtheta_e", "u",
    "dist_l_true", "dist_e_true", "dist_l_est", "dist_e_est",
    "sigma", "e1", "e2", "e3", "e4",
)
