"""
Shared constants for weightlab.
"""

# Trend verdicts over refinement depths or radii.
PLATEAU = "plateau"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

# Membership verdicts.
CERTIFIED_YES = "certified-yes"
CERTIFIED_NO = "certified-no-at-scale"
UNDECIDED = "inconclusive"

# TrendReport decision rule. The log rule catches growth like log N that
# never reaches the 10x bar inside a handful of depths.
PLATEAU_RELATIVE_SPREAD = 0.05
DIVERGENCE_MIN_SLOPE = 0.1
DIVERGENCE_MIN_GROWTH = 10.0
LOG_DIVERGENCE_MIN_STEP = 0.02
LOG_DIVERGENCE_PERSISTENCE = 0.9
TREND_MIN_POINTS = 4

# Quadrature for cells without a closed-form antiderivative.
QUAD_RELATIVE_TOLERANCE = 1e-10
QUAD_SUBDIVISION_LIMIT = 200
QUAD_SINGULAR_SHELLS = 40

# Reverse Hölder search: s = 1 + 16 * 2**-j until s - 1 drops below the floor.
RH_CONSTANT = 2.0
RH_LADDER_SPAN = 16.0
RH_LADDER_FLOOR = 1e-4

# Self-improvement acceptance: [w^s] <= factor * [w]^s.
SELF_IMPROVE_FACTOR = 4.0

# Rubio de Francia iteration.
RDF_TOLERANCE = 0.05
RDF_MAX_TERMS = 64
NORM_SAFETY_FACTOR = 2.0
NORM_TRIALS = 100

# Exponent and scale ladders.
LP_LADDER = (1.01, 1.1, 1.5, 2.0, 4.0)
GLOBAL_S_LADDER = (1.01, 1.1, 1.25, 1.5, 2.0, 3.0)
WEAK_P_LADDER = (1.5, 2.0, 3.0, 4.0, 6.0)
LOCAL_DEPTHS = (8, 9, 10, 11, 12)
GLOBAL_RADII = tuple(2.0 ** m for m in range(2, 11))
CELLS_PER_UNIT_LOG2 = 4
GLOBAL_PROBE_POINT = 0.5
RADIAL_PROBE_MIN_RADIUS = 1.0
RADIAL_SCALE_LADDER = (8, 16, 32, 64, 128, 256, 512)

# Global A_p constants: fixed depth on [-2^m, 2^m]; A_p constants of power-type
# weights are dilation invariant, so large m probes behaviour at infinity.
GLOBAL_SCALE_EXPONENTS = (4, 8, 16, 32, 64, 128)
GLOBAL_DEPTH = 10
GLOBAL_CERTIFICATE_RADIUS = 64.0
POWER_R_LADDER = (1.0, 0.5, 0.25, 0.125)
# Depths for trends whose cells fall back to quadrature.
QUADRATURE_DEPTHS = (6, 7, 8, 9)
LOG_SCALE_LADDER = (16, 64, 256, 1024, 4096, 16384)

# Weak-L^p levels spanning fewer cells are below grid resolution.
WEAK_RESOLVED_CELLS = 64

# Tolerances for certificates and chains.
CERTIFICATE_TOLERANCE = 1e-12
SANDWICH_TOLERANCE = 1e-9
WEIGHTED_BOUND_SLACK = 1e-9

# Hardy-space tolerances.
HARDY_DEFAULT_M = 12
HARDY_TAIL_ENERGY = 1e-12
HARDY_DEFECT_TOLERANCE = 1e-2
# Most of the energy on negative indices: not analytic at any resolution.
HARDY_REJECT_DEFECT = 0.5
HARDY_UNDERFLOW_FLOOR = 1e-290

DEFAULT_SEED = 0
DEFAULT_DEPTH = 10
DEFAULT_OUTPUT_DIR = "out"
CONFIG_FILE_NAME = "weightlab.toml"
LOG_FILE_NAME = "weightlab_log.json"
MAX_LOG_ENTRIES = 500
MANIFEST_FILE = "written_files.txt"

SCENARIO_NAMES = (
    "example1",
    "power-weight",
    "spike",
    "global-maxmin",
    "global-power",
    "weak-counterexample",
    "constant-one",
    "hardy-outer",
    "hardy-membership",
)
