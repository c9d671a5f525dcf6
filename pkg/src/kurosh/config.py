"""Budget constants shared by the oracle, the checks and the campaign."""

MAX_L = 8           # syllable budget for subgroup enumeration
DEFAULT_L = 8
DEFAULT_R = 3       # tree-ball radius
MAX_R = 4
BALL_CAP = 200_000  # element cap before a ball enumeration is flagged truncated
WORD_CAP = 20_000   # cap on exhaustive normal-form lists used in agreement tests
