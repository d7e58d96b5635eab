"""Numerical tolerances and fixed names shared across the package."""

# State invariants (norms, traces, orthonormality of measurement bases).
STATE_ATOL = 1e-10
# Pure matrix algebra (unitarity of protocol gates, operator identities).
ALGEBRA_ATOL = 1e-12
# Branches below this probability are treated as impossible and never sampled.
GHOST_PROBABILITY = 1e-14
# User-supplied states further than this from unit norm are renormalised with a warning.
RENORMALISE_WARN = 1e-9

# C, A, B, E, m is the largest register any protocol or attack needs.
MAX_QUBITS = 5

LOGGER_NAME = "rabin_qot"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

ENV_SEED = "QOT_SEED"
ENV_LOG_LEVEL = "QOT_LOG_LEVEL"
ENV_LOG_DIR = "QOT_LOG_DIR"
ENV_WORKERS = "QOT_WORKERS"
ENV_STRICT_GATES = "QOT_STRICT_GATES"

EXIT_OK = 0
EXIT_DISAGREEMENT = 1
EXIT_USAGE = 2
