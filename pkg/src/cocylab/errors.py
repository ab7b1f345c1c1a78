"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so that reports and the
command line can refer to failures without parsing messages.
"""


class CocylabError(Exception):
    code = "ERROR"


class NotMixingError(CocylabError):
    code = "NOT_MIXING"


class BracketUndefined(CocylabError):
    code = "BRACKET_UNDEFINED"


class NoFixedPoint(CocylabError):
    code = "NO_FIXED_POINT"


class WindowTooSmall(CocylabError):
    code = "WINDOW_TOO_SMALL"


class SingularMatrix(CocylabError):
    code = "SINGULAR"


class RankAmbiguous(CocylabError):
    code = "RANK_AMBIGUOUS"


class RankMismatch(CocylabError):
    code = "RANK_MISMATCH"


class BadContext(CocylabError):
    code = "BAD_CONTEXT"


class CombinatorialBlowup(CocylabError):
    code = "COMBINATORIAL_BLOWUP"


class NotStableRelated(CocylabError):
    code = "NOT_STABLE_RELATED"


class NotUnstableRelated(CocylabError):
    code = "NOT_UNSTABLE_RELATED"


class DimensionMismatch(CocylabError):
    code = "DIMENSION_MISMATCH"


class ConditionAFailed(CocylabError):
    code = "CONDITION_A_FAILED"


class ConditionBFailed(CocylabError):
    code = "CONDITION_B_FAILED"


class UnbunchedInput(CocylabError):
    code = "UNBUNCHED_INPUT"


class MissingOrbitData(CocylabError):
    code = "MISSING_ORBIT_DATA"


class NotCoprime(CocylabError):
    code = "NOT_COPRIME"


class ResidualFail(CocylabError):
    code = "RESIDUAL_FAIL"


class CacheMismatch(CocylabError):
    code = "CACHE_MISMATCH"


class NotConverged(CocylabError):
    code = "NOT_CONVERGED"


class BlockMissing(CocylabError):
    code = "BLOCK_MISSING"


class BadWeights(CocylabError):
    code = "BAD_WEIGHTS"


class ConfigInvalid(CocylabError):
    code = "CONFIG_INVALID"


class ExperimentFailed(CocylabError):
    code = "EXPERIMENT_FAILED"


class UnknownTemplate(CocylabError):
    code = "UNKNOWN_TEMPLATE"


class NoGapWarning(UserWarning):
    """All eigenvalue moduli fall in one cluster; the splitting is trivial."""
