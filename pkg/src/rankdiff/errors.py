class RankDiffError(Exception):
    pass


class ConditionViolated(RankDiffError):
    """No stationary spacing law: some alpha_k <= 0.

    ``index`` is the 1-based k of the first failing alpha_k.
    """

    def __init__(self, index, value, message=None):
        self.index = index
        self.value = value
        if message is None:
            message = (
                f"stationarity condition alpha_k > 0 for all 1 <= k <= n-1 fails "
                f"at k={index} (alpha_k={value:.6g})"
            )
        super().__init__(message)


class InvalidBeta(RankDiffError, ValueError):
    pass


class DomainError(RankDiffError, ValueError):
    pass


class ModelMismatch(RankDiffError):
    pass
