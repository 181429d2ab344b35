class InvalidParameterError(ValueError):
    pass


class InvalidInputError(ValueError):
    pass


class SolverDivergenceError(RuntimeError):
    pass


class SpectralNonConvergenceWarning(RuntimeWarning):
    pass
