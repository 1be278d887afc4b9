"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError`, numerical ones from
:class:`NumericalError`; the CLI maps these to exit codes 2 and 3.
"""


class FracqdError(Exception):
    pass


class ConfigError(FracqdError):
    pass


class ParseError(ConfigError):
    def __init__(self, line, key, reason):
        self.line = line
        self.key = key
        self.reason = reason
        super().__init__(f"line {line}: {key}: {reason}" if key else f"line {line}: {reason}")


class ValidationError(ConfigError):
    def __init__(self, key, reason, line=None):
        self.key = key
        self.reason = reason
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {reason}")


class NumericalError(FracqdError):
    pass


# mlf
class NonConvergent(NumericalError):
    pass


class ContourFailure(NumericalError):
    pass


class MlfOverflow(NumericalError):
    pass


# spectral / quadrature
class EigenSolveFailure(NumericalError):
    pass


class GridMismatch(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


# caputo
class LinearSolveFailure(NumericalError):
    pass


class StabilityGuardTripped(NumericalError):
    pass


class InsufficientPoints(NumericalError):
    pass


# comb
class DivergentTail(NumericalError):
    pass


class NonpositiveEigenvalueWarning(UserWarning):
    pass


# laplace
class OnBranchCut(NumericalError):
    pass


class RootFindFailure(NumericalError):
    pass


# hyperbolic
class ExtrapolationBeyondProfile(NumericalError):
    pass


class IntegralDivergent(NumericalError):
    pass
