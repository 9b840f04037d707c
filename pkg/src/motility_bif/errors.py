"""Error taxonomy shared by the pipeline and the command line."""


class MotilityError(Exception):
    """Base class; the CLI prints the subclass name as the taxonomy tag."""


class DomainError(MotilityError, ValueError):
    pass


class BracketError(MotilityError, ValueError):
    pass


class EvaluationError(MotilityError, ArithmeticError):
    pass


class SingularSystemError(MotilityError, ArithmeticError):
    def __init__(self, message, sigma_min=None):
        super().__init__(message)
        self.sigma_min = sigma_min


class NoSteadyStateError(MotilityError):
    pass


class PoleError(MotilityError):
    pass


class InvalidDiffusionError(MotilityError):
    pass


class SubcriticalError(MotilityError):
    pass


class NoBifurcationError(MotilityError):
    pass


class DegenerateError(MotilityError):
    pass


class TransversalityError(MotilityError):
    pass


class NoTransitionError(MotilityError):
    def __init__(self, message, endpoint_values=None):
        super().__init__(message)
        self.endpoint_values = endpoint_values


class EmptySweepError(MotilityError):
    pass
