from cropd.exceptions import CropdError


class TheoryError(CropdError):
    """Base exception for theory-check errors"""

    pass


class SingleClassError(TheoryError):
    """Raised when a measurement needs two classes with at least two samples each"""

    pass


class InvalidWitnessParameterError(TheoryError):
    """Raised when the counterexample construction gets an invalid delta, epsilon or size"""

    pass
