from cropd.exceptions import CropdError


class AttackError(CropdError):
    """Base exception for attack errors"""

    pass


class InvalidThreatModelError(AttackError):
    """Raised when a threat model has an invalid budget, norm or step schedule"""

    pass
