class CropdError(Exception):
    """Base exception for every error raised by the laboratory."""

    pass
