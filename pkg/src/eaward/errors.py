"""Shared exception root so callers can catch any library error in one clause."""


class EawardError(Exception):
    """Base class for every error this package raises on purpose."""
