"""Exception hierarchy shared by the library, the CLI and the report service."""


class OrbaError(Exception):
    """Base class; ``kind`` is the stable tag used in structured error JSON."""

    kind = 'orba'

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        payload = {'error': self.message, 'kind': self.kind}
        if self.details:
            payload['details'] = self.details
        return payload


class ArgumentError(OrbaError):
    kind = 'argument'


class CarrierError(OrbaError):
    kind = 'carrier'


class MismatchError(OrbaError):
    kind = 'mismatch'


class SpaceError(OrbaError):
    kind = 'space'


class NotInSpaceError(OrbaError):
    kind = 'not_in_space'


class CapabilityError(OrbaError):
    kind = 'capability'


class OrderError(OrbaError):
    kind = 'order'


class NoDominatorError(OrbaError):
    kind = 'no_dominator'


class NotIntegrableError(OrbaError):
    kind = 'not_integrable'


class ScheduleError(OrbaError):
    kind = 'schedule'


class UncoverableError(OrbaError):
    kind = 'uncoverable'


class NotInIdealError(OrbaError):
    kind = 'not_in_ideal'


class RangeError(OrbaError):
    kind = 'range'


class ConstructionError(OrbaError):
    """An internal post-assertion failed; always a bug, never bad input."""

    kind = 'construction'


class SolverError(OrbaError):
    kind = 'solver'


class ScenarioError(OrbaError):
    kind = 'scenario'
