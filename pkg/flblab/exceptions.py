"""Error types raised by the lab.

All of them are ValueErrors so callers that only care about bad input can
catch the builtin.
"""

from typing import Optional


class FlbLabError(ValueError):
    """Base class for lab errors."""


class CapacityViolation(FlbLabError):
    """A job was committed to a server with no free unit in enforcing mode."""

    def __init__(self, job: int, server: int, time: Optional[float] = None):
        self.job = job
        self.server = server
        self.time = time
        where = f" at t={time!r}" if time is not None else ""
        super().__init__(f"job {job} assigned to full server {server}{where}")


class PreconditionViolated(FlbLabError):
    """An analytic checker was asked about a point outside its domain."""


class CapacityTooSmall(FlbLabError):
    """No parameters satisfy the finite-capacity feasibility constraint."""

    def __init__(self, R: float, D: float, c_min: float, detail: str = ""):
        self.R = R
        self.D = D
        self.c_min = c_min
        msg = f"c_min={c_min} too small for R={R}, D={D}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class DomainError(FlbLabError):
    """Argument outside the domain of a special function branch."""


class TooLarge(FlbLabError):
    """Exact computation requested on an instance beyond its size limit."""


class NegativeAvailability(FlbLabError):
    """A trace assigned a job to a server whose projected availability was not positive."""

    def __init__(self, job: int, server: int, availability: float):
        self.job = job
        self.server = server
        self.availability = availability
        super().__init__(
            f"job {job} on server {server} saw availability {availability:.6g}"
        )
