"""Special functions used by the parameter programs.

Lambert W follows the usual recipe: a branch-point series or asymptotic seed,
then Halley iterations until the step drops below 0.7e-16 * (2 + |w|).
"""

import logging
import math
from enum import Enum
from typing import Union

from flblab.exceptions import DomainError

logger = logging.getLogger(__name__)

INV_E = math.exp(-1.0)
# Slack for inputs that land a rounding error left of -1/e.
_BRANCH_POINT_SNAP = 4e-16
_MAX_ITERATIONS = 100


class LambertBranch(str, Enum):
    PRINCIPAL = "principal"
    MINUS_ONE = "minus_one"


def _halley(x: float, w: float) -> float:
    for _ in range(_MAX_ITERATIONS):
        ew = math.exp(w)
        f = w * ew - x
        w1 = w + 1.0
        if w1 == 0.0:
            break
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if abs(dw) < 0.7e-16 * (2.0 + abs(w)):
            break
    return w


def lambert_w(branch: Union[LambertBranch, str], x: float) -> float:
    """Real Lambert W on the principal or the -1 branch.

    Returns w with w * exp(w) = x; the principal branch gives w >= -1 on
    x >= -1/e, the minus_one branch gives w <= -1 on -1/e <= x < 0.
    """
    branch = LambertBranch(branch)
    if not math.isfinite(x):
        raise DomainError(f"lambert_w needs a finite argument, got {x!r}")
    if x < -INV_E:
        if x < -INV_E - _BRANCH_POINT_SNAP:
            raise DomainError(f"lambert_w undefined below -1/e, got {x!r}")
        x = -INV_E
    if abs(x + INV_E) <= _BRANCH_POINT_SNAP:
        return -1.0

    if branch is LambertBranch.PRINCIPAL:
        if x == 0.0:
            return 0.0
        if abs(x + INV_E) <= 1.5:
            w = math.sqrt(max(0.0, 2.0 * math.e * x + 2.0)) - 1.0
        else:
            lx = math.log(x)
            w = lx - math.log(lx)
        return max(_halley(x, w), -1.0)

    if x >= 0.0:
        raise DomainError(f"minus_one branch needs -1/e <= x < 0, got {x!r}")
    if x < -0.25:
        p = -math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    return min(_halley(x, w), -1.0)


def lambert_w_minus_one_log(log_neg_x: float) -> float:
    """W_{-1}(x) given only log(-x).

    Used when x = -exp(L) underflows; solves w + log(-w) = L for w <= -1.
    """
    if log_neg_x > -1.0:
        if log_neg_x > -1.0 + 1e-15:
            raise DomainError(f"minus_one branch needs log(-x) <= -1, got {log_neg_x!r}")
        return -1.0
    if log_neg_x >= -2.0:
        return lambert_w(LambertBranch.MINUS_ONE, -math.exp(log_neg_x))
    w = log_neg_x - math.log(-log_neg_x)
    for _ in range(_MAX_ITERATIONS):
        f = w + math.log(-w) - log_neg_x
        dw = f / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            break
    return w


def harmonic(D: int) -> float:
    """H(D) = 1 + 1/2 + ... + 1/D."""
    if D < 1:
        raise ValueError(f"harmonic number needs D >= 1, got {D}")
    return math.fsum(1.0 / k for k in range(1, int(D) + 1))


def _check_rho_args(z: float, k: int) -> None:
    if not 0.0 <= z < 1.0:
        raise ValueError(f"rho needs 0 <= z < 1, got z={z!r}")
    if k < 0:
        raise ValueError(f"rho needs k >= 0, got k={k}")


def rho_product(z: float, k: int) -> float:
    """prod_{l=1..k} (1 - z/l); the empty product is 1."""
    _check_rho_args(z, k)
    return math.prod(1.0 - z / l for l in range(1, k + 1))


def log_rho_product(z: float, k: int) -> float:
    """log of rho_product, summed term by term for long products."""
    _check_rho_args(z, k)
    return math.fsum(math.log1p(-z / l) for l in range(1, k + 1))


def rho_partial_sum(z: float, d: int) -> float:
    """sum_{l=0..d-1} rho_product(z, l)."""
    _check_rho_args(z, d)
    total = 0.0
    running = 1.0
    for l in range(d):
        if l > 0:
            running *= 1.0 - z / l
        total += running
    return total


def rho_identity_rhs(z: float, d: int) -> float:
    """Closed form of rho_partial_sum: d / (1 - z) * rho_product(z, d)."""
    return d / (1.0 - z) * rho_product(z, d)
