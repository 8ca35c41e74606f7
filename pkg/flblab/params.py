"""Parameter selection for FLB.

Each solver returns a SolvedParams whose ``ratio_bound`` is the program
objective at the returned knobs, and every result is re-checked against the
matching feasibility condition before it leaves this module.
"""

import logging
import math
from typing import Callable, Optional

from scipy import optimize

from flblab.config import settings
from flblab.exceptions import CapacityTooSmall
from flblab.invariants import (
    Verdict,
    check_feasibility_condition_integer,
    check_feasibility_condition_real,
    real_condition_rhs,
)
from flblab.models import INFINITY, DurationMode, Instance, Regime, SolvedParams
from flblab.special import harmonic, lambert_w_minus_one_log, log_rho_product

logger = logging.getLogger(__name__)

CASE_THRESHOLD = math.e - 1.0
_CEIL_TOL = 1e-9
# Relative headroom on the penalty floor so Psi(0) strictly exceeds R*D.
_FLOOR_SLACK = 1e-9
_SCAN_STEPS = 200
_SCAN_FACTOR = 1.25


def capacity_kappa(beta: float, c_min: float) -> float:
    """1 + beta(beta^(1/c_min) - 1); equals 1 when c_min is infinite."""
    if math.isinf(c_min):
        return 1.0
    return 1.0 + beta * math.expm1(math.log(beta) / c_min)


def ratio_bound_int(eta: float, beta: float, c_min: float = INFINITY) -> float:
    return math.log(beta) * (1.0 + eta * capacity_kappa(beta, c_min))


def ratio_bound_real(gamma: int, eta: float, beta: float, c_min: float = INFINITY) -> float:
    if math.isinf(gamma) or gamma < 2:
        raise ValueError(f"real-duration bound needs an integer gamma >= 2, got {gamma}")
    kappa = capacity_kappa(beta, c_min)
    return gamma / (gamma - 1) * math.log(beta) * (1.0 + gamma * eta * kappa)


def _check_bounds(R: float, D: float) -> None:
    if R < 1 or D < 1:
        raise ValueError(f"R and D must be at least 1, got R={R}, D={D}")


def _large_cap_regime(R: float, D: float) -> tuple[Regime, float]:
    L = math.log(max(R, D))
    if L >= CASE_THRESHOLD:
        return Regime.LARGE_CAP_CASE_I, L
    return Regime.LARGE_CAP_CASE_II, L


def _bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    return optimize.bisect(f, lo, hi, xtol=settings.bisect_xtol)


# ---------------------------------------------------------------------------
# Integer durations
# ---------------------------------------------------------------------------


def _lambert_log_beta(R: float, D: int, eta: float, c_min: float) -> Optional[float]:
    """Smallest ln(beta) with exp(-ln beta) + A ln(beta) = rho_D, or None.

    Substituting y = 1/beta turns the binding constraint into
    (-y/A) exp(-y/A) = -(1/A) exp(-rho_D/A); the -1 branch gives the larger
    root y, hence the smaller beta. Works in log space so huge c_min is safe.
    """
    rho_d = math.exp(log_rho_product(R / (R + eta), D))
    A = (R + eta) / (R * c_min)
    log_arg = -rho_d / A - math.log(A)
    if log_arg > -1.0:
        return None
    y = -A * lambert_w_minus_one_log(log_arg)
    return max(1.0, -math.log(y))


def solve_flbopt_int(R: float, D: int, c_min: float = INFINITY) -> SolvedParams:
    _check_bounds(R, D)
    if D != int(D):
        raise ValueError(f"integer program needs an integer D, got {D}")
    D = int(D)
    regime, L = _large_cap_regime(R, D)
    eta = 1.0 / L if regime is Regime.LARGE_CAP_CASE_I else R / CASE_THRESHOLD
    log_beta_inf = max(1.0, -log_rho_product(R / (R + eta), D))

    if math.isinf(c_min):
        log_beta, path = log_beta_inf, "closed_form"
    else:
        regime = Regime.FINITE_CAP
        log_beta, path = _lambert_log_beta(R, D, eta, c_min), "lambert_w"
        if log_beta is None:
            logger.warning(
                "Lambert-W condition fails for R=%s D=%s c_min=%s, trying the c_min=inf beta",
                R,
                D,
                c_min,
            )
            log_beta, path = log_beta_inf, "fallback"

    beta = math.exp(log_beta)
    verdict = check_feasibility_condition_integer(R, D, c_min, eta, beta)
    if verdict is not Verdict.FEASIBLE:
        raise CapacityTooSmall(R, D, c_min, f"integer condition is {verdict.value}")
    solved = SolvedParams(
        gamma=1,
        eta=eta,
        beta=beta,
        ratio_bound=ratio_bound_int(eta, beta, c_min),
        regime=regime,
        path=path,
        c_min=c_min,
    )
    logger.debug("solved integer program: %s", solved)
    return solved


# ---------------------------------------------------------------------------
# Real durations
# ---------------------------------------------------------------------------


def _real_log_beta(R: float, D: float, c_min: float, gamma: int, eta: float) -> float:
    """Smallest u >= 1 with u >= RHS(u); RHS grows with u through the capacity term."""

    def gap(u: float) -> float:
        rhs = real_condition_rhs(R, D, c_min, gamma, eta, u)
        return -math.inf if rhs is None else u - rhs

    rhs_inf = real_condition_rhs(R, D, INFINITY, gamma, eta, 1.0)
    if rhs_inf is None:
        raise CapacityTooSmall(R, D, c_min, "real condition undefined even for c_min=inf")
    lo = max(1.0, rhs_inf)
    if math.isinf(c_min) or gap(lo) >= 0:
        return lo

    hi = lo
    for _ in range(_SCAN_STEPS):
        hi *= _SCAN_FACTOR
        value = gap(hi)
        if value == -math.inf:
            break
        if value >= 0:
            root = _bisect(lambda u: max(gap(u), -1.0), lo, hi)
            step = settings.bisect_xtol
            # The bisection midpoint can sit a hair left of the root.
            while gap(root) < 0 and root < hi:
                root = min(root + step, hi)
                step *= 2.0
            return root
        lo = hi
    raise CapacityTooSmall(R, D, c_min, "no beta satisfies the real-duration condition")


def solve_flbopt_real(R: float, D: float, c_min: float = INFINITY) -> SolvedParams:
    _check_bounds(R, D)
    if R == 1 and D == 1:
        return solve_flbopt_int(1.0, 1, c_min)
    regime, L = _large_cap_regime(R, D)
    if regime is Regime.LARGE_CAP_CASE_I:
        gamma = max(2, math.ceil(L - _CEIL_TOL))
        eta = 1.0 / (L * L)
    else:
        gamma, eta = 2, R / CASE_THRESHOLD
    log_beta = _real_log_beta(R, D, c_min, gamma, eta)
    beta = math.exp(log_beta)
    verdict = check_feasibility_condition_real(R, D, c_min, gamma, eta, beta)
    if verdict is not Verdict.FEASIBLE:
        raise CapacityTooSmall(R, D, c_min, f"real condition is {verdict.value}")
    finite = not math.isinf(c_min)
    return SolvedParams(
        gamma=gamma,
        eta=eta,
        beta=beta,
        ratio_bound=ratio_bound_real(gamma, eta, beta, c_min),
        regime=Regime.FINITE_CAP if finite else regime,
        path="bisection" if finite and log_beta > 1.0 else "closed_form",
        c_min=c_min,
    )


# ---------------------------------------------------------------------------
# Fixed rewards (R = 1)
# ---------------------------------------------------------------------------


def solve_fixed_reward_int(D: int) -> SolvedParams:
    """eta solving prod_{k<=D}(1 - 1/(k(1+eta))) = 1/e, with beta = e."""
    if D < 1 or D != int(D):
        raise ValueError(f"D must be a positive integer, got {D}")
    D = int(D)

    def excess(eta: float) -> float:
        return log_rho_product(1.0 / (1.0 + eta), D) + 1.0

    eta = _bisect(excess, 1e-9, harmonic(D) + 2.0)
    verdict = check_feasibility_condition_integer(1.0, D, INFINITY, eta, math.e)
    if verdict is not Verdict.FEASIBLE:
        # The bisection midpoint can sit a hair left of the root.
        eta += settings.bisect_xtol
    return SolvedParams(
        gamma=1,
        eta=eta,
        beta=math.e,
        ratio_bound=1.0 + eta,
        regime=Regime.FIXED_REWARD_INT,
        path="bisection",
    )


def fixed_reward_real_margin(D: float, eta: float) -> Optional[float]:
    """1 + ln(1 - e^(eta/(1+eta))/(1+eta)) - ln(D)/(1+eta); None when undefined."""
    arg = 1.0 - math.exp(eta / (1.0 + eta)) / (1.0 + eta)
    if arg <= 0:
        return None
    return 1.0 + math.log(arg) - math.log(D) / (1.0 + eta)


def min_fixed_reward_real_eta(D: float) -> float:
    """Smallest eta for which the continuous fixed-reward condition holds."""
    if D < 1:
        raise ValueError(f"D must be at least 1, got {D}")

    def margin(eta: float) -> float:
        value = fixed_reward_real_margin(D, eta)
        return -1.0 if value is None else value

    return _bisect(margin, max(math.log(D), 1e-12), math.log(D) + 3.0)


def solve_fixed_reward_real(D: float) -> SolvedParams:
    if D < 1:
        raise ValueError(f"D must be at least 1, got {D}")
    eta = math.log(D) + 3.0
    margin = fixed_reward_real_margin(D, eta)
    if margin is None or margin < 0:
        raise CapacityTooSmall(1.0, D, INFINITY, f"fixed-reward condition margin {margin}")
    return SolvedParams(
        gamma=INFINITY,
        eta=eta,
        beta=math.e,
        ratio_bound=1.0 + eta,
        regime=Regime.FIXED_REWARD_REAL,
    )


# ---------------------------------------------------------------------------
# Instance-level selection
# ---------------------------------------------------------------------------


def with_penalty_floor(
    solved: SolvedParams, R: float, D: float, c_min: Optional[float] = None
) -> SolvedParams:
    """Raise beta until Psi(0) = eta(beta - 1) exceeds R*D.

    FLB then never scores a full server positively, so every run is capacity
    feasible. The bound is re-evaluated at c_min.
    """
    if math.isinf(solved.gamma):
        raise ValueError("the penalty floor needs a finite gamma")
    c_min = solved.c_min if c_min is None else c_min
    beta = max(solved.beta, 1.0 + R * D / solved.eta * (1.0 + _FLOOR_SLACK))
    if solved.gamma == 1:
        bound = ratio_bound_int(solved.eta, beta, c_min)
    else:
        bound = ratio_bound_real(solved.gamma, solved.eta, beta, c_min)
    return solved.model_copy(
        update={"beta": beta, "ratio_bound": bound, "path": "penalty_floor", "c_min": c_min}
    )


def solve_for_instance(instance: Instance) -> SolvedParams:
    """Solved parameters for the instance's R, D and c_min."""
    R, D, c_min = instance.r_max, instance.d_max, instance.c_min
    if instance.duration_mode is DurationMode.INTEGER:
        solver = solve_flbopt_int
        D = int(D)
    else:
        solver = solve_flbopt_real
    try:
        return solver(R, D, c_min)
    except CapacityTooSmall as e:
        logger.warning("%s; applying the penalty floor", e)
        return with_penalty_floor(solver(R, D, INFINITY), R, D, c_min)
