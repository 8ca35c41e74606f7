import math
from enum import Enum
from typing import Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

INFINITY = math.inf
# Relative slack when checking entries against the declared R and D.
_BOUND_TOL = 1e-12


class DurationMode(str, Enum):
    INTEGER = "integer"
    REAL = "real"


class CommitMode(str, Enum):
    ENFORCING = "enforcing"
    HYPOTHETICAL = "hypothetical"


class Regime(str, Enum):
    LARGE_CAP_CASE_I = "large_cap_case_i"
    LARGE_CAP_CASE_II = "large_cap_case_ii"
    FINITE_CAP = "finite_cap"
    FIXED_REWARD_INT = "fixed_reward_int"
    FIXED_REWARD_REAL = "fixed_reward_real"


def _normalize_gamma(value: float) -> Union[int, float]:
    if math.isinf(value) and value > 0:
        return INFINITY
    if value < 1 or value != int(value):
        raise ValueError(f"gamma must be a positive integer or inf, got {value!r}")
    return int(value)


class JobArrival(BaseModel):
    """One arriving job with its per-server rewards and durations."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=1, description="Arrival order, starting at 1")
    arrival_time: float = Field(..., ge=0, description="Arrival time t_j")
    compat: tuple[int, ...] = Field(
        default=(), description="Compatible servers N(j), numbered from 1"
    )
    reward: dict[int, float] = Field(
        default_factory=dict, description="Per-period reward r_ij by server"
    )
    duration: dict[int, float] = Field(
        default_factory=dict, description="Occupancy duration d_ij by server"
    )

    @model_validator(mode="after")
    def _check_entries(self) -> "JobArrival":
        servers = set(self.compat)
        if len(servers) != len(self.compat):
            raise ValueError(f"job {self.index}: duplicate server in compat")
        if set(self.reward) != servers or set(self.duration) != servers:
            raise ValueError(
                f"job {self.index}: reward/duration entries must match compat exactly"
            )
        for server in self.compat:
            if self.reward[server] < 1 or self.duration[server] < 1:
                raise ValueError(
                    f"job {self.index}: reward and duration on server {server} "
                    "must be at least 1"
                )
        return self

    def value(self, server: int) -> float:
        """Total reward r_ij * d_ij collected if assigned to server."""
        return self.reward[server] * self.duration[server]

    def end_time(self, server: int) -> float:
        return self.arrival_time + self.duration[server]

    @property
    def server_independent(self) -> bool:
        rewards = {self.reward[s] for s in self.compat}
        durations = {self.duration[s] for s in self.compat}
        return len(rewards) <= 1 and len(durations) <= 1


class Instance(BaseModel):
    """Servers with capacities and the ordered stream of arriving jobs."""

    model_config = ConfigDict(frozen=True)

    servers: tuple[int, ...] = Field(
        ..., min_length=1, description="Capacity c_i of servers 1..n"
    )
    jobs: tuple[JobArrival, ...] = Field(default=(), description="Jobs in arrival order")
    r_max: float = Field(1.0, ge=1, description="Reward bound R")
    d_max: float = Field(1.0, ge=1, description="Duration bound D")
    duration_mode: DurationMode = Field(
        DurationMode.INTEGER, description="Whether durations are integer-valued"
    )

    @field_validator("servers")
    @classmethod
    def _check_capacities(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(c < 1 for c in value):
            raise ValueError("every server capacity must be a positive integer")
        return value

    @model_validator(mode="after")
    def _check_jobs(self) -> "Instance":
        n = len(self.servers)
        r_cap = self.r_max * (1 + _BOUND_TOL)
        d_cap = self.d_max * (1 + _BOUND_TOL)
        previous_time = 0.0
        for position, job in enumerate(self.jobs, start=1):
            if job.index != position:
                raise ValueError(f"job at position {position} has index {job.index}")
            if job.arrival_time < previous_time:
                raise ValueError(f"job {job.index} arrives before job {job.index - 1}")
            previous_time = job.arrival_time
            for server in job.compat:
                if not 1 <= server <= n:
                    raise ValueError(f"job {job.index}: unknown server {server}")
                if job.reward[server] > r_cap:
                    raise ValueError(f"job {job.index}: reward exceeds R={self.r_max}")
                duration = job.duration[server]
                if duration > d_cap:
                    raise ValueError(f"job {job.index}: duration exceeds D={self.d_max}")
                if self.duration_mode is DurationMode.INTEGER and duration != int(
                    duration
                ):
                    raise ValueError(
                        f"job {job.index}: duration {duration} is not an integer"
                    )
        return self

    @classmethod
    def from_jobs(
        cls,
        servers: Sequence[int],
        jobs: Sequence[JobArrival],
        duration_mode: DurationMode = DurationMode.INTEGER,
        r_max: Optional[float] = None,
        d_max: Optional[float] = None,
    ) -> "Instance":
        """Build an instance, taking R and D from the data when not given."""
        if r_max is None:
            r_max = max((max(j.reward.values(), default=1.0) for j in jobs), default=1.0)
        if d_max is None:
            d_max = max(
                (max(j.duration.values(), default=1.0) for j in jobs), default=1.0
            )
        return cls(
            servers=tuple(servers),
            jobs=tuple(jobs),
            r_max=max(1.0, r_max),
            d_max=max(1.0, d_max),
            duration_mode=duration_mode,
        )

    @property
    def num_servers(self) -> int:
        return len(self.servers)

    @property
    def num_jobs(self) -> int:
        return len(self.jobs)

    @property
    def c_min(self) -> int:
        return min(self.servers)

    def capacity(self, server: int) -> int:
        return self.servers[server - 1]

    def server_ids(self) -> range:
        return range(1, len(self.servers) + 1)

    def truncated(self, m: int) -> "Instance":
        """The first m jobs; already-validated jobs are reused as is."""
        return self.model_copy(update={"jobs": self.jobs[:m]})


class FlbParams(BaseModel):
    """FLB knobs: inspection frequency gamma, penalty scale eta and base beta."""

    model_config = ConfigDict(frozen=True)

    gamma: Union[int, float] = Field(
        1, description="Inspection frequency, positive integer or inf"
    )
    eta: float = Field(..., ge=0, description="Penalty scale eta")
    beta: float = Field(..., ge=1, description="Penalty base beta")

    @field_validator("gamma")
    @classmethod
    def _check_gamma(cls, value: float) -> Union[int, float]:
        return _normalize_gamma(value)

    @property
    def continuous(self) -> bool:
        return math.isinf(self.gamma)

    @property
    def log_beta(self) -> float:
        return math.log(self.beta)

    def label(self) -> str:
        gamma = "inf" if self.continuous else str(self.gamma)
        return f"flb:gamma={gamma},eta={self.eta!r},beta={self.beta!r}"


class ServerView(BaseModel):
    """Projected availabilities a policy looked at on one server.

    Discrete inspection uses weight 1 per time; continuous inspection stores
    one entry per constant segment with its length as weight.
    """

    model_config = ConfigDict(frozen=True)

    times: tuple[float, ...] = ()
    availabilities: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()


class Decision(BaseModel):
    """Outcome of one decide-on-arrival call. chosen=None means reject."""

    chosen: Optional[int] = Field(None, description="Chosen server or None to reject")
    scores: dict[int, float] = Field(default_factory=dict)
    views: dict[int, ServerView] = Field(default_factory=dict)

    @property
    def rejected(self) -> bool:
        return self.chosen is None


class TraceDecision(BaseModel):
    job: int
    arrival_time: float
    chosen: Optional[int] = None
    scores: dict[int, float] = Field(default_factory=dict)
    views: dict[int, ServerView] = Field(default_factory=dict)
    reward: float = Field(0.0, description="Reward collected by this decision")
    min_availability_after: float = Field(
        1.0, description="Smallest alpha_{i,t->t} over servers after the decision"
    )

    @property
    def score_chosen(self) -> Optional[float]:
        if self.chosen is None:
            return None
        return self.scores.get(self.chosen)


class Trace(BaseModel):
    """Decisions of one run in arrival order."""

    policy: str
    mode: CommitMode = CommitMode.ENFORCING
    decisions: list[TraceDecision] = Field(default_factory=list)
    total_reward: float = 0.0
    capacity_violations: list[tuple[int, int]] = Field(
        default_factory=list,
        description="(job, server) pairs a hypothetical run placed on a full server",
    )

    def assignments(self) -> dict[int, int]:
        return {d.job: d.chosen for d in self.decisions if d.chosen is not None}

    def cumulative_rewards(self) -> list[float]:
        """Reward collected after each decision; prefix sums of the trace."""
        out: list[float] = []
        running = 0.0
        for decision in self.decisions:
            running += decision.reward
            out.append(running)
        return out


class SolvedParams(BaseModel):
    """Parameters returned by a solver together with their certified bound."""

    model_config = ConfigDict(frozen=True)

    gamma: Union[int, float] = Field(1, description="Inspection frequency")
    eta: float = Field(..., description="Penalty scale eta")
    beta: float = Field(..., description="Penalty base beta")
    ratio_bound: float = Field(..., description="Certified competitive-ratio bound")
    regime: Regime
    path: str = Field(
        "closed_form",
        description="closed_form, bisection, lambert_w, fallback or penalty_floor",
    )
    c_min: float = Field(INFINITY, description="Capacity the bound was certified for")

    @field_validator("gamma")
    @classmethod
    def _check_gamma(cls, value: float) -> Union[int, float]:
        return _normalize_gamma(value)

    def flb_params(self) -> FlbParams:
        return FlbParams(gamma=self.gamma, eta=self.eta, beta=self.beta)

    def as_lines(self) -> list[str]:
        gamma = "inf" if math.isinf(self.gamma) else str(self.gamma)
        c_min = "inf" if math.isinf(self.c_min) else str(int(self.c_min))
        return [
            f"gamma={gamma}",
            f"eta={self.eta!r}",
            f"beta={self.beta!r}",
            f"ratio_bound={self.ratio_bound!r}",
            f"regime={self.regime.value}",
            f"path={self.path}",
            f"c_min={c_min}",
        ]


class DualSolution(BaseModel):
    """Dual variables built alongside a trace."""

    model_config = ConfigDict(populate_by_name=True)

    lambda_: dict[int, float] = Field(default_factory=dict, alias="lambda")
    theta: dict[int, float] = Field(default_factory=dict)
    objective: float = 0.0

    @model_validator(mode="after")
    def _check_nonnegative(self) -> "DualSolution":
        for name, values in (("lambda", self.lambda_), ("theta", self.theta)):
            for key, value in values.items():
                if value < -1e-12:
                    raise ValueError(f"{name}({key}) = {value} is negative")
        return self


class Configuration(BaseModel):
    """Jobs that can share one capacity unit of a server."""

    model_config = ConfigDict(frozen=True)

    server: int
    jobs: tuple[int, ...] = ()


class CertificateReport(BaseModel):
    instance_id: str
    alg_reward: float = 0.0
    opt: float = 0.0
    dual_objective: float = 0.0
    ratio_bound: float = 0.0
    max_step_ratio: float = 0.0
    worst_config_slack: float = 0.0
    step_violations: int = 0
    config_violations: int = 0
    configurations_checked: int = 0
    weak_duality_ok: bool = True
    competitive_ok: bool = True

    @property
    def violation_count(self) -> int:
        return (
            self.step_violations
            + self.config_violations
            + int(not self.weak_duality_ok)
            + int(not self.competitive_ok)
        )


class InvariantViolation(BaseModel):
    kind: str = Field(..., description="invariant or corollary")
    server: int
    t: float
    tau: Optional[float] = None
    d: Optional[int] = None
    lhs: float
    rhs: float
