"""Line-oriented instance text format.

    # optional comment lines
    servers: 200 200
    params: R=10.0 D=10.0 mode=integer
    0.0 ; 1:1.0:1.0 ; 2:1.0:1.0
    0.001 ;

One job per line: arrival time, then one ``server:reward:duration`` entry per
compatible server. Floats are written with ``repr`` so they read back exactly.
"""

import logging
from pathlib import Path
from typing import Iterable, Optional, Union

from flblab.models import DurationMode, Instance, JobArrival

logger = logging.getLogger(__name__)


def _format_number(value: float) -> str:
    return repr(float(value))


def format_instance(instance: Instance) -> str:
    lines = [
        "servers: " + " ".join(str(c) for c in instance.servers),
        f"params: R={_format_number(instance.r_max)} D={_format_number(instance.d_max)} "
        f"mode={instance.duration_mode.value}",
    ]
    for job in instance.jobs:
        entries = [
            f"{s}:{_format_number(job.reward[s])}:{_format_number(job.duration[s])}"
            for s in job.compat
        ]
        lines.append(" ; ".join([_format_number(job.arrival_time), *entries]))
    return "\n".join(lines) + "\n"


def write_instance(instance: Instance, path: Union[Path, str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_instance(instance), encoding="utf-8")
    logger.info("wrote instance with %d jobs to %s", instance.num_jobs, path)
    return path


def _parse_params(text: str, lineno: int) -> dict[str, str]:
    params: dict[str, str] = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep or key not in ("R", "D", "mode"):
            raise ValueError(f"line {lineno}: bad params entry {token!r}")
        params[key] = value
    return params


def _parse_job(text: str, index: int, lineno: int) -> JobArrival:
    fields = [f.strip() for f in text.split(";")]
    compat: list[int] = []
    reward: dict[int, float] = {}
    duration: dict[int, float] = {}
    try:
        arrival_time = float(fields[0])
        for entry in filter(None, fields[1:]):
            server, r, d = entry.split(":")
            compat.append(int(server))
            reward[int(server)] = float(r)
            duration[int(server)] = float(d)
    except ValueError as e:
        raise ValueError(f"line {lineno}: cannot parse job {text!r}") from e
    return JobArrival(
        index=index,
        arrival_time=arrival_time,
        compat=tuple(compat),
        reward=reward,
        duration=duration,
    )


def parse_instance(lines: Iterable[str]) -> Instance:
    servers: Optional[list[int]] = None
    params: dict[str, str] = {}
    jobs: list[JobArrival] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if servers is None:
            head, sep, rest = line.partition(":")
            if head.strip() != "servers" or not sep:
                raise ValueError(f"line {lineno}: expected 'servers:' header")
            servers = [int(c) for c in rest.split()]
            continue
        if line.startswith("params:"):
            if jobs:
                raise ValueError(f"line {lineno}: params must precede the jobs")
            params = _parse_params(line.partition(":")[2], lineno)
            continue
        jobs.append(_parse_job(line, len(jobs) + 1, lineno))
    if servers is None:
        raise ValueError("instance text has no 'servers:' header")

    mode = DurationMode(params["mode"]) if "mode" in params else None
    if mode is None:
        integral = all(d == int(d) for job in jobs for d in job.duration.values())
        mode = DurationMode.INTEGER if integral else DurationMode.REAL
    return Instance.from_jobs(
        servers,
        jobs,
        duration_mode=mode,
        r_max=float(params["R"]) if "R" in params else None,
        d_max=float(params["D"]) if "D" in params else None,
    )


def read_instance(path: Union[Path, str]) -> Instance:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        instance = parse_instance(fh)
    logger.debug("read %d jobs from %s", instance.num_jobs, path)
    return instance
