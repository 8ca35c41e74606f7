"""CSV and SVG writers shared by the engine and the experiments."""

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

import pandas as pd

logger = logging.getLogger(__name__)


def write_csv(
    frame: pd.DataFrame, path: Union[Path, str], note: Optional[str] = None
) -> Path:
    """Write frame with a single '# generated <UTC timestamp>' first line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    header = f"# generated {stamp}" + (f" {note}" if note else "")
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        frame.to_csv(fh, index=False, lineterminator="\n")
    logger.info("Wrote %s (%d rows)", path, len(frame))
    return path


def read_csv(path: Union[Path, str]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")
