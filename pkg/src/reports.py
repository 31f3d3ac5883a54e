"""Serialization of command results.

JSON output is ``json.dumps(sort_keys=True, indent=2)`` of a payload made
of plain types: rationals become ``"num/den"`` strings, mpmath numbers
become 20-significant-digit strings, enums become their values.
Non-finite floats are written as null. Nothing time-dependent is written,
so identical runs give identical bytes.
"""

import json
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import mpmath
import numpy as np
import pandas as pd

from logger import setup_logger
from utils import format_rational

logger = setup_logger(__name__)


def to_jsonable(obj: Any) -> Any:
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 20)
    if isinstance(obj, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator="\n")


def write_output(text: str, out: Optional[str] = None) -> None:
    """Write to ``out`` (parents created) or to stdout."""
    if out is None:
        print(text, end="")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"Saved {len(text)} bytes to {path}")
