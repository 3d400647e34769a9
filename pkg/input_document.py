import os
import json
import math
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import pandas as pd
import toml

from core import ParamPair
from errors import InputValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InputDocument:
    """A (p, q) pair read from a file, with an optional label"""

    p: List[float]
    q: List[float]
    label: Optional[str] = None

    def to_pair(self) -> ParamPair:
        return ParamPair.from_lists(self.p, self.q)


def _parse_number(value: Any, field: str) -> float:
    if isinstance(value, bool):
        raise InputValidationError(f"expected a number, got {value!r}", field)
    if isinstance(value, str):
        # float() is locale-independent and only accepts a period radix
        try:
            value = float(value.strip())
        except ValueError:
            raise InputValidationError(f"cannot parse {value!r} as a number", field)
    if not isinstance(value, (int, float)):
        raise InputValidationError(f"expected a number, got {value!r}", field)
    number = float(value)
    if not math.isfinite(number) or number < 0.0 or number > 1.0:
        raise InputValidationError(f"{number!r} is outside [0, 1]", field)
    return number


def _parse_vector(data: Dict[str, Any], name: str) -> List[float]:
    if name not in data:
        raise InputValidationError("missing", name)
    values = data[name]
    if not isinstance(values, (list, tuple)):
        raise InputValidationError(f"expected a list of numbers, got {type(values).__name__}", name)
    if not values:
        raise InputValidationError("must not be empty", name)
    return [_parse_number(v, f"{name}[{i}]") for i, v in enumerate(values)]


def validate_document(data: Any) -> InputDocument:
    """Check a parsed mapping and build the InputDocument"""
    if not isinstance(data, dict):
        raise InputValidationError("document must be a mapping with fields p and q")
    p = _parse_vector(data, "p")
    q = _parse_vector(data, "q")
    if len(p) != len(q):
        raise InputValidationError(f"length {len(q)} does not match length {len(p)} of p", "q")
    label = data.get("label")
    if label is not None and not isinstance(label, str):
        raise InputValidationError(f"expected a string, got {label!r}", "label")
    return InputDocument(p=p, q=q, label=label)


def _read_csv(path: str) -> Dict[str, Any]:
    """Two rows, p then q; a leading 'p' / 'q' cell names the row"""
    try:
        df = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise InputValidationError("CSV input is empty")
    if len(df) != 2:
        raise InputValidationError(f"CSV input needs exactly two rows, found {len(df)}")
    data: Dict[str, Any] = {}
    for name, (_, row) in zip(("p", "q"), df.iterrows()):
        cells = [c for c in row.tolist() if isinstance(c, str) and c.strip()]
        if cells and cells[0].strip().lower() == name:
            cells = cells[1:]
        data[name] = cells
    return data


def load_input_document(path: str) -> InputDocument:
    """Load a JSON, TOML or two-row CSV document by file extension (JSON by default)"""
    extension = os.path.splitext(path)[1].lower()
    try:
        if extension == ".csv":
            data = _read_csv(path)
        elif extension == ".toml":
            data = toml.load(path)
        else:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
    except InputValidationError:
        raise
    except (json.JSONDecodeError, toml.TomlDecodeError, pd.errors.ParserError, UnicodeDecodeError) as e:
        logger.error(f"Error parsing {path}: {str(e)}")
        raise InputValidationError(f"cannot parse {path}: {e}")
    except OSError as e:
        logger.error(f"Error reading {path}: {str(e)}")
        raise InputValidationError(f"cannot read {path}: {e.strerror or e}")

    document = validate_document(data)
    logger.debug(f"Loaded {path}: n={len(document.p)}, label={document.label!r}")
    return document
