# utils.py
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

# Conversion functions
def db_to_linear(value_db: float) -> float:
    """Convert a power ratio from dB to linear scale"""
    return 10.0 ** (value_db / 10.0)

def linear_to_db(value: float) -> float:
    """Convert a positive linear power ratio to dB"""
    return 10.0 * math.log10(value)

# Validation functions
def validate_ratio(value: float, name: str = "ratio") -> Tuple[bool, str]:
    """Validate a linear SNR/INR ratio"""
    if not math.isfinite(value):
        return False, f"{name} must be finite"
    if value <= 0:
        return False, f"{name} must be positive, got {value}"
    return True, ""

def validate_interference(rho_i: Sequence[float], m: int) -> Dict[str, Any]:
    """Validate an interferer INR list against the declared interferer count"""
    errors = []

    if len(rho_i) != m:
        errors.append(f"expected {m} interferer INRs, got {len(rho_i)}")

    for index, value in enumerate(rho_i):
        ok, message = validate_ratio(value, f"rho_i[{index}]")
        if not ok:
            errors.append(message)

    return {
        "is_valid": len(errors) == 0,
        "errors": errors
    }

def validate_db_range(start: float, stop: float, step: float) -> Tuple[bool, str]:
    """Validate a start:stop:step dB sweep"""
    if step <= 0:
        return False, "sweep step must be positive"
    if stop < start:
        return False, "sweep stop must not be below start"
    return True, ""

# Parsing helpers
def parse_db_list(text: str) -> List[float]:
    """Parse a comma separated list of dB values"""
    items = [item.strip() for item in str(text).split(",") if item.strip()]
    if not items:
        raise ValueError("empty dB list")
    return [float(item) for item in items]

def parse_db_range(text: str) -> List[float]:
    """
    Parse a dB sweep given either as a single value or as start:stop:step.

    The stop value is included when it lies on the grid.
    """
    parts = str(text).split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:step, got {text!r}")

    start, stop, step = (float(part) for part in parts)
    ok, message = validate_db_range(start, stop, step)
    if not ok:
        raise ValueError(message)

    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + index * step, 10) for index in range(count)]

def format_number(value: float) -> str:
    """Format a float for CSV output"""
    return f"{value:.10g}"

# File helpers
def atomic_write_text(path: Path, text: str) -> Path:
    """Write text to a sibling temporary file and rename it into place"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path
