import json
import sys
from pathlib import Path

from app.errors import UsageError


def emit_summary(**fields) -> None:
    """Одна JSON-строка на stdout: машинно-читаемый итог команды."""
    sys.stdout.write(json.dumps(fields, sort_keys=True, default=str) + "\n")
    sys.stdout.flush()


def require_file(path: str, flag: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{flag}: file not found: {path}")
    return path


def require_dir(path: str, flag: str) -> Path:
    path = Path(path)
    if not path.is_dir():
        raise UsageError(f"{flag}: directory not found: {path}")
    return path
