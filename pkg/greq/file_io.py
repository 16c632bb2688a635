import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

from .model import GreqError

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent / "schemas"


class GreqIOError(GreqError):
    """An input could not be read or an output could not be written."""


def read_text_file(path: Path) -> str:
    if not path.exists():
        raise GreqIOError(f"Path not found: {path}")
    if not path.is_file():
        raise GreqIOError(f"Path is not a regular file: {path}")
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise GreqIOError(f"{path} is not valid UTF-8: {exc}") from exc
    except OSError as exc:
        raise GreqIOError(f"Error reading file {path}: {exc}") from exc


def write_text_file(path: Path, content: str) -> str:
    """Write UTF-8 text with LF line endings, creating parent directories."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise GreqIOError(f"Failed to create parent directory for '{path}': {exc}") from exc
    data = content.encode("utf-8")
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise GreqIOError(f"Failed to write '{path}': {exc}") from exc
    logger.debug("wrote %d byte(s) to %s", len(data), path)
    return f"Wrote {len(data)} byte(s) to '{path}'."


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    """Load one of the JSON schemas shipped in ``greq/schemas``."""
    return json.loads((SCHEMA_DIR / name).read_text(encoding="utf-8"))
