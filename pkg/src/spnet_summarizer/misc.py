"""Utils module for helper functions."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Union

from spnet_summarizer.exceptions import SchemaError

PathLike = Union[str, Path]


def write_json(path: PathLike, payload: Dict[str, Any]) -> None:
    """Write a JSON document with stable key order and a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, ensure_ascii=False)
        f.write('\n')


def read_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    """Yield one object per non-blank line.

    Raises:
        SchemaError: If a line is not a JSON object.
    """
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{path}:{line_number}: invalid JSON ({e.msg})") from e
            if not isinstance(record, dict):
                raise SchemaError(f"{path}:{line_number}: expected a JSON object")
            yield record


def write_jsonl(path: PathLike, records: Iterable[Dict[str, Any]]) -> int:
    """Write records one per line and return how many were written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False))
            f.write('\n')
            count += 1
    return count
