"""Dialog JSONL schema (version 1).

One dialog per line::

    {"schema_version": 1, "id": ..., "domain_inventory": [...], "domains": [0, 1, ...],
     "turns": [{"role": "user", "tokens": [...], "slot_spans": [{"slot", "value", "start", "end", "domain"}]}],
     "reference_summary": [...], "reference_summary_delex": [...], "summary_spans": [...],
     "delex": {"user_stream": [...], "system_stream": [...],
               "slot_table": [{"slot", "value", "encoder", "position", "domain"}]}}

The ``delex`` object is derived data; on read it must agree with the turns.
"""

from __future__ import annotations

from dataclasses import asdict
from typing import Any, Dict, Iterable, List, Mapping

from spnet_summarizer.corpus.delex import build_delex_record
from spnet_summarizer.corpus.types import Dialog, Role, SlotEntry, SlotSpan, Turn
from spnet_summarizer.exceptions import SchemaError
from spnet_summarizer.misc import PathLike, read_jsonl, write_jsonl

SCHEMA_VERSION = 1

_REQUIRED = ("id", "domain_inventory", "domains", "turns", "reference_summary", "reference_summary_delex")


def dialog_to_record(dialog: Dialog) -> Dict[str, Any]:
    """Serialize a dialog, including its inline delexicalization."""
    delex = build_delex_record(dialog)
    return {
        "schema_version": SCHEMA_VERSION,
        "id": dialog.id,
        "domain_inventory": list(dialog.domain_inventory),
        "domains": list(dialog.domains),
        "turns": [
            {
                "role": turn.role.value,
                "tokens": list(turn.tokens),
                "slot_spans": [asdict(span) for span in turn.slot_spans],
            }
            for turn in dialog.turns
        ],
        "reference_summary": list(dialog.reference_summary),
        "reference_summary_delex": list(dialog.reference_summary_delex),
        "summary_spans": [asdict(span) for span in dialog.summary_spans],
        "delex": {
            "user_stream": delex.user_stream,
            "system_stream": delex.system_stream,
            "slot_table": [asdict(entry) for entry in delex.slot_table],
        },
    }


def dialog_from_record(record: Mapping[str, Any]) -> Dialog:
    """Parse and validate one JSONL record.

    Raises:
        SchemaError: If fields are missing, mistyped, or violate a dialog invariant.
    """
    version = record.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"Unsupported dialog schema version {version!r}")
    missing = [name for name in _REQUIRED if name not in record]
    if missing:
        raise SchemaError(f"Dialog record {record.get('id', '?')} is missing {missing}")
    dialog_id = str(record["id"])
    try:
        dialog = Dialog(
            id=dialog_id,
            turns=[
                Turn(
                    role=Role(turn["role"]),
                    tokens=[str(t) for t in turn["tokens"]],
                    slot_spans=[_span(s) for s in turn.get("slot_spans", [])],
                )
                for turn in record["turns"]
            ],
            domains=tuple(int(bit) for bit in record["domains"]),
            domain_inventory=tuple(str(d) for d in record["domain_inventory"]),
            reference_summary=[str(t) for t in record["reference_summary"]],
            reference_summary_delex=[str(t) for t in record["reference_summary_delex"]],
            summary_spans=[_span(s) for s in record.get("summary_spans", [])],
        )
        dialog.validate()
    except (KeyError, TypeError, ValueError) as e:
        # ContractError is a ValueError
        raise SchemaError(f"Dialog record {dialog_id} is malformed: {e}") from e

    if "delex" in record:
        _check_inline_delex(dialog, record["delex"])
    return dialog


def read_dialogs(path: PathLike) -> List[Dialog]:
    """Read every dialog of a JSONL file."""
    return [dialog_from_record(record) for record in read_jsonl(path)]


def write_dialogs(path: PathLike, dialogs: Iterable[Dialog]) -> int:
    """Write dialogs as JSONL and return the count."""
    return write_jsonl(path, (dialog_to_record(d) for d in dialogs))


def _span(payload: Mapping[str, Any]) -> SlotSpan:
    return SlotSpan(
        slot=str(payload["slot"]),
        value=str(payload["value"]),
        start=int(payload["start"]),
        end=int(payload["end"]),
        domain=payload.get("domain"),
    )


def _check_inline_delex(dialog: Dialog, payload: Any) -> None:
    expected = build_delex_record(dialog)
    try:
        table = [SlotEntry(**entry) for entry in payload["slot_table"]]
        agrees = (
            list(payload["user_stream"]) == expected.user_stream
            and list(payload["system_stream"]) == expected.system_stream
            and table == expected.slot_table
        )
    except (KeyError, TypeError) as e:
        raise SchemaError(f"Dialog record {dialog.id} has a malformed delex object: {e}") from e
    if not agrees:
        raise SchemaError(f"Dialog record {dialog.id}: delex object disagrees with its turns")
