"""Atomic file output and deterministic serialization."""

import io
import os
import tempfile
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import orjson
import pandas as pd


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write data to path via a temp file in the same directory and a rename."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{target.name}.", suffix=".tmp", dir=directory
    )
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_many(outputs: Sequence[tuple[str | Path, bytes]]) -> None:
    """Stage every file as a temp file first; rename only once all are written."""
    staged: list[tuple[str, Path]] = []
    try:
        for path, data in outputs:
            target = Path(path)
            directory = target.parent if str(target.parent) else Path(".")
            fd, tmp_name = tempfile.mkstemp(
                prefix=f".{target.name}.", suffix=".tmp", dir=directory
            )
            staged.append((tmp_name, target))
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
    except BaseException:
        for tmp_name, _ in staged:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
        raise
    for tmp_name, target in staged:
        os.replace(tmp_name, target)


def dump_json(obj: Any) -> bytes:
    """Serialize to sorted, indented JSON with a trailing newline."""
    return (
        orjson.dumps(
            obj,
            option=orjson.OPT_INDENT_2
            | orjson.OPT_SORT_KEYS
            | orjson.OPT_SERIALIZE_NUMPY,
        )
        + b"\n"
    )


def frame_to_csv(frame: pd.DataFrame, index: bool = False) -> str:
    """Render a frame as CSV with repr-exact floats and unix newlines."""
    buffer = io.StringIO()
    frame.to_csv(buffer, index=index, lineterminator="\n")
    return buffer.getvalue()
