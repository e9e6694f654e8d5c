"""Atomic, byte-stable file writes.

Every JSON artifact the pipeline emits goes through canonical_json so that
rerunning a command with identical inputs reproduces identical bytes. Writes
land in a temp file in the target directory and are moved into place with
os.replace, so readers never observe a half-written file.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any

__all__ = ["canonical_json", "atomic_write_json", "atomic_write_bytes", "atomic_write_text"]


def canonical_json(obj: Any) -> str:
    # dict insertion order is the canonical field order; callers build
    # documents field by field in schema order
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_json(path: str, obj: Any) -> None:
    atomic_write_text(path, canonical_json(obj))
