"""Content-addressed response cache: ``<root>/<key[:2]>/<key>.response``.

Each file is one JSON metadata line followed by the raw response text,
byte for byte.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


class ResponseCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.response"

    def get(self, key: str) -> tuple[str, dict] | None:
        p = self.path(key)
        try:
            data = p.read_bytes()
        except FileNotFoundError:
            return None
        header, _, body = data.partition(b"\n")
        return body.decode("utf-8"), json.loads(header)

    def put(self, key: str, raw_text: str, meta: dict | None = None) -> None:
        p = self.path(key)
        p.parent.mkdir(parents=True, exist_ok=True)
        header = json.dumps({"key": key, **(meta or {})}, sort_keys=True).encode("utf-8")
        # atomic replace: concurrent writers of one key race harmlessly
        fd, tmp = tempfile.mkstemp(dir=p.parent, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(header + b"\n" + raw_text.encode("utf-8"))
        os.replace(tmp, p)

    def __contains__(self, key: str) -> bool:
        return self.path(key).exists()
