"""Content-addressed image store and append-only session journals."""

from __future__ import annotations

import errno
import json
import threading
import time
from pathlib import Path
from typing import Optional

from ..data import imageio


class StorageFull(OSError):
    pass


class BlobStore:
    """PNG blobs addressed by SHA-256; writes are idempotent."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "img").mkdir(parents=True, exist_ok=True)

    def _path(self, digest: str) -> Path:
        return self.root / "img" / digest[:2] / f"{digest}.png"

    def put(self, png_bytes: bytes, sidecar: Optional[dict] = None) -> str:
        digest = imageio.content_hash(png_bytes)
        path = self._path(digest)
        try:
            if not path.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(png_bytes)
                tmp.rename(path)
            if sidecar is not None:
                side = path.with_suffix(".json")
                if not side.exists():
                    side.write_text(json.dumps(sidecar, sort_keys=True))
        except OSError as exc:
            if exc.errno == errno.ENOSPC:
                raise StorageFull(str(exc)) from exc
            raise
        return digest

    def get(self, digest: str) -> bytes:
        path = self._path(digest)
        if not path.exists():
            raise KeyError(digest)
        return path.read_bytes()

    def has(self, digest: str) -> bool:
        return self._path(digest).exists()


class SessionJournal:
    """Per-session append-only JSON-lines event log; single writer per session."""

    def __init__(self, root: str | Path):
        self.root = Path(root) / "sessions"
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        if not session_id or not session_id.replace("-", "").isalnum():
            raise ValueError(f"bad session id {session_id!r}")
        return self.root / f"{session_id}.jsonl"

    def append(self, session_id: str, event: dict) -> int:
        """Write one event; returns its 0-based index in the journal."""
        event = {"ts": time.time(), **event}
        line = json.dumps(event, sort_keys=True)
        with self._lock_for(session_id):
            path = self._path(session_id)
            index = self._count(path)
            try:
                with path.open("a") as f:
                    f.write(line + "\n")
                    f.flush()
            except OSError as exc:
                if exc.errno == errno.ENOSPC:
                    raise StorageFull(str(exc)) from exc
                raise
            return index

    @staticmethod
    def _count(path: Path) -> int:
        if not path.exists():
            return 0
        with path.open() as f:
            return sum(1 for _ in f)

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def read(self, session_id: str) -> list[dict]:
        path = self._path(session_id)
        if not path.exists():
            raise KeyError(session_id)
        events = []
        with path.open() as f:
            for line in f:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return events

    def sessions(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))
