"""Keyed document and blob storage behind the service.

Two implementations of one small contract: an in-memory dict for tests
and a file-backed store that survives restarts. Writes go through a
temp-file rename so a crash mid-write never leaves a torn document.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from pathlib import Path
from typing import Protocol


class StorageError(RuntimeError):
    pass


_SAFE_KEY = re.compile(r"^[A-Za-z0-9._-]+$")


def _check_key(key: str) -> str:
    if not _SAFE_KEY.match(key):
        raise StorageError(f"invalid storage key {key!r}")
    return key


class DocumentStore(Protocol):
    def put(self, key: str, doc: dict) -> None: ...
    def get(self, key: str) -> dict: ...
    def exists(self, key: str) -> bool: ...
    def put_blob(self, key: str, data: bytes) -> None: ...
    def get_blob(self, key: str) -> bytes: ...


class MemoryStore:
    def __init__(self):
        self._docs: dict[str, str] = {}
        self._blobs: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def put(self, key: str, doc: dict) -> None:
        _check_key(key)
        payload = json.dumps(doc, ensure_ascii=False)
        with self._lock:
            self._docs[key] = payload

    def get(self, key: str) -> dict:
        with self._lock:
            try:
                return json.loads(self._docs[key])
            except KeyError:
                raise KeyError(key) from None

    def exists(self, key: str) -> bool:
        with self._lock:
            return key in self._docs

    def put_blob(self, key: str, data: bytes) -> None:
        _check_key(key)
        with self._lock:
            self._blobs[key] = bytes(data)

    def get_blob(self, key: str) -> bytes:
        with self._lock:
            try:
                return self._blobs[key]
            except KeyError:
                raise KeyError(key) from None


class FileDocumentStore:
    """One file per key under root: documents as .json, blobs as .bin."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create store at {self.root}: {exc}") from exc

    def _path(self, key: str, kind: str) -> Path:
        return self.root / f"{_check_key(key)}.{kind}"

    def _write(self, path: Path, data: bytes) -> None:
        try:
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageError(f"write failed for {path.name}: {exc}") from exc

    def put(self, key: str, doc: dict) -> None:
        payload = json.dumps(doc, ensure_ascii=False).encode("utf-8")
        self._write(self._path(key, "json"), payload)

    def get(self, key: str) -> dict:
        path = self._path(key, "json")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise KeyError(key) from None
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"unreadable document {key}: {exc}") from exc

    def exists(self, key: str) -> bool:
        return self._path(key, "json").exists()

    def put_blob(self, key: str, data: bytes) -> None:
        self._write(self._path(key, "bin"), bytes(data))

    def get_blob(self, key: str) -> bytes:
        path = self._path(key, "bin")
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise KeyError(key) from None
        except OSError as exc:
            raise StorageError(f"unreadable blob {key}: {exc}") from exc
