"""Embedded key-value persistence for profiles and sessions (single sqlite file)."""

from __future__ import annotations

import json
import sqlite3
import threading
from pathlib import Path
from typing import Any


class KeyValueStore:
    """Namespaced JSON documents plus monotonically increasing counters.

    Writes are serialized with a lock; reads share the same connection.
    """

    def __init__(self, path: str | Path) -> None:
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS kv ("
                " namespace TEXT NOT NULL,"
                " key TEXT NOT NULL,"
                " value TEXT NOT NULL,"
                " PRIMARY KEY (namespace, key))"
            )
            self._conn.commit()

    def put(self, namespace: str, key: str, value: dict[str, Any]) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO kv (namespace, key, value) VALUES (?, ?, ?)",
                (namespace, key, json.dumps(value)),
            )
            self._conn.commit()

    def get(self, namespace: str, key: str) -> dict[str, Any] | None:
        row = self._conn.execute(
            "SELECT value FROM kv WHERE namespace = ? AND key = ?", (namespace, key)
        ).fetchone()
        return json.loads(row[0]) if row else None

    def keys(self, namespace: str) -> list[str]:
        rows = self._conn.execute(
            "SELECT key FROM kv WHERE namespace = ? ORDER BY key", (namespace,)
        ).fetchall()
        return [row[0] for row in rows]

    def next_id(self, counter: str) -> int:
        with self._lock:
            row = self._conn.execute(
                "SELECT value FROM kv WHERE namespace = '__counters__' AND key = ?",
                (counter,),
            ).fetchone()
            current = json.loads(row[0])["n"] if row else 0
            self._conn.execute(
                "INSERT OR REPLACE INTO kv (namespace, key, value) "
                "VALUES ('__counters__', ?, ?)",
                (counter, json.dumps({"n": current + 1})),
            )
            self._conn.commit()
        return current + 1

    def close(self) -> None:
        self._conn.close()
