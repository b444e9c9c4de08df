"""Run manifests: what went in, what came out, and how long each stage took.

Every CLI run writes a manifest, including failed runs (with the error
recorded), so any output file can be traced back to its exact inputs and
configuration. Output digests cover file content; the manifest itself is
metadata and carries wall-clock timings, so it is not byte-stable between
runs.
"""

from __future__ import annotations

import hashlib
import json
import time
from contextlib import contextmanager
from pathlib import Path

from . import __version__

__all__ = ["RunManifest", "sha256_path"]


def sha256_path(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class RunManifest:
    """Collects inputs, outputs, and per-stage timings for one CLI run."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.inputs: list[dict] = []
        self.outputs: list[str] = []
        self.timings: list[dict] = []

    def add_input(self, path: str | Path) -> None:
        path = Path(path)
        record = {"path": str(path)}
        if path.is_file():
            record["sha256"] = sha256_path(path)
        elif path.is_dir():
            files = sorted(p for p in path.rglob("*") if p.is_file())
            record["files"] = len(files)
            digest = hashlib.sha256()
            for p in files:
                digest.update(p.name.encode())
                digest.update(bytes.fromhex(sha256_path(p)))
            record["sha256"] = digest.hexdigest()
        else:
            record["sha256"] = None
        self.inputs.append(record)

    def add_output(self, path: str | Path) -> None:
        self.outputs.append(str(Path(path)))

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings.append({"stage": name, "seconds": round(time.perf_counter() - start, 6)})

    def write(self, path: str | Path, error: str | None = None) -> Path:
        path = Path(path)
        outputs = []
        for out in self.outputs:
            p = Path(out)
            outputs.append({"path": out, "sha256": sha256_path(p) if p.is_file() else None})
        doc = {
            "tool": "reefsurvey",
            "version": __version__,
            "command": self.command,
            "status": "failed" if error else "ok",
            "error": error,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": outputs,
            "timings": self.timings,
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        return path
