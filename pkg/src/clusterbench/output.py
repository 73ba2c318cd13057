"""CSV/JSON writers and the run manifest.

CSV files carry the deterministic part of the manifest (tool, version,
command, resolved config, seed) as leading ``#`` comment lines, so a file
is enough to regenerate itself. Wall-clock timestamps would break
byte-identical reruns, so they go to a sidecar ``<file>.manifest.json``.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

TOOL = "clusterbench"
# options that never change results; kept out of the embedded header
PRESENTATION_KEYS = frozenset({"out", "bins_out", "jobs", "verbose"})


def format_value(value) -> str:
    """Locale-free text with 17 significant digits for floats."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    return str(value)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    started: str = field(default_factory=now)
    finished: str | None = None
    outputs: list = field(default_factory=list)
    version: str = __version__

    def core(self) -> dict:
        """Everything except timestamps; embedded verbatim in CSV headers."""
        return {
            "tool": TOOL,
            "version": self.version,
            "command": self.command,
            "seed": self.seed,
            "config": to_jsonable({k: v for k, v in self.config.items() if k not in PRESENTATION_KEYS}),
        }

    def to_dict(self) -> dict:
        out = self.core()
        out["config"] = to_jsonable(self.config)
        out.update(started=self.started, finished=self.finished, outputs=list(self.outputs))
        return out

    def finish(self) -> "RunManifest":
        self.finished = now()
        return self


def csv_text(header, rows, manifest: RunManifest) -> str:
    buf = io.StringIO()
    for key, value in manifest.core().items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(c) for c in _cells(row, header)])
    return buf.getvalue()


def _cells(row, header):
    if isinstance(row, dict):
        return [row.get(h) for h in header]
    return list(row)


def write_csv(path, header, rows, manifest: RunManifest) -> Path:
    path = Path(path)
    text = csv_text(header, rows, manifest)
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    manifest.outputs.append(str(path))
    return path


def write_sidecar(path, manifest: RunManifest) -> Path:
    side = Path(str(path) + ".manifest.json")
    side.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return side


def read_csv_manifest(path) -> dict:
    """Parse the ``#`` header lines of a CSV written by :func:`write_csv`."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].partition(": ")
            out[key] = json.loads(value)
    return out


def read_csv_rows(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


def dump_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)
