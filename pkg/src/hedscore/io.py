"""Stream files, sidecar metadata, run reports and static plots.

A stream file is a CSV with header ``t,p`` and one row per step ``t = 0..T``.
Its metadata lives next to it in ``<file>.meta.json`` (``t_start``, ``label``
and, once scored, ``lambda``).
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from hedscore.core import ProbabilityStream
from hedscore.errors import HedError

PathLike = Union[str, Path]

HEADER = ("t", "p")
# 17 significant digits round-trip every binary64 value
PROB_FORMAT = ".17g"


class StreamFormatError(HedError):
    """Malformed file content (maps to the usage/parse exit code)."""


def meta_path(path: PathLike) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def file_digest(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _parse_rows(path: Path):
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise StreamFormatError(f"{path}: empty file, expected header 't,p'") from None
        if tuple(h.strip() for h in header) != HEADER:
            raise StreamFormatError(f"{path}: header must be 't,p', got {','.join(header)!r}")
        ts, ps = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise StreamFormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                t = int(row[0].strip())
                p = float(row[1].strip())
            except ValueError:
                raise StreamFormatError(
                    f"{path}:{lineno}: cannot parse row {','.join(row)!r} as integer t, real p"
                ) from None
            ts.append(t)
            ps.append(p)
    if not ts:
        raise StreamFormatError(f"{path}: no data rows")
    return ts, ps


def read_meta(path: PathLike) -> dict:
    mp = meta_path(path)
    if not mp.exists():
        return {}
    try:
        meta = json.loads(mp.read_text())
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"{mp}: invalid JSON ({exc.msg})") from None
    if not isinstance(meta, dict):
        raise StreamFormatError(f"{mp}: expected a JSON object")
    return meta


def read_stream(path: PathLike, t_start: Optional[int] = None) -> tuple[ProbabilityStream, dict]:
    """Load a stream and its metadata; an explicit ``t_start`` overrides the sidecar."""
    path = Path(path)
    if not path.exists():
        raise StreamFormatError(f"{path}: no such file")
    ts, ps = _parse_rows(path)
    meta = read_meta(path)
    if t_start is None:
        if "t_start" not in meta:
            raise StreamFormatError(
                f"{path}: t_start missing; provide {meta_path(path).name} or --t-start"
            )
        t_start = meta["t_start"]
    if isinstance(t_start, bool) or not isinstance(t_start, int):
        raise StreamFormatError(f"{path}: t_start must be an integer, got {t_start!r}")
    stream = ProbabilityStream.from_timestamps(ts, ps, t_start)
    return stream, meta


def write_stream(
    path: PathLike,
    stream: ProbabilityStream,
    label: str = "",
    lambda_h: Optional[float] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for t, p in enumerate(stream.probs):
            w.writerow((t, format(float(p), PROB_FORMAT)))
    meta = {"t_start": stream.t_start, "label": label}
    if lambda_h is not None:
        meta["lambda"] = float(lambda_h)
    meta_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return path


def write_table(path: PathLike, columns: Mapping[str, Sequence]) -> Path:
    """Plain CSV of equal-length columns, reals at full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_cell(v) for v in row])
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), PROB_FORMAT)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def build_report(
    command: str,
    inputs: Mapping[str, str],
    parameters: Mapping,
    results: Mapping,
    seed: Optional[int] = None,
) -> dict:
    """Run report; ``timestamp`` is the only field that varies between reruns."""
    from hedscore import __version__

    return {
        "command": command,
        "inputs": dict(sorted(inputs.items())),
        "parameters": _jsonable(dict(parameters)),
        "results": _jsonable(dict(results)),
        "tool_version": __version__,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def dumps_report(report: Mapping) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False)


def strip_timestamp(report: Mapping) -> dict:
    return {k: v for k, v in report.items() if k != "timestamp"}


def plot_frontiers(path: PathLike, curves: Sequence, title: str = "") -> Path:
    """Static SVG of one or more FAR-score step curves."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "hedscore", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        for i, curve in enumerate(curves):
            order = np.argsort(curve.fars, kind="stable")
            ax.step(
                curve.fars[order], curve.heds[order], where="post",
                label=curve.label or f"curve {i}",
            )
        ax.set_xlabel("false-alarm rate")
        ax.set_ylabel("score of binarized stream")
        ax.set_xlim(0.0, 1.0)
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
