"""Report emission: deterministic CSV data files plus a JSON summary.

CSV content is a pure function of the results (floats serialized with
round-trip repr), so reruns with the same seed and config produce byte
identical data files regardless of worker count. The JSON summary carries
the config echo, version, seed, wall-clock, and a manifest of every
emitted file with size and checksum.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
import os
import subprocess

from ._version import __version__

__all__ = ["format_cell", "write_csv", "emit_report", "version_string"]


def version_string() -> str:
    """Package version, extended with the git description when available."""
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{__version__}+g{desc.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def _file_entry(path) -> dict:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return {
        "name": os.path.basename(path),
        "bytes": os.path.getsize(path),
        "sha256": digest.hexdigest(),
    }


def emit_report(results: dict, out_dir, config_echo: dict, rng_seed: int,
                summary_extra: dict = None) -> dict:
    """Write CSV tables and a summary JSON; returns the file manifest.

    results maps file stem -> {"header": [...], "rows": [...]} for CSV
    tables. summary_extra is merged into the summary document.
    """
    os.makedirs(out_dir, exist_ok=True)
    manifest = []
    for stem in sorted(results):
        table = results[stem]
        path = os.path.join(out_dir, f"{stem}.csv")
        write_csv(path, table["header"], table["rows"])
        manifest.append(_file_entry(path))

    summary = {
        "version": version_string(),
        "rng_seed": rng_seed,
        "wall_clock_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config_echo,
    }
    if summary_extra:
        summary.update(summary_extra)
    summary["files"] = manifest
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=1, default=_json_default)
    manifest = manifest + [_file_entry(summary_path)]
    return {"files": manifest, "out_dir": str(out_dir)}


def _json_default(obj):
    try:
        import numpy as np

        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
