"""CSV and manifest writers with deterministic formatting."""

import csv
import hashlib
import json
import math
import platform
from importlib import metadata
from pathlib import Path

import numpy as np

TOOL = "antithetic"


def version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - running from a checkout
        return "0+unknown"


def fmt(value):
    """Shortest round-trip text for numbers; empty cell for None/NaN."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def write_manifest(path, command, config, outputs, model_digest, extra=None):
    """Record everything needed to regenerate ``outputs`` bit-exactly."""
    manifest = {
        "tool": TOOL,
        "version": version(),
        "command": command,
        "config": config.to_dict(),
        "model_sha256": model_digest,
        "seed_plan": {
            "base_seed": config.seed,
            "derivation": "numpy.random.SeedSequence(seed, spawn_key=(*cell_key, i))"
                          ".generate_state(4, uint64)",
            "generator": "xoshiro256**",
            "cell_key": "IEEE-754 bit patterns of (k, Kp) for sweep cells; empty otherwise",
        },
        "n": config.n,
        "grid": config.grid.to_dict(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    return write_json(path, manifest)
