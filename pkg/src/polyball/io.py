"""CSV, JSON and raster writers with lossless float formatting."""

from __future__ import annotations

import csv
import json
import math
import platform
import subprocess
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    """17 significant digits for floats; other values via ``str``."""
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(float(x), ".17g")
    if isinstance(x, (np.integer,)):
        return str(int(x))
    if x is None:
        return ""
    return str(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        r = list(csv.reader(fh))
    return r[0], r[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        # JSON has no inf/nan literals
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


def build_info() -> dict:
    """Versions and source revision for manifests."""
    import scipy

    from . import __version__
    from ._backend import BACKEND

    info = {"polyball": __version__, "backend": BACKEND, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "git": None}
    try:
        here = Path(__file__).resolve().parent
        out = subprocess.run(["git", "rev-parse", "HEAD"], cwd=here, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0:
            info["git"] = out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return info


def manifest(command: str, parameters: dict, outputs: list, extra: dict | None = None) -> dict:
    m = {"command": command, "parameters": parameters, "outputs": [str(p) for p in outputs],
         "build": build_info()}
    if extra:
        m.update(extra)
    return m


def write_pnm(path, rgb: np.ndarray) -> Path:
    """Binary PGM (2-D ``uint8``) or PPM (``(h, w, 3)`` ``uint8``), first row on top."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    a = np.ascontiguousarray(rgb, dtype=np.uint8)
    if a.ndim == 2:
        head = f"P5\n{a.shape[1]} {a.shape[0]}\n255\n"
    elif a.ndim == 3 and a.shape[2] == 3:
        head = f"P6\n{a.shape[1]} {a.shape[0]}\n255\n"
    else:
        raise ValueError("expected (h, w) or (h, w, 3) array")
    path.write_bytes(head.encode("ascii") + a.tobytes())
    return path
