"""File formats: observation CSV + metadata sidecar, diagnostics, reports.

Every writer goes through a temporary file in the target directory followed
by an atomic rename, so an interrupted run never leaves a partial file.
Floats are written with 17 significant digits (exact double round trip).
"""
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .basis import UniformGrid
from .errors import InputError
from .simulate import ObservationSet

OBS_HEADER = ("i", "t", "y")


def fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    # JSON has no nan/inf; emit null
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)) and not math.isfinite(o):
        return None
    return o


def dumps(obj):
    return json.dumps(_clean(json.loads(json.dumps(obj, default=_jsonable, allow_nan=True))),
                      indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    return atomic_write_text(path, dumps(obj))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else ("" if v is None else fmt(v)) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    return atomic_write_text(path, csv_text(header, rows))


def sidecar_path(csv_path):
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def write_observations(obs, path, signal=None, kernel=None):
    """Write ``i,t,y`` rows and the metadata sidecar next to them."""
    rows = ((i, t, y) for i, (t, y) in enumerate(zip(obs.t, obs.y), start=1))
    atomic_write_text(path, csv_text(OBS_HEADER, rows))
    meta = {"n": obs.n, "sigma_true": obs.sigma_true, "seed": obs.seed,
            "noise_family": obs.noise_family,
            "signal": signal.to_config() if hasattr(signal, "to_config") else signal,
            "kernel": kernel.to_config() if hasattr(kernel, "to_config") else kernel}
    write_json(sidecar_path(path), meta)
    return Path(path)


def read_observations(path):
    """Parse an observation CSV; malformed rows raise :class:`InputError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty observation file") from None
    if tuple(h.strip() for h in header) != OBS_HEADER:
        raise InputError(f"expected header {','.join(OBS_HEADER)}, got {','.join(header)}")
    ys = []
    ts = []
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != 3:
            raise InputError(f"expected 3 fields, got {len(row)}", row_no)
        try:
            i, t, y = int(row[0]), float(row[1]), float(row[2])
        except ValueError:
            raise InputError(f"non-numeric field in {row!r}", row_no) from None
        if i != row_no:
            raise InputError(f"index {i} out of sequence (expected {row_no})", row_no)
        if not (math.isfinite(t) and math.isfinite(y)):
            raise InputError("non-finite value", row_no)
        ts.append(t)
        ys.append(y)
    n = len(ys)
    if n < 16:
        raise InputError(f"need at least 16 observations, got {n}")
    expect = np.arange(1, n + 1) / n
    bad = np.flatnonzero(np.abs(np.asarray(ts) - expect) > 1e-12)
    if bad.size:
        raise InputError(f"t must equal i/n on a uniform grid (n={n})", int(bad[0]) + 1)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"bad metadata sidecar {side}: {exc}") from exc
    return ObservationSet(UniformGrid(n), np.asarray(ys), meta.get("sigma_true"),
                          meta.get("seed"), meta.get("noise_family"),
                          {k: meta.get(k) for k in ("signal", "kernel") if meta.get(k) is not None})


def write_selection(dirpath, selection, plain=None, stem="selection"):
    """Diagnostics CSV ``N,tau,tau1`` plus JSON summary.

    ``plain`` is the plain selection M(n) when ``selection`` is penalized.
    """
    d = Path(dirpath)
    tau = selection.plain_curve if selection.plain_curve is not None else selection.tau_curve
    tau1 = selection.tau_curve if selection.penalized else [None] * len(tau)
    rows = ((N, tau[N - 1], tau1[N - 1]) for N in range(1, len(tau) + 1))
    write_csv(d / f"{stem}.csv", ("N", "tau", "tau1"), rows)
    summary = {
        "M": plain.M if plain is not None else (None if selection.penalized else selection.M),
        "M1": selection.M if selection.penalized else None,
        "gamma_hat": selection.gamma_hat, "G": selection.G,
        "penalty_coefficient": selection.penalty_coefficient,
        "clamped": selection.clamped, "N_plus": selection.N_plus,
    }
    write_json(d / f"{stem}.json", summary)
    return summary
