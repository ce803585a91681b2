"""File formats: model JSON, trajectory CSV and demonstration CSV.

Model files are canonical JSON (sorted keys, shortest round-trip floats)
so that save -> load -> save reproduces the same bytes. Anything that
changes between runs, such as a creation timestamp, goes into a
``<file>.meta.json`` sidecar instead.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
from typing import Optional, Union

import numpy as np

from .basis import KernelSet
from .classical import ClassicalDMP, Gating
from .errors import RevDMPError, ValidationError
from .orientation import OrientationDMP
from .phase import CanonicalSystem
from .reversible import ReversibleDMP
from .sim import QuaternionTrajectory, Trajectory

FORMAT_VERSION = 1
QUAT_COLUMNS = ["t", "qw", "qx", "qy", "qz", "wx", "wy", "wz", "dwx", "dwy", "dwz", "etax", "etay", "etaz"]

Model = Union[ReversibleDMP, ClassicalDMP, OrientationDMP]


# --------------------------------------------------------------------------
# models


def _num(v):
    v = float(v)
    return None if math.isnan(v) else v


def _arr(a):
    return np.asarray(a, dtype=float).tolist()


def _cs_dict(cs: CanonicalSystem) -> dict:
    return {"kind": cs.kind, "tau": cs.tau, "x0": cs.x0, "xf": cs.xf}


def _cs_from(d) -> CanonicalSystem:
    if d.get("kind") not in ("linear", "exponential"):
        raise ValidationError(f"unknown canonical kind {d.get('kind')!r}")
    return CanonicalSystem(tau=float(d["tau"]), x0=float(d["x0"]), xf=float(d["xf"]), kind=d["kind"])


def model_to_dict(model: Model, provenance: Optional[dict] = None) -> dict:
    """Plain-JSON description of a trained model."""
    ks = model.kernels
    out = {
        "format_version": FORMAT_VERSION,
        "kernels": {"centers": _arr(ks.centers), "inv_widths": _arr(ks.inv_widths), "a_h": ks.a_h},
        "canonical": _cs_dict(model.cs),
        "fit_residual": _num(model.fit_residual),
        "provenance": dict(provenance or {}),
    }
    if isinstance(model, ReversibleDMP):
        out.update(kind="reversible", weights=_arr(model.w),
                   gains={"K": _arr(model.K), "D": _arr(model.D)},
                   anchors={"y0": _arr(model.y0), "g": _arr(model.g)})
    elif isinstance(model, ClassicalDMP):
        d = model.demo
        out.update(kind="classical", weights=_arr(model.w),
                   gains={"alpha_z": model.alpha_z, "beta_z": model.beta_z},
                   gating={"kind": model.gating.kind, "a_g": model.gating.a_g, "center": model.gating.center},
                   anchors={"y0": _arr(model.y0_d), "g": _arr(model.g_d)},
                   demo={"t": _arr(d.t), "y": _arr(d.y), "yd": _arr(d.yd), "ydd": _arr(d.ydd)})
    elif isinstance(model, OrientationDMP):
        out.update(kind="orientation", weights=_arr(model.W),
                   gains={"K": _arr(model.K), "D": _arr(model.D)},
                   anchors={"Q0": _arr(model.Q0), "Qg": _arr(model.Qg)})
    else:
        raise ValidationError(f"cannot serialize {type(model).__name__}")
    return out


def model_from_dict(d: dict) -> Model:
    """Rebuild a model, re-checking every invariant on the way.

    Raises
    ------
    ValidationError
        On missing fields, wrong shapes or violated model invariants.
    """
    try:
        if not isinstance(d, dict):
            raise ValidationError("model file must contain a JSON object")
        if d.get("format_version") != FORMAT_VERSION:
            raise ValidationError(f"unsupported format_version {d.get('format_version')!r}")
        kind = d.get("kind")
        kd = d["kernels"]
        ks = KernelSet(np.array(kd["centers"], float), np.array(kd["inv_widths"], float), float(kd["a_h"]))
        cs = _cs_from(d["canonical"])
        w = np.array(d["weights"], dtype=float)
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        resid = d.get("fit_residual")
        resid = float("nan") if resid is None else float(resid)
        g, a = d["gains"], d["anchors"]
        if kind == "reversible":
            m = ReversibleDMP(ks, w, np.array(g["K"], float), np.array(g["D"], float),
                              np.array(a["y0"], float), np.array(a["g"], float), cs, resid)
            if m.y0.shape != (m.n_dofs,) or np.array(a["g"]).shape != (m.n_dofs,):
                raise ValidationError("anchor sizes do not match the weight columns")
            return m
        if kind == "classical":
            dd = d["demo"]
            demo = Trajectory(np.array(dd["t"], float), np.array(dd["y"], float),
                              np.array(dd["yd"], float), np.array(dd["ydd"], float))
            gt = d["gating"]
            m = ClassicalDMP(ks, w, float(g["alpha_z"]), float(g["beta_z"]),
                             Gating(gt["kind"], float(gt["a_g"]), float(gt["center"])),
                             np.array(a["y0"], float), np.array(a["g"], float), cs, demo, resid)
            if m.w.shape[0] != ks.n or np.shape(a["y0"]) != (m.n_dofs,) or demo.n_dofs != m.n_dofs:
                raise ValidationError("classical model arrays have inconsistent sizes")
            return m
        if kind == "orientation":
            return OrientationDMP(ks, w, np.array(g["K"], float), np.array(g["D"], float),
                                  np.array(a["Q0"], float), np.array(a["Qg"], float), cs, resid)
        raise ValidationError(f"unknown model kind {kind!r}")
    except ValidationError:
        raise
    except (KeyError, TypeError, IndexError) as e:
        raise ValidationError(f"malformed model file: missing or invalid field {e}") from None
    except RevDMPError as e:
        raise ValidationError(f"model violates invariant: {e}") from None
    except ValueError as e:
        raise ValidationError(f"malformed model file: {e}") from None


def dumps_model(model: Model, provenance: Optional[dict] = None) -> str:
    return json.dumps(model_to_dict(model, provenance), sort_keys=True, indent=1, allow_nan=False) + "\n"


def save_model(model: Model, path, provenance: Optional[dict] = None, sidecar: bool = True) -> None:
    """Write ``model`` as canonical JSON; a timestamp goes to ``<path>.meta.json``."""
    with open(path, "w") as fh:
        fh.write(dumps_model(model, provenance))
    if sidecar:
        meta = {"created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(meta, fh, sort_keys=True, indent=1)
            fh.write("\n")


def load_model_with_provenance(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as e:
        raise ValidationError(f"model file is not valid JSON: {e}") from None
    model = model_from_dict(d)
    return model, d.get("provenance", {})


def load_model(path) -> Model:
    return load_model_with_provenance(path)[0]


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# --------------------------------------------------------------------------
# trajectories


def _fmt(v) -> str:
    return repr(float(v))


def trajectory_columns(traj) -> list:
    if isinstance(traj, QuaternionTrajectory):
        return list(QUAT_COLUMNS)
    n = traj.n_dofs
    return (["t", "phase"] + [f"y{i}" for i in range(n)] + [f"dy{i}" for i in range(n)]
            + [f"ddy{i}" for i in range(n)])


def trajectory_rows(traj) -> np.ndarray:
    if isinstance(traj, QuaternionTrajectory):
        return np.column_stack((traj.t, traj.Q, traj.omega, traj.omega_dot, traj.eta))
    return np.column_stack((traj.t, traj.x, traj.y, traj.yd, traj.ydd))


def write_trajectory(traj, path, meta: Optional[dict] = None) -> None:
    """CSV with a one-line header; ``meta`` (if given) goes to ``<path>.meta.json``."""
    rows = trajectory_rows(traj)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_columns(traj))
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    if meta is not None:
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(_jsonable(meta), fh, sort_keys=True, indent=1)
            fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return None if math.isnan(float(obj)) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _read_table(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except UnicodeDecodeError:
        raise ValidationError(f"{path}: not a text CSV file") from None
    if not rows:
        raise ValidationError(f"{path}: no samples (empty file)")
    header = [c.strip() for c in rows[0]]
    if len(rows) < 2:
        raise ValidationError(f"{path}: no samples (header only)")
    if len(set(header)) != len(header):
        raise ValidationError(f"{path}: duplicate column names")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as e:
        raise ValidationError(f"{path}: non-numeric value ({e})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValidationError(f"{path}: rows do not match the header width")
    if not np.all(np.isfinite(data)):
        raise ValidationError(f"{path}: non-finite values")
    if "t" not in header:
        raise ValidationError(f"{path}: missing 't' column")
    t = data[:, header.index("t")]
    if len(t) >= 2 and np.any(np.diff(t) <= 0):
        raise ValidationError(f"{path}: time column must be strictly increasing")
    return header, data


def read_trajectory(path):
    """Read a trajectory CSV written by :func:`write_trajectory`."""
    header, data = _read_table(path)
    col = {name: data[:, i] for i, name in enumerate(header)}
    if header == QUAT_COLUMNS:
        return QuaternionTrajectory(col["t"], data[:, 1:5], data[:, 5:8], data[:, 8:11], data[:, 11:14],
                                    np.full((len(data), 3), np.nan), np.full((len(data), 3), np.nan),
                                    np.full(len(data), np.nan))
    n = sum(1 for h in header if h.startswith("y"))
    if n == 0 or header != trajectory_columns(Trajectory(col["t"], np.zeros((len(data), n)),
                                                         np.zeros((len(data), n)), np.zeros((len(data), n)))):
        raise ValidationError(f"{path}: unrecognized trajectory columns {header}")
    return Trajectory(col["t"], data[:, 2:2 + n], data[:, 2 + n:2 + 2 * n], data[:, 2 + 2 * n:],
                      col["phase"], None)


def trajectory_positions(traj) -> np.ndarray:
    """Position-like columns used for comparisons (``eta`` for orientation)."""
    return traj.eta if isinstance(traj, QuaternionTrajectory) else traj.y


# --------------------------------------------------------------------------
# demonstrations


def read_demo(path):
    """Demonstration CSV: ``t`` plus one column per DoF.

    A ``phase`` column is ignored. Columns ``d<name>``/``dd<name>`` are read
    as velocity/acceleration of DoF ``<name>`` when present.

    Returns
    -------
    Trajectory (velocities/accelerations NaN when absent) or, for files with
    ``qw, qx, qy, qz`` columns, a tuple ``(t, Q)``.
    """
    header, data = _read_table(path)
    col = {name: data[:, i] for i, name in enumerate(header)}
    t = col["t"]
    if len(t) < 2:
        raise ValidationError(f"{path}: need at least 2 samples")
    if {"qw", "qx", "qy", "qz"} <= set(header):
        return t, np.column_stack([col[c] for c in ("qw", "qx", "qy", "qz")])
    names = [h for h in header if h not in ("t", "phase")]
    # "dx" is the velocity of "x" (and "ddx" its acceleration) when "x" exists
    dofs = [h for h in names if not (h.startswith("d") and h[1:] in names)
            and not (h.startswith("dd") and h[2:] in names)]
    if not dofs:
        raise ValidationError(f"{path}: no position columns")
    y = np.column_stack([col[h] for h in dofs])
    nan = np.full_like(y, np.nan)
    yd = np.column_stack([col.get("d" + h, nan[:, 0]) for h in dofs])
    ydd = np.column_stack([col.get("dd" + h, nan[:, 0]) for h in dofs])
    return Trajectory(t, y, yd, ydd, meta={"source": os.path.basename(str(path)), "columns": dofs})


def write_demo(traj: Trajectory, path, names=None, derivatives: bool = False) -> None:
    names = names or [f"y{i}" for i in range(traj.n_dofs)]
    header = ["t"] + list(names)
    cols = [traj.t] + [traj.y[:, i] for i in range(traj.n_dofs)]
    if derivatives:
        header += ["d" + n for n in names] + ["dd" + n for n in names]
        cols += [traj.yd[:, i] for i in range(traj.n_dofs)] + [traj.ydd[:, i] for i in range(traj.n_dofs)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in np.column_stack(cols):
            w.writerow([_fmt(v) for v in r])


def write_quaternion_demo(t, Q, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "qw", "qx", "qy", "qz"])
        for r in np.column_stack((t, Q)):
            w.writerow([_fmt(v) for v in r])
