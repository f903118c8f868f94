"""Binary field serialization and trajectory export.

Layout (all little-endian): magic "CARL", format version, d, M, n_time as
uint32, then the values row-major as complex pairs of 8-byte floats.  A JSON
sidecar (<file>.json) carries the same geometry plus free-form metadata, and
trajectory exports add a manifest with dt, T, scheme and a potential hash.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .evolution import EvolutionConfig, Trajectory
from .lattice import LatticeField, LatticeWindow

_MAGIC = b"CARL"
_VERSION = 1


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_field(path, field_or_values, window: LatticeWindow | None = None,
                n_time: int = 1, metadata: dict | None = None) -> list:
    """Write a field (or stacked snapshots) plus its JSON sidecar; returns
    the written paths."""
    path = Path(path)
    if isinstance(field_or_values, LatticeField):
        window = field_or_values.window
        values = field_or_values.values
        n_time = 1
    else:
        values = np.asarray(field_or_values)
        if window is None:
            raise ValueError("window required for raw value arrays")
    flat = np.ascontiguousarray(values.astype(np.complex128)).astype("<c16")
    header = _MAGIC + struct.pack("<III", _VERSION, window.d, window.M) + struct.pack("<I", n_time)
    path.write_bytes(header + flat.tobytes())
    sidecar = {
        "format": "carleman-field",
        "version": _VERSION,
        "d": window.d,
        "M": window.M,
        "n_time": n_time,
        "byte_order": "little",
        "value_layout": "row-major complex pairs, 8-byte floats",
        "metadata": metadata or {},
    }
    sc = _sidecar_path(path)
    sc.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return [path, sc]


def read_field(path):
    """Returns (values, window, metadata); values keep their time axis when
    n_time > 1."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path} is not a carleman field file")
    version, d, M = struct.unpack("<III", raw[4:16])
    if version != _VERSION:
        raise ValueError(f"unsupported field format version {version}")
    (n_time,) = struct.unpack("<I", raw[16:20])
    window = LatticeWindow(d, M)
    count = n_time * window.site_count
    values = np.frombuffer(raw[20:], dtype="<c16", count=count).astype(np.complex128)
    shape = ((n_time,) if n_time > 1 else ()) + window.shape
    values = values.reshape(shape)
    meta = {}
    sc = _sidecar_path(path)
    if sc.exists():
        meta = json.loads(sc.read_text()).get("metadata", {})
    return values, window, meta


def write_trajectory(directory, traj: Trajectory, stem: str = "trajectory") -> list:
    """One binary per snapshot plus a manifest (dt, T, scheme, potential hash)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    files = []
    for i in range(traj.n_stored):
        p = directory / f"{stem}_{i:05d}.bin"
        written += write_field(p, traj.values[i], traj.window,
                               metadata={"t": float(traj.times[i])})
        files.append(p.name)
    manifest = {
        "format": "carleman-trajectory",
        "dt": traj.config.dt,
        "T": traj.config.T,
        "scheme": traj.config.scheme_tag,
        "store_every": traj.config.store_every,
        "potential_sha256": traj.config.potential_hash(),
        "times": [float(t) for t in traj.times],
        "snapshots": files,
        "scale_log": traj.scale_log,
    }
    mpath = directory / f"{stem}_manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written + [mpath]


def read_trajectory(directory, stem: str = "trajectory"):
    """Returns (times, stacked values, window, manifest dict)."""
    directory = Path(directory)
    manifest = json.loads((directory / f"{stem}_manifest.json").read_text())
    snaps = []
    window = None
    for name in manifest["snapshots"]:
        values, window, _ = read_field(directory / name)
        snaps.append(values)
    return np.array(manifest["times"]), np.array(snaps), window, manifest
