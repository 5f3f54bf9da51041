"""Artifact writers: VTK rectilinear snapshots, headered CSV and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCALES_HEADER = "# nondimensional: length L = 1 cm, velocity U = 1 cm/s, time L/U = 1 s"


def write_vtk_rectilinear(path, x: np.ndarray, z: np.ndarray, point_data: dict[str, np.ndarray],
                          title: str = "dualweno snapshot") -> Path:
    """Legacy ASCII RECTILINEAR_GRID with one scalar per entry of ``point_data``.

    Arrays are indexed ``[ix, iz]`` on the points ``x`` by ``z``; VTK wants x
    varying fastest, hence the transpose before flattening.
    """
    path = Path(path)
    nx, nz = len(x), len(z)
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET RECTILINEAR_GRID",
             f"DIMENSIONS {nx} {nz} 1",
             f"X_COORDINATES {nx} double", " ".join(f"{v:.12g}" for v in x),
             f"Y_COORDINATES {nz} double", " ".join(f"{v:.12g}" for v in z),
             "Z_COORDINATES 1 double", "0",
             f"POINT_DATA {nx * nz}"]
    for name, values in point_data.items():
        values = np.asarray(values, dtype=float)
        if values.shape != (nx, nz):
            raise ValueError(f"{name}: shape {values.shape} does not match grid {(nx, nz)}")
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        flat = values.T.ravel()
        for start in range(0, flat.size, 8):
            lines.append(" ".join(f"{v:.12g}" for v in flat[start:start + 8]))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_vtk_rectilinear(path) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """Inverse of :func:`write_vtk_rectilinear` (only what that writer emits)."""
    tokens = Path(path).read_text().split("\n")
    it = iter(tokens[4:])
    dims = [int(v) for v in next(it).split()[1:3]]
    coords = []
    for _ in range(2):
        next(it)
        coords.append(np.array(next(it).split(), dtype=float))
    next(it), next(it)
    npts = int(next(it).split()[1])
    data = {}
    for line in it:
        if line.startswith("SCALARS"):
            name = line.split()[1]
            next(it)
            vals: list[str] = []
            while len(vals) < npts:
                vals.extend(next(it).split())
            data[name] = np.array(vals, dtype=float).reshape(dims[1], dims[0]).T
    return coords[0], coords[1], data


def write_csv(path, header: list[str], rows, comments: list[str] | None = None) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        for line in [SCALES_HEADER] + list(comments or []):
            fh.write(line if line.startswith("#") else f"# {line}")
            fh.write("\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Inventory of one run directory; timestamps live only here."""

    config: dict
    out_dir: str
    files: dict[str, str] = field(default_factory=dict)
    wall_seconds: float = 0.0
    steps: int = 0
    started: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S"))
    summary: dict = field(default_factory=dict)

    def add(self, path) -> Path:
        path = Path(path)
        self.files[str(path.relative_to(self.out_dir))] = sha256_file(path)
        return path

    def write(self) -> Path:
        path = Path(self.out_dir) / "manifest.json"
        doc = {"config": self.config, "out_dir": str(self.out_dir), "files": dict(sorted(self.files.items())),
               "wall_seconds": self.wall_seconds, "steps": self.steps, "started": self.started,
               "summary": self.summary}
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")
        return path
