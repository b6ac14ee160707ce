"""CSV diagnostics and legacy-VTK surface output."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .integrators import EnergyReport
from .mesh import ActiveMesh

__all__ = [
    "ENERGY_CSV_HEADER",
    "EnergyCsvSink",
    "write_vtk_surface",
    "write_convergence_csv",
]

ENERGY_CSV_HEADER = "t,dt,modified_energy,E1,r,r_consistency,mass,balance_residual"


class EnergyCsvSink:
    """Append-per-step CSV writer; each row is flushed so partial runs are readable."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w")
        self._fh.write(ENERGY_CSV_HEADER + "\n")
        self._fh.flush()

    def write(self, report: EnergyReport) -> None:
        row = (
            f"{report.t:.16e},{report.dt:.16e},{report.modified_energy:.16e},"
            f"{report.e1:.16e},{report.r:.16e},{report.r_consistency:.16e},"
            f"{report.mass:.16e},{report.balance_residual:.16e}"
        )
        self._fh.write(row + "\n")
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def write_vtk_surface(path: str | Path, active: ActiveMesh, c: np.ndarray) -> None:
    """Write the reconstructed surface triangulation as legacy ASCII VTK.

    Points are the cut-polygon vertices, connectivity the per-polygon fans,
    and ``concentration`` is attached as point data by evaluating the P1
    field with the stored barycentric coordinates of each vertex.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (active.n_dofs,):
        raise ValueError(f"expected {active.n_dofs} dof values, got shape {c.shape}")
    values = np.einsum("pi,pi->p", active.poly_bary, c[active.elem_dofs[active.poly_elem]])

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        "# vtk DataFile Version 3.0",
        "trace surface",
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {len(active.poly_points)} float",
    ]
    lines.extend(" ".join(f"{x:.9g}" for x in p) for p in active.poly_points)
    tri = active.tri_index
    lines.append(f"POLYGONS {len(tri)} {4 * len(tri)}")
    lines.extend(f"3 {a} {b} {d}" for a, b, d in tri)
    lines.append(f"POINT_DATA {len(active.poly_points)}")
    lines.append("SCALARS concentration float 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(f"{v:.9g}" for v in values)
    path.write_text("\n".join(lines) + "\n")


def write_convergence_csv(path: str | Path, rows) -> None:
    """Rows carry (level, h, dt, n_dofs, error, rate); rate is blank on the first row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = ["level,h,dt,n_dofs,error,rate"]
    for row in rows:
        rate = "" if row.rate is None else f"{row.rate:.6f}"
        out.append(f"{row.level},{row.h:.16e},{row.dt:.16e},{row.n_dofs},{row.error:.16e},{rate}")
    path.write_text("\n".join(out) + "\n")
