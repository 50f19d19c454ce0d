"""File formats: CSV tables, contour/state JSON, run manifests.

Numeric CSV columns are written with 17 significant digits and '\n' line
endings so repeated runs with identical parameters produce byte-identical
columns.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .contour import FourierContour, SpectralGrid, sample
from .continuation import Branch


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_contour(path: Path, contour: FourierContour) -> None:
    write_json(path, contour.to_dict())


def load_contour(path: Path) -> FourierContour:
    with open(path) as fh:
        return FourierContour.from_dict(json.load(fh))


def save_boundary_csv(path: Path, contour: FourierContour, grid: SpectralGrid) -> None:
    z, _ = sample(contour, grid)
    rows = zip(grid.nodes, z.real, z.imag)
    write_csv(path, ["theta", "x", "y"], rows)


def save_state(path: Path, kind: str, omega: float, contours, grid: SpectralGrid,
               report=None) -> None:
    payload = {
        "kind": kind,
        "omega": omega,
        "fold": contours[0].fold,
        "node_count": grid.node_count,
        "contours": [c.to_dict() for c in contours],
    }
    if report is not None:
        payload["report"] = {
            "converged": report.converged,
            "iterations": report.iterations,
            "final_sup_norm": report.final_sup_norm,
            "final_coeff_norm": report.final_coeff_norm,
            "trivial": report.trivial,
        }
    write_json(path, payload)


def load_state(path: Path):
    with open(path) as fh:
        data = json.load(fh)
    contours = tuple(FourierContour.from_dict(c) for c in data["contours"])
    return data, contours


def branch_csv_rows(branch: Branch):
    doubly = branch.points and branch.points[0].gap_boundaries is not None
    header = ["omega", "a_first", "sup_residual", "gap_unit_circle"]
    if doubly:
        header.append("gap_boundaries")
    rows = []
    for p in branch.points:
        row = [p.omega, p.a_first, p.sup_residual, p.gap_unit_circle]
        if doubly:
            row.append(p.gap_boundaries)
        rows.append(row)
    return header, rows


def save_branch(csv_path: Path, json_path: Path, branch: Branch) -> None:
    header, rows = branch_csv_rows(branch)
    write_csv(csv_path, header, rows)
    payload = {
        "branch": branch.branch_label,
        "bifurcation_omega": branch.bifurcation_omega,
        "termination_reason": branch.termination_reason,
        "fold_indices": branch.fold_indices,
        "points": [
            {
                "omega": p.omega,
                "coeffs": p.coeffs.tolist(),
                "sup_residual": p.sup_residual,
                "gap_unit_circle": p.gap_unit_circle,
                "gap_boundaries": p.gap_boundaries,
                "node_count": p.node_count,
            }
            for p in branch.points
        ],
    }
    write_json(json_path, payload)


def save_snapshots_csv(path: Path, snapshots) -> None:
    """Time series of node positions: theta_index,t,x,y (boundaries stacked)."""
    rows = []
    for state in snapshots:
        offset = 0
        for nodes in state.boundaries:
            for i, z in enumerate(nodes):
                rows.append((offset + i, state.time, z.real, z.imag))
            offset += nodes.size
    write_csv(path, ["theta_index", "t", "x", "y"], rows)


def save_manifest(path: Path, command: str, args: dict, node_count: int | None,
                  outputs: list[str]) -> None:
    from . import __version__

    write_json(path, {
        "command": command,
        "parameters": args,
        "node_count": node_count,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(outputs),
    })
