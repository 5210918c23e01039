"""Portable persistence of a ValueGrid: nodes CSV, values CSV and a JSON header."""

import json
import logging
from pathlib import Path

import numpy as np

from gamelab.core.artifacts import ArtifactWriter, read_csv
from gamelab.exceptions import ArtifactError
from gamelab.vi.grid import REGION_LABELS, GridParams, PenaltySchedule, ValueGrid

logger = logging.getLogger(__name__)

_LABEL_CODES = {v: k for k, v in REGION_LABELS.items()}


def bundle_names(stem: str) -> tuple[str, str, str]:
    return f"{stem}.header.json", f"{stem}.nodes.csv", f"{stem}.values.csv"


def write_bundle(writer: ArtifactWriter, ug: ValueGrid, stem: str = "value_grid") -> list[str]:
    """Write the three bundle files through writer; returns their names."""
    header_name, nodes_name, values_name = bundle_names(stem)
    d = ug.d

    node_rows = [["t", i, float(t)] for i, t in enumerate(ug.t_nodes)]
    for k, axis in enumerate(ug.axes):
        node_rows += [[f"x_{k + 1}", i, float(x)] for i, x in enumerate(axis)]
    writer.csv(nodes_name, ["axis", "index", "value"], node_rows)

    pts = ug.points()
    n_space = pts.shape[0]
    u = ug.u.reshape(ug.t_nodes.shape[0], n_space)
    g = ug.g.reshape(u.shape)
    grad = ug.grad.reshape(u.shape + (d,))
    res = ug.residual.reshape(u.shape)
    reg = ug.regions.reshape(u.shape)
    header = (
        ["t"] + [f"x_{k + 1}" for k in range(d)] + ["u", "g"]
        + [f"grad_{k + 1}" for k in range(d)] + ["residual", "region"]
    )
    rows = []
    for n, t in enumerate(ug.t_nodes):
        for i in range(n_space):
            rows.append(
                [float(t), *pts[i].tolist(), float(u[n, i]), float(g[n, i]),
                 *grad[n, i].tolist(), float(res[n, i]), REGION_LABELS[int(reg[n, i])]]
            )
    writer.csv(values_name, header, rows)

    writer.json(
        header_name,
        {
            "gamma": ug.gamma,
            "grid": ug.params.to_dict(),
            "schedule": ug.schedule.to_dict() if ug.schedule else None,
            "f": ug.f,
            "shape": [int(ug.t_nodes.shape[0]), *ug.shape],
            "summary": ug.summary,
            "stage_summaries": ug.stage_summaries,
            "files": {"nodes": nodes_name, "values": values_name},
        },
    )
    logger.debug("Wrote ValueGrid bundle %s (%d rows)", stem, len(rows))
    return [header_name, nodes_name, values_name]


def read_bundle(directory: Path, stem: str = "value_grid") -> ValueGrid:
    """Load a ValueGrid bundle written by write_bundle.

    Raises:
        ArtifactError: missing files or inconsistent shapes
    """
    directory = Path(directory)
    header_name, nodes_name, values_name = bundle_names(stem)
    header_path = directory / header_name
    if not header_path.exists():
        raise ArtifactError(f"missing bundle header {header_path}")
    header = json.loads(header_path.read_text())
    params = GridParams.from_dict(header["grid"])
    schedule = PenaltySchedule.from_dict(header["schedule"]) if header.get("schedule") else None

    _, _, node_rows = read_csv(directory / nodes_name)
    t_nodes = np.array([float(r[2]) for r in node_rows if r[0] == "t"])
    axes = tuple(
        np.array([float(r[2]) for r in node_rows if r[0] == f"x_{k + 1}"]) for k in range(params.d)
    )
    shape = tuple(header["shape"])
    if shape != (t_nodes.shape[0], *(a.shape[0] for a in axes)):
        raise ArtifactError(f"bundle {stem}: header shape {shape} does not match nodes")

    _, _, rows = read_csv(directory / values_name)
    d = params.d
    if len(rows) != int(np.prod(shape)):
        raise ArtifactError(f"bundle {stem}: expected {int(np.prod(shape))} value rows")
    numeric = np.array([[float(v) for v in r[:-1]] for r in rows])
    u = numeric[:, 1 + d].reshape(shape)
    g = numeric[:, 2 + d].reshape(shape)
    grad = numeric[:, 3 + d : 3 + 2 * d].reshape(shape + (d,))
    residual = numeric[:, 3 + 2 * d].reshape(shape)
    regions = np.array([_LABEL_CODES[r[-1]] for r in rows], dtype=np.int8).reshape(shape)
    f = np.asarray(header["f"], dtype=float)
    return ValueGrid(
        t_nodes=t_nodes,
        axes=axes,
        u=u,
        g=g,
        f=f,
        grad=grad,
        residual=residual,
        regions=regions,
        gamma=float(header["gamma"]),
        params=params,
        schedule=schedule,
        summary=header["summary"],
        stage_summaries=header.get("stage_summaries", []),
    )
