"""Multiscale partitions of the node set.

At level ``j`` the nodes are split into cells ``E_{j,k}`` of diameter at
most ``b * a**j``.  Cells come from a greedy farthest-point selection of a
maximal ``(b a^j / 2)``-separated set of centers followed by
nearest-center assignment, so every cell contains its center and lies in
the ball of radius ``b a^j / 2`` around it.
"""

from dataclasses import dataclass, field
import hashlib
import json

import numpy as np

from .errors import ConstraintViolation, ScaleUnresolved


@dataclass(frozen=True)
class Cell:
    center: int
    members: tuple
    measure: float
    diameter: float


@dataclass(frozen=True)
class PartitionLevel:
    j: int
    scale: float
    cells: tuple
    subgrid: bool = False

    @property
    def centers(self):
        return np.array([c.center for c in self.cells], dtype=int)

    @property
    def measures(self):
        return np.array([c.measure for c in self.cells])

    @property
    def diameters(self):
        return np.array([c.diameter for c in self.cells])

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class MultiscalePartition:
    a: float
    b: float
    c0: float
    delta0: float
    Cfloor: float
    levels: dict = field(default_factory=dict)

    @property
    def j_range(self):
        js = sorted(self.levels)
        return js[0], js[-1]

    def __iter__(self):
        for j in sorted(self.levels):
            yield self.levels[j]

    @property
    def cell_count(self):
        return sum(len(lev) for lev in self.levels.values())

    def to_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "levels": [
                {
                    "j": lev.j,
                    "cells": [
                        {
                            "center": c.center,
                            "members": list(c.members),
                            "measure": c.measure,
                            "diameter": c.diameter,
                        }
                        for c in lev.cells
                    ],
                }
                for lev in self
            ],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    def digest(self):
        return hashlib.sha256(self.to_json(sort_keys=True).encode()).hexdigest()


def _cell_diameter(model, members):
    if len(members) < 2:
        return 0.0
    idx = np.asarray(members)
    best = 0.0
    # blockwise to bound memory on big cells
    for start in range(0, idx.size, 2048):
        block = model.distances(idx[start:start + 2048], idx)
        best = max(best, float(block.max()))
    return best


def _make_cells(model, centers, owner):
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(len(centers) + 1))
    cells = []
    for k, c in enumerate(centers):
        members = order[bounds[k]:bounds[k + 1]]
        cells.append(
            Cell(
                center=int(c),
                members=tuple(int(m) for m in members),
                measure=float(model.weights[members].sum()),
                diameter=_cell_diameter(model, members),
            )
        )
    return tuple(cells)


def _min_separation(model):
    cached = model.cache.get("min_separation")
    if cached is None:
        best = np.inf
        M = model.node_count
        for start in range(0, M, 1024):
            rows = np.arange(start, min(start + 1024, M))
            D = model.distances(rows)
            D[np.arange(rows.size), rows] = np.inf
            best = min(best, float(D.min()))
        model.cache["min_separation"] = cached = best
    return cached


def farthest_point_cells(model, radius, start=0):
    """Greedy maximal ``radius``-separated centers and nearest-center owners.

    Returns ``(centers, owner)`` where ``owner[m]`` is the position of the
    center closest to node ``m``; ties go to the earlier center.
    """
    M = model.node_count
    centers = [start]
    mind = model.distances_from(start)
    owner = np.zeros(M, dtype=int)
    while True:
        i = int(np.argmax(mind))
        if mind[i] < radius:
            break
        d = model.distances_from(i)
        closer = d < mind
        owner[closer] = len(centers)
        mind = np.where(closer, d, mind)
        centers.append(i)
    return np.array(centers, dtype=int), owner


def build_level(model, j, b, a, allow_subgrid=False):
    """Partition the nodes at scale ``b * a**j``.

    Raises :class:`ScaleUnresolved` when the mean node spacing exceeds a
    quarter of the scale, unless ``allow_subgrid`` is set, in which case
    the greedy construction is run anyway (cells degenerate towards single
    quadrature nodes).
    """
    if not 0 < b < 1:
        raise ValueError("b must lie in (0, 1)")
    scale = b * a**j
    subgrid = model.spacing > scale / 4.0
    if subgrid and not allow_subgrid:
        raise ScaleUnresolved(j, scale, model.spacing)
    M = model.node_count
    if scale >= model.diameter:
        centers, owner = np.array([0]), np.zeros(M, dtype=int)
    elif scale / 2.0 <= _min_separation(model):
        # every node is its own center
        centers, owner = np.arange(M), np.arange(M)
    else:
        centers, owner = farthest_point_cells(model, scale / 2.0)
    return PartitionLevel(j=j, scale=scale, cells=_make_cells(model, centers, owner), subgrid=subgrid)


def validate(model, partition, rtol=1e-12):
    """Check the diameter and measure floors level by level.

    Returns a report dict with one entry per level and an overall
    ``passed`` flag; each constraint is reported separately.
    """
    n = model.dim
    levels = []
    ok = {"diamleq": True, "measgeq": True, "measgeq2": True, "cover": True}
    first_failure = None
    for lev in partition:
        scale = lev.scale
        diam_ratio = float(lev.diameters.max() / scale)
        meas = lev.measures
        if scale < partition.delta0:
            floor, which = partition.c0 * scale**n, "measgeq"
        else:
            floor, which = partition.Cfloor, "measgeq2"
        meas_ratio = float(meas.min() / floor)
        members = np.sort(np.concatenate([np.asarray(c.members, dtype=int) for c in lev.cells]))
        cover = bool(np.array_equal(members, np.arange(model.node_count)))
        cover = cover and abs(meas.sum() - model.volume) <= 1e-10 * model.volume
        cover = cover and all(c.center in c.members for c in lev.cells)
        entry = {
            "j": lev.j,
            "scale": scale,
            "cells": len(lev),
            "subgrid": lev.subgrid,
            "worst_diameter_ratio": diam_ratio,
            "worst_measure_ratio": meas_ratio,
            "measure_constraint": which,
            "diamleq": diam_ratio <= 1.0 + rtol,
            which: meas_ratio >= 1.0 - rtol,
            "cover": cover,
        }
        for key in ("diamleq", which, "cover"):
            if not entry[key]:
                ok[key] = False
                if first_failure is None:
                    if key == "diamleq":
                        k = int(np.argmax(lev.diameters))
                    elif key == "cover":
                        k = -1
                    else:
                        k = int(np.argmin(meas))
                    first_failure = (lev.j, k, key)
        levels.append(entry)
    return {"levels": levels, "passed": all(ok.values()), "constraints": ok,
            "first_failure": first_failure}


def build_multiscale(model, b, a, J_min, J_max, c0=0.1, delta0=1.0, Cfloor=0.1,
                     allow_subgrid=False):
    """Build and validate levels ``J_min..J_max``.

    Raises :class:`ConstraintViolation` naming the first failing cell.
    """
    if J_min > J_max:
        raise ValueError("J_min must not exceed J_max")
    levels = {j: build_level(model, j, b, a, allow_subgrid=allow_subgrid)
              for j in range(J_min, J_max + 1)}
    part = MultiscalePartition(a=float(a), b=float(b), c0=c0, delta0=delta0, Cfloor=Cfloor,
                               levels=levels)
    report = validate(model, part)
    if not report["passed"]:
        j, k, which = report["first_failure"]
        raise ConstraintViolation(j, k, which)
    return part


def partition_from_dict(model, data, c0=0.1, delta0=1.0, Cfloor=0.1):
    """Rebuild a partition from :meth:`MultiscalePartition.to_dict` output."""
    a, b = float(data["a"]), float(data["b"])
    levels = {}
    for lev in data["levels"]:
        j = int(lev["j"])
        cells = tuple(
            Cell(int(c["center"]), tuple(int(m) for m in c["members"]), float(c["measure"]),
                 float(c["diameter"]))
            for c in lev["cells"]
        )
        scale = b * a**j
        levels[j] = PartitionLevel(j=j, scale=scale, cells=cells,
                                   subgrid=model.spacing > scale / 4.0)
    return MultiscalePartition(a=a, b=b, c0=c0, delta0=delta0, Cfloor=Cfloor, levels=levels)
