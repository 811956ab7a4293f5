"""Independent float oracles used by the tests."""

import numpy as np

from vorefine.metrics import signed_distance


def raster_disagreement(coarse_cell, weighted_cells_, n=2048, margin=0.25):
    """Rasterize sum(w * 1_cell) and the coarse indicator at n x n pixel centres.

    Returns (number of disagreeing pixels, number of those that are not
    boundary pixels).  A pixel is a boundary pixel when its centre is
    within half a pixel diagonal of an edge of any polygon involved.
    """
    polys = [np.array(coarse_cell.float_vertices)] + [np.array(c.float_vertices) for c, _ in weighted_cells_]
    allv = np.concatenate(polys)
    x0, y0 = allv.min(axis=0) - margin
    x1, y1 = allv.max(axis=0) + margin
    side = max(x1 - x0, y1 - y0)
    h = side / n
    c = (np.arange(n) + 0.5) * h
    xs, ys = x0 + c, y0 + c
    near = np.zeros((n, n), bool)
    total = np.zeros((n, n))
    target = np.zeros((n, n))
    for k, verts in enumerate(polys):
        # only pixels in the polygon's bounding box can be inside or near it
        lo, hi = verts.min(axis=0) - h, verts.max(axis=0) + h
        ix = slice(np.searchsorted(xs, lo[0]), np.searchsorted(xs, hi[0]))
        iy = slice(np.searchsorted(ys, lo[1]), np.searchsorted(ys, hi[1]))
        X, Y = np.meshgrid(xs[ix], ys[iy])
        sd = signed_distance(verts, np.stack([X, Y], axis=-1))
        near[iy, ix] |= np.abs(sd) <= h * 0.7072
        if k == 0:
            target[iy, ix] += sd < 0
        else:
            total[iy, ix] += weighted_cells_[k - 1][1] * (sd < 0)
    bad = np.abs(total - target) > 1e-12
    return int(bad.sum()), int((bad & ~near).sum())


def weighted_cells(report, families, k):
    """(polygon, float weight) for the nonzero weights of coarse prototype k."""
    c = report.cells[k]
    out = []
    for u, v in sorted(c.result.weights.items()):
        if v:
            j, cid = c.system.unknowns[u]
            out.append((families.family(j).cell(cid), float(v)))
    return out
