"""Object-to-patch division via 1-D projection profiles and threshold clustering.

A region is reduced to a per-column (or per-row) mean-luminance profile,
scanned left to right: a new cluster starts whenever two neighbouring
profile values differ by more than a threshold. Bands come from the longer
box side; one optional level of subdivision splits each band along the
other axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imaging import BBox, Image, crop, luminance_map

COLUMNS = "columns"
ROWS = "rows"

_EPS_TC = 1e-12


@dataclass(frozen=True)
class Profile:
    values: np.ndarray
    axis: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("profile must be a non-empty 1-D sequence")
        if self.axis not in (COLUMNS, ROWS):
            raise ValueError(f"unknown axis {self.axis!r}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Segment:
    start: int  # inclusive
    end: int    # inclusive


@dataclass(frozen=True)
class PatchRect:
    """One patch; rect = (x, y, w, h) normalized to the object box."""

    id: int
    rect: tuple[float, float, float, float]


@dataclass(frozen=True)
class PatchLayout:
    patches: tuple[PatchRect, ...]


@dataclass(frozen=True)
class SegmentationParams:
    t_c_mode: str = "relative"     # "absolute" or "relative"
    t_c_value: float = 0.5         # relative: fraction of profile stddev
    min_band_px: int = 8
    max_patches: int = 12
    subdivide: bool = True

    def __post_init__(self):
        if self.t_c_value <= 0:
            raise ValueError("t_c_value must be positive")
        if self.min_band_px < 1 or self.max_patches < 1:
            raise ValueError("min_band_px and max_patches must be >= 1")
        if self.t_c_mode not in ("absolute", "relative"):
            raise ValueError(f"unknown t_c_mode {self.t_c_mode!r}")


def project(img: Image, axis: str) -> Profile:
    """Mean luminance per column (axis=columns) or per row (axis=rows)."""
    lum = luminance_map(img)
    if axis == COLUMNS:
        return Profile(lum.mean(axis=0), COLUMNS)
    if axis == ROWS:
        return Profile(lum.mean(axis=1), ROWS)
    raise ValueError(f"unknown axis {axis!r}")


def cluster_profile(p: Profile, t_c: float) -> list[Segment]:
    """Partition profile indices; index j+1 joins the running segment iff
    |v[j] - v[j+1]| <= t_c."""
    v = p.values
    segments: list[Segment] = []
    start = 0
    for j in range(len(v) - 1):
        if abs(v[j] - v[j + 1]) > t_c:
            segments.append(Segment(start, j))
            start = j + 1
    segments.append(Segment(start, len(v) - 1))
    return segments


def _threshold(values: np.ndarray, params: SegmentationParams) -> float:
    if params.t_c_mode == "absolute":
        return params.t_c_value
    return max(params.t_c_value * float(np.std(values)), _EPS_TC)


def _merge_narrow(bounds: list[tuple[int, int]], values: np.ndarray,
                  min_px: int) -> list[tuple[int, int]]:
    """Fold bands shorter than min_px into the neighbour whose profile mean
    is closer (left/upper neighbour on ties)."""
    bounds = list(bounds)
    while len(bounds) > 1:
        means = [float(values[a:b].mean()) for a, b in bounds]
        idx = next((i for i, (a, b) in enumerate(bounds) if b - a < min_px), None)
        if idx is None:
            break
        if idx == 0:
            nbr = 1
        elif idx == len(bounds) - 1:
            nbr = idx - 1
        else:
            d_left = abs(means[idx] - means[idx - 1])
            d_right = abs(means[idx] - means[idx + 1])
            nbr = idx - 1 if d_left <= d_right else idx + 1
        lo, hi = min(idx, nbr), max(idx, nbr)
        bounds[lo:hi + 1] = [(bounds[lo][0], bounds[hi][1])]
    return bounds


def _cluster_axis(values: np.ndarray, params: SegmentationParams) -> list[tuple[int, int]]:
    """Cluster one profile into end-exclusive (start, stop) bounds, then
    apply the minimum band width."""
    t_c = _threshold(values, params)
    segs = cluster_profile(Profile(values, COLUMNS), t_c)
    bounds = [(s.start, s.end + 1) for s in segs]
    return _merge_narrow(bounds, values, params.min_band_px)


def _merge_to_max(rects: list[tuple[int, int, int, int]], lum: np.ndarray,
                  max_patches: int) -> list[tuple[int, int, int, int]]:
    """Greedily merge the adjacent rect pair with the smallest mean-luminance
    difference until at most max_patches remain. Only pairs whose union is a
    rectangle are candidates."""
    rects = sorted(rects)
    while len(rects) > max_patches:
        means = [float(lum[r0:r1, c0:c1].mean()) for r0, r1, c0, c1 in rects]
        best = None
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                a, b = rects[i], rects[j]
                side_by_side = a[0] == b[0] and a[1] == b[1] and (a[3] == b[2] or b[3] == a[2])
                stacked = a[2] == b[2] and a[3] == b[3] and (a[1] == b[0] or b[1] == a[0])
                if not (side_by_side or stacked):
                    continue
                diff = abs(means[i] - means[j])
                if best is None or diff < best[0]:
                    best = (diff, i, j)
        if best is None:
            break
        _, i, j = best
        a, b = rects[i], rects[j]
        merged = (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))
        rects = sorted([r for k, r in enumerate(rects) if k not in (i, j)] + [merged])
    return rects


def segment_object(img: Image, box: BBox, params: SegmentationParams) -> PatchLayout:
    """Divide the object region into patches.

    Bands are clustered along the longer box side (rows when h >= w), each
    band optionally split once along the other axis, and the result merged
    down to at most max_patches. Rects are normalized to the clamped box.
    """
    region = crop(img, box)
    lum = luminance_map(region)
    h, w = lum.shape
    primary_rows = h >= w

    primary_values = lum.mean(axis=1) if primary_rows else lum.mean(axis=0)
    bands = _cluster_axis(primary_values, params)

    rects: list[tuple[int, int, int, int]] = []  # (r0, r1, c0, c1) end-exclusive
    for a, b in bands:
        if params.subdivide:
            sub_lum = lum[a:b, :] if primary_rows else lum[:, a:b]
            secondary = sub_lum.mean(axis=0) if primary_rows else sub_lum.mean(axis=1)
            subs = _cluster_axis(secondary, params)
        else:
            subs = [(0, w if primary_rows else h)]
        for s0, s1 in subs:
            if primary_rows:
                rects.append((a, b, s0, s1))
            else:
                rects.append((s0, s1, a, b))

    rects = _merge_to_max(rects, lum, params.max_patches)

    patches = tuple(
        PatchRect(i, (c0 / w, r0 / h, (c1 - c0) / w, (r1 - r0) / h))
        for i, (r0, r1, c0, c1) in enumerate(rects)
    )
    return PatchLayout(patches)


def patch_pixel_geometry(layout: PatchLayout, box_w: int, box_h: int
                         ) -> list[tuple[int, int, int, int]]:
    """Integer (dx, dy, pw, ph) of each patch inside a box of the given size.

    Edges are rounded jointly so adjacent patches keep shared boundaries.
    """
    out = []
    for p in layout.patches:
        rx, ry, rw, rh = p.rect
        x0 = int(round(rx * box_w))
        x1 = int(round((rx + rw) * box_w))
        y0 = int(round(ry * box_h))
        y1 = int(round((ry + rh) * box_h))
        out.append((x0, y0, max(x1 - x0, 1), max(y1 - y0, 1)))
    return out
