"""Color and gradient-orientation histograms, histogram distance, and
dominant-feature selection.

Histograms are L1-normalized float64 vectors. The distance between two
histograms is the Hellinger form sqrt(1 - sum(sqrt(p*q))): 0 means
identical, 1 means disjoint support.

FrameFeatures precomputes per-pixel bin assignments for a whole frame so
that many window histograms (one per candidate placement) can be evaluated
quickly, either one at a time or as dense response maps via integral
images. Window results match hoc()/hog() on the cropped region.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyInput, KindMismatch, LengthMismatch, MissingKind, RegionTooSmall
from .imaging import Image, luminance_map


class FeatureKind(Enum):
    HOC = "hoc"
    HOG = "hog"


# Selection order; ties in discriminability resolve toward HOC.
_KIND_ORDER = (FeatureKind.HOC, FeatureKind.HOG)

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class FeatureConfig:
    hoc_h_bins: int = 8
    hoc_s_bins: int = 8
    hoc_v_bins: int = 4
    hog_orientations: int = 9

    def __post_init__(self):
        for n in (self.hoc_h_bins, self.hoc_s_bins, self.hoc_v_bins, self.hog_orientations):
            if n < 2:
                raise ValueError("all bin counts must be >= 2")

    @property
    def hoc_bins(self) -> int:
        return self.hoc_h_bins * self.hoc_s_bins * self.hoc_v_bins

    def bins_for(self, kind: FeatureKind) -> int:
        return self.hoc_bins if kind is FeatureKind.HOC else self.hog_orientations


@dataclass(frozen=True)
class FeatureHistogram:
    kind: FeatureKind
    bins: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.float64)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("histogram must be a 1-D vector with >= 2 bins")
        if np.any(b < 0):
            raise ValueError("histogram bins must be nonnegative")
        if abs(float(b.sum()) - 1.0) > _NORM_TOL:
            raise ValueError("histogram must be L1-normalized")
        b.setflags(write=False)
        object.__setattr__(self, "bins", b)


def uniform_histogram(kind: FeatureKind, n_bins: int) -> FeatureHistogram:
    return FeatureHistogram(kind, np.full(n_bins, 1.0 / n_bins))


def rgb_to_hsv(data: np.ndarray) -> np.ndarray:
    """Vectorized RGB(uint8) -> HSV, all channels in [0, 1]."""
    rgb = data.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    safe = np.where(delta > 0, delta, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(r == maxc, bc - gc, np.where(g == maxc, 2.0 + rc - bc, 4.0 + gc - rc))
    h = np.where(delta > 0, (h / 6.0) % 1.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def _hoc_bin_map(data: np.ndarray, cfg: FeatureConfig) -> np.ndarray:
    """Joint HSV bin index per pixel, values in [0, hoc_bins)."""
    hsv = rgb_to_hsv(data)
    hb = np.minimum((hsv[..., 0] * cfg.hoc_h_bins).astype(np.int64), cfg.hoc_h_bins - 1)
    sb = np.minimum((hsv[..., 1] * cfg.hoc_s_bins).astype(np.int64), cfg.hoc_s_bins - 1)
    vb = np.minimum((hsv[..., 2] * cfg.hoc_v_bins).astype(np.int64), cfg.hoc_v_bins - 1)
    return (hb * cfg.hoc_s_bins + sb) * cfg.hoc_v_bins + vb


def _hog_votes(lum: np.ndarray, n_bins: int):
    """Per-pixel magnitude-weighted votes split between the two nearest
    unsigned-orientation bins. Border pixels carry zero votes."""
    gx = np.zeros_like(lum)
    gy = np.zeros_like(lum)
    gx[:, 1:-1] = (lum[:, 2:] - lum[:, :-2]) / 2.0
    gy[1:-1, :] = (lum[2:, :] - lum[:-2, :]) / 2.0
    mag = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    t = theta / (np.pi / n_bins) - 0.5
    f = np.floor(t)
    frac = t - f
    b0 = f.astype(np.int64) % n_bins
    b1 = (b0 + 1) % n_bins
    return b0, b1, mag * (1.0 - frac), mag * frac


def hoc(region: Image, cfg: FeatureConfig = FeatureConfig()) -> FeatureHistogram:
    """Joint HSV color histogram of a region."""
    bm = _hoc_bin_map(region.data, cfg)
    counts = np.bincount(bm.ravel(), minlength=cfg.hoc_bins).astype(np.float64)
    return FeatureHistogram(FeatureKind.HOC, counts / counts.sum())


def hog(region: Image, cfg: FeatureConfig = FeatureConfig()) -> FeatureHistogram:
    """Unsigned gradient-orientation histogram over interior pixels.

    Central differences need a 1-px ring, so the region must be at least
    3x3. A gradient-free region yields the uniform histogram.
    """
    if region.height < 3 or region.width < 3:
        raise RegionTooSmall(f"hog needs >= 3x3, got {region.width}x{region.height}")
    n = cfg.hog_orientations
    b0, b1, v0, v1 = _hog_votes(luminance_map(region), n)
    inner = np.s_[1:-1, 1:-1]
    hist = (np.bincount(b0[inner].ravel(), weights=v0[inner].ravel(), minlength=n)
            + np.bincount(b1[inner].ravel(), weights=v1[inner].ravel(), minlength=n))
    total = hist.sum()
    if total == 0.0:
        return uniform_histogram(FeatureKind.HOG, n)
    return FeatureHistogram(FeatureKind.HOG, hist / total)


def feature_distance(a: FeatureHistogram, b: FeatureHistogram) -> float:
    """Hellinger-form distance sqrt(1 - Bhattacharyya coefficient) in [0, 1]."""
    if a.kind is not b.kind:
        raise KindMismatch(f"{a.kind} vs {b.kind}")
    if a.bins.shape != b.bins.shape:
        raise LengthMismatch(f"{a.bins.size} vs {b.bins.size} bins")
    bc = float(np.sqrt(a.bins * b.bins).sum())
    return float(np.sqrt(1.0 - min(max(bc, 0.0), 1.0)))


def select_dominant(part_feats: Mapping[FeatureKind, FeatureHistogram],
                    rivals: Sequence[Mapping[FeatureKind, FeatureHistogram]]) -> FeatureKind:
    """Pick the feature kind that best separates a part from its rivals.

    Discriminability of a kind is the distance to the *closest* rival under
    that kind; the kind with the largest worst-case separation wins.
    """
    if not rivals:
        raise EmptyInput("dominant-feature selection needs at least one rival")
    best_kind = None
    best_score = -1.0
    for kind in _KIND_ORDER:
        if kind not in part_feats:
            continue
        worst = 1.0
        for rival in rivals:
            if kind not in rival:
                raise MissingKind(f"rival lacks {kind}")
            worst = min(worst, feature_distance(part_feats[kind], rival[kind]))
        if worst > best_score:
            best_kind = kind
            best_score = worst
    if best_kind is None:
        raise EmptyInput("part has no features")
    return best_kind


# Keep the one-hot scratch arrays of a response-map chunk under ~32 MB.
_CHUNK_BUDGET = 4 << 20


class FrameFeatures:
    """Per-frame bin maps for fast window histograms and response maps."""

    def __init__(self, frame: Image, cfg: FeatureConfig = FeatureConfig()):
        self.cfg = cfg
        self.height = frame.height
        self.width = frame.width
        self.hoc_map = _hoc_bin_map(frame.data, cfg)
        self._hog_b0, self._hog_b1, self._hog_v0, self._hog_v1 = _hog_votes(
            luminance_map(frame), cfg.hog_orientations)

    def window_bins(self, kind: FeatureKind, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
        """Normalized histogram of the window [r0:r1, c0:c1]; same values as
        hoc()/hog() on the cropped region."""
        if kind is FeatureKind.HOC:
            counts = np.bincount(self.hoc_map[r0:r1, c0:c1].ravel(),
                                 minlength=self.cfg.hoc_bins).astype(np.float64)
            return counts / counts.sum()
        if r1 - r0 < 3 or c1 - c0 < 3:
            raise RegionTooSmall("hog window below 3x3")
        n = self.cfg.hog_orientations
        inner = np.s_[r0 + 1:r1 - 1, c0 + 1:c1 - 1]
        hist = (np.bincount(self._hog_b0[inner].ravel(),
                            weights=self._hog_v0[inner].ravel(), minlength=n)
                + np.bincount(self._hog_b1[inner].ravel(),
                              weights=self._hog_v1[inner].ravel(), minlength=n))
        total = hist.sum()
        if total == 0.0:
            return np.full(n, 1.0 / n)
        return hist / total

    def window_distance(self, kind: FeatureKind, r0: int, r1: int, c0: int, c1: int,
                        sqrt_template: np.ndarray) -> float:
        p = self.window_bins(kind, r0, r1, c0, c1)
        bc = float(np.sqrt(p) @ sqrt_template)
        return float(np.sqrt(1.0 - min(max(bc, 0.0), 1.0)))

    def response_map(self, kind: FeatureKind, sqrt_template: np.ndarray,
                     size: tuple[int, int], ty: tuple[int, int],
                     tx: tuple[int, int]) -> np.ndarray:
        """Distance-to-template for every in-bounds window placement.

        size is (ph, pw); ty/tx are half-open ranges of window top-left
        coordinates, all of which must keep the window inside the frame.
        Returns an array of shape (ty1-ty0, tx1-tx0).
        """
        ph, pw = size
        ty0, ty1 = ty
        tx0, tx1 = tx
        if not (0 <= ty0 < ty1 and ty1 + ph - 1 <= self.height):
            raise ValueError("ty range out of bounds")
        if not (0 <= tx0 < tx1 and tx1 + pw - 1 <= self.width):
            raise ValueError("tx range out of bounds")
        n_bins = self.cfg.bins_for(kind)
        rows_per_chunk = max(1, _CHUNK_BUDGET // (max(tx1 - tx0 + pw, 1) * n_bins))
        chunks = []
        y = ty0
        while y < ty1:
            y_hi = min(y + rows_per_chunk, ty1)
            chunks.append(self._response_chunk(kind, sqrt_template, ph, pw,
                                               y, y_hi, tx0, tx1))
            y = y_hi
        return np.concatenate(chunks, axis=0) if len(chunks) > 1 else chunks[0]

    def _response_chunk(self, kind: FeatureKind, sqrt_template: np.ndarray,
                        ph: int, pw: int, ty0: int, ty1: int,
                        tx0: int, tx1: int) -> np.ndarray:
        ny, nx = ty1 - ty0, tx1 - tx0
        if kind is FeatureKind.HOC:
            n = self.cfg.hoc_bins
            sub = self.hoc_map[ty0:ty0 + ny + ph - 1, tx0:tx0 + nx + pw - 1]
            h, w = sub.shape
            onehot = np.zeros((h, w, n), np.float32)
            ii, jj = np.indices((h, w))
            onehot[ii, jj, sub] = 1.0
            integral = np.zeros((h + 1, w + 1, n), np.float32)
            np.cumsum(onehot, axis=0, out=onehot)
            np.cumsum(onehot, axis=1, out=onehot)
            integral[1:, 1:] = onehot
            counts = (integral[ph:ph + ny, pw:pw + nx]
                      - integral[0:ny, pw:pw + nx]
                      - integral[ph:ph + ny, 0:nx]
                      + integral[0:ny, 0:nx])
            # 0/1 cumsums stay exact below 2^24, so counts are true integers
            p = counts.astype(np.float64) / float(ph * pw)
            bc = np.einsum("yxb,b->yx", np.sqrt(p), sqrt_template)
            return np.sqrt(1.0 - np.clip(bc, 0.0, 1.0))

        if ph < 3 or pw < 3:
            raise RegionTooSmall("hog window below 3x3")
        n = self.cfg.hog_orientations
        # votes for window (y, x) come from its interior rect at (y+1, x+1)
        r0, c0 = ty0 + 1, tx0 + 1
        h, w = ny + ph - 3, nx + pw - 3
        sl = np.s_[r0:r0 + h, c0:c0 + w]
        votes = np.zeros((h, w, n), np.float64)
        ii, jj = np.indices((h, w))
        votes[ii, jj, self._hog_b0[sl]] = self._hog_v0[sl]
        votes[ii, jj, self._hog_b1[sl]] += self._hog_v1[sl]
        integral = np.zeros((h + 1, w + 1, n), np.float64)
        np.cumsum(votes, axis=0, out=votes)
        np.cumsum(votes, axis=1, out=votes)
        integral[1:, 1:] = votes
        ih, iw = ph - 2, pw - 2
        sums = (integral[ih:ih + ny, iw:iw + nx]
                - integral[0:ny, iw:iw + nx]
                - integral[ih:ih + ny, 0:nx]
                + integral[0:ny, 0:nx])
        totals = sums.sum(axis=-1)
        safe = np.where(totals > 0, totals, 1.0)
        p = sums / safe[..., None]
        bc = np.einsum("yxb,b->yx", np.sqrt(np.maximum(p, 0.0)), sqrt_template)
        rho = np.sqrt(1.0 - np.clip(bc, 0.0, 1.0))
        if np.any(totals <= 0):
            uni = np.full(n, 1.0 / n)
            bc_u = float(np.sqrt(uni) @ sqrt_template)
            rho_u = float(np.sqrt(1.0 - min(max(bc_u, 0.0), 1.0)))
            rho = np.where(totals > 0, rho, rho_u)
        return rho
