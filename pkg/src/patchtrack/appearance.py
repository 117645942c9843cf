"""Per-patch template model: candidate likelihood, weight adaptation, and
the occlusion-aware tri-state template update.

A patch whose appearance barely changed is Visible and its template is
replaced by the observation; a patch that changed too much is Occluded and
its template is frozen; anything in between is Partial and blended.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import KindMismatch, MissingPatch
from .features import FeatureConfig, FeatureHistogram, FeatureKind, FrameFeatures
from .imaging import BBox, Image
from .segmentation import PatchLayout, patch_pixel_geometry
from .structure import SpatialGraph


class PatchState(Enum):
    VISIBLE = "visible"
    PARTIAL = "partial"
    OCCLUDED = "occluded"


@dataclass(frozen=True)
class AppearanceParams:
    sigma: float = 0.2      # shared likelihood bandwidth (Eq. 5 and weight update)
    alpha: float = 0.05     # weight adaptation speed
    tau_low: float = 0.15   # below: Visible
    tau_high: float = 0.4   # above: Occluded
    beta: float = 0.1       # Partial-state template blend rate

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0.0 <= self.alpha <= 1.0 or not 0.0 <= self.beta <= 1.0:
            raise ValueError("alpha and beta must be in [0, 1]")
        if self.tau_low >= self.tau_high:
            raise ValueError("tau_low must be below tau_high")


@dataclass(frozen=True)
class PatchTemplate:
    id: int
    dominant: FeatureKind
    hist: FeatureHistogram
    weight: float
    state: PatchState = PatchState.VISIBLE


@dataclass(frozen=True)
class TemplateModel:
    layout: PatchLayout
    patches: tuple[PatchTemplate, ...]
    graph: SpatialGraph
    sigma: float

    def __post_init__(self):
        if abs(sum(p.weight for p in self.patches) - 1.0) > 1e-9:
            raise ValueError("patch weights must sum to 1")
        if {p.id for p in self.patches} != {pr.id for pr in self.layout.patches}:
            raise ValueError("patch ids must match the layout")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def patch(self, patch_id: int) -> PatchTemplate:
        for p in self.patches:
            if p.id == patch_id:
                return p
        raise MissingPatch(f"no patch {patch_id}")


def patch_window(position: tuple[float, float], pw: int, ph: int,
                 width: int, height: int) -> tuple[int, int, int, int]:
    """Integer window (r0, r1, c0, c1) of a patch centered at `position`,
    clamped to the frame."""
    c0 = int(round(position[0] - pw / 2.0))
    r0 = int(round(position[1] - ph / 2.0))
    c1, r1 = c0 + pw, r0 + ph
    return max(r0, 0), min(r1, height), max(c0, 0), min(c1, width)


def patch_distances(frame: Image, candidate: BBox, model: TemplateModel,
                    positions: Mapping[int, tuple[float, float]],
                    feats: FrameFeatures | None = None,
                    cfg: FeatureConfig = FeatureConfig()) -> dict[int, float]:
    """Distance of each localized patch to its template histogram.

    Regions are taken at the localized centers with the layout's pixel
    sizes for the candidate box; windows are clamped at frame borders.
    """
    if feats is None:
        feats = FrameFeatures(frame, cfg)
    geometry = patch_pixel_geometry(model.layout, int(round(candidate.w)),
                                    int(round(candidate.h)))
    out: dict[int, float] = {}
    for patch, (_, _, pw, ph) in zip(model.patches, geometry):
        if patch.id not in positions:
            raise MissingPatch(f"no position for patch {patch.id}")
        r0, r1, c0, c1 = patch_window(positions[patch.id], pw, ph,
                                      feats.width, feats.height)
        sqrt_template = np.sqrt(patch.hist.bins)
        out[patch.id] = feats.window_distance(patch.dominant, r0, r1, c0, c1,
                                              sqrt_template)
    return out


def candidate_likelihood(distances: Mapping[int, float], model: TemplateModel) -> float:
    """exp(-(sum_b w_b * rho_b) / (2 sigma^2)), normalization fixed to 1."""
    acc = 0.0
    for patch in model.patches:
        if patch.id not in distances:
            raise MissingPatch(f"no distance for patch {patch.id}")
        acc += patch.weight * distances[patch.id]
    return math.exp(-acc / (2.0 * model.sigma ** 2))


def update_weights(model: TemplateModel, distances: Mapping[int, float],
                   params: AppearanceParams) -> TemplateModel:
    """Blend patch weights toward the normalized per-patch reliabilities
    exp(-rho/(2 sigma^2)); the result stays a convex combination."""
    rhos = []
    for patch in model.patches:
        if patch.id not in distances:
            raise MissingPatch(f"no distance for patch {patch.id}")
        rhos.append(distances[patch.id])
    exponents = -np.asarray(rhos) / (2.0 * model.sigma ** 2)
    delta = np.exp(exponents - exponents.max())
    delta /= delta.sum()
    new_w = np.array([(1.0 - params.alpha) * p.weight for p in model.patches])
    new_w += params.alpha * delta
    new_w /= new_w.sum()
    patches = tuple(replace(p, weight=float(w)) for p, w in zip(model.patches, new_w))
    return replace(model, patches=patches)


def classify_occlusion(rho: float, params: AppearanceParams) -> PatchState:
    """Visible below tau_low, Occluded above tau_high, Partial in between
    (both boundaries belong to the middle band)."""
    if rho < params.tau_low:
        return PatchState.VISIBLE
    if rho > params.tau_high:
        return PatchState.OCCLUDED
    return PatchState.PARTIAL


def update_template(model: TemplateModel, observed: Mapping[int, FeatureHistogram],
                    distances: Mapping[int, float],
                    params: AppearanceParams) -> TemplateModel:
    """Tri-state template update: replace Visible, freeze Occluded, blend
    Partial patches."""
    patches = []
    for patch in model.patches:
        if patch.id not in observed or patch.id not in distances:
            raise MissingPatch(f"no observation for patch {patch.id}")
        obs = observed[patch.id]
        if obs.kind is not patch.dominant:
            raise KindMismatch(f"patch {patch.id}: observed {obs.kind}, "
                               f"template {patch.dominant}")
        state = classify_occlusion(distances[patch.id], params)
        if state is PatchState.VISIBLE:
            hist = obs
        elif state is PatchState.OCCLUDED:
            hist = patch.hist
        else:
            blended = (1.0 - params.beta) * patch.hist.bins + params.beta * obs.bins
            hist = FeatureHistogram(patch.dominant, blended / blended.sum())
        patches.append(replace(patch, hist=hist, state=state))
    return replace(model, patches=tuple(patches))
