"""Seed-centric evaluation glue shared by the GA, SS and SMC drivers."""

from __future__ import annotations

import numpy as np

from .core import (MisinterpretationSpec, NormBall, classification_indicator_batch,
                   prediction_loss, prediction_loss_batch, region_membership_batch)
from .discrepancy import discrepancy_batch
from .errors import SeedMisclassified
from .sue import SueHandle


class SeedEvaluator:
    """Caches the seed's prediction and reference explanation, then scores batches.

    J is the prediction-margin loss against the seed's class; D is the
    discrepancy of a perturbed point's attribution map against the seed's map.
    """

    def __init__(self, sue: SueHandle, ball: NormBall, spec: MisinterpretationSpec,
                 seed_point: np.ndarray | None = None, standardize: bool = False):
        self.sue = sue
        self.ball = ball
        self.spec = spec
        self.standardize = standardize
        self.seed_point = ball.center if seed_point is None else np.asarray(seed_point, float)
        self.seed_probs = np.asarray(sue.classify_batch(self.seed_point[None, :]))[0]
        self.ref_map = np.asarray(sue.explain_batch(self.seed_point[None, :]))[0]
        self.seed_label = int(np.argmax(self.seed_probs))
        self.j_at_seed = prediction_loss(self.seed_probs, self.seed_probs)
        self.shape = sue.image_shape

    def require_confident_seed(self):
        if self.j_at_seed >= 0:
            raise SeedMisclassified(
                f"seed margin J(x,x) = {self.j_at_seed:.6g} >= 0; top class is not strict")

    def j_batch(self, points: np.ndarray) -> np.ndarray:
        probs = self.sue.classify_batch(points)
        return prediction_loss_batch(self.seed_probs, probs)

    def d_batch(self, points: np.ndarray) -> np.ndarray:
        maps = self.sue.explain_batch(points)
        return discrepancy_batch(self.spec.metric, self.ref_map, maps,
                                 shape=self.shape, standardize=self.standardize)

    def jd_batch(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.j_batch(points), self.d_batch(points)

    def indicator_weighted_d(self, points: np.ndarray) -> np.ndarray:
        """I_c * D, the signed discrepancy used as the preserved-label property."""
        j, d = self.jd_batch(points)
        return classification_indicator_batch(j) * d

    def hits(self, points: np.ndarray) -> np.ndarray:
        j, d = self.jd_batch(points)
        return region_membership_batch(self.spec, d, j)
