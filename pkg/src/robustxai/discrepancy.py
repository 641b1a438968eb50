"""Explanation discrepancy metrics and the unified discrepancy value D.

D is mean squared error, or the inverse of a similarity (correlation or
structural similarity). Similarities are clamped to [SIM_EPS, 1] before
inversion so anticorrelated or degenerate attribution maps receive the maximal
finite discrepancy 1/SIM_EPS and quantile/fitness computations stay ordered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Metric
from .errors import ContractViolation, DegenerateVariance

SIM_EPS = 1e-6


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ContractViolation(f"attribution maps differ in length: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def pcc(a, b) -> float:
    """Pearson correlation of the flattened maps, raising on constant input."""
    a, b = _pair(a, b)
    if a.shape[0] < 2:
        raise ContractViolation("correlation needs vectors of length >= 2")
    ac = a - a.mean()
    bc = b - b.mean()
    ssa = float(ac @ ac)
    ssb = float(bc @ bc)
    if ssa == 0.0 or ssb == 0.0:
        raise DegenerateVariance("constant attribution map has undefined correlation")
    r = float(ac @ bc) / np.sqrt(ssa * ssb)
    return float(np.clip(r, -1.0, 1.0))


def ssim(a, b, shape: tuple[int, int], window: int = 7, k1: float = 0.01,
         k2: float = 0.03, dynamic_range: float | None = None) -> float:
    """Mean local structural similarity over sliding uniform windows.

    The dynamic range defaults to the joint value range of the two maps
    (attribution maps are not 8-bit images, so a fixed 255 would be wrong).
    """
    a, b = _pair(a, b)
    h, w = int(shape[0]), int(shape[1])
    if h * w != a.shape[0]:
        raise ContractViolation(f"shape {h}x{w} does not match map length {a.shape[0]}")
    if window < 1 or window > min(h, w):
        raise ContractViolation(f"window {window} does not fit a {h}x{w} image")
    if dynamic_range is None:
        joint_max = max(a.max(), b.max())
        joint_min = min(a.min(), b.min())
        dynamic_range = float(joint_max - joint_min)
    if dynamic_range == 0.0:
        # both maps are one identical constant
        return 1.0
    img_a = a.reshape(h, w)
    img_b = b.reshape(h, w)
    win_a = np.lib.stride_tricks.sliding_window_view(img_a, (window, window))
    win_b = np.lib.stride_tricks.sliding_window_view(img_b, (window, window))
    mu_a = win_a.mean(axis=(-1, -2))
    mu_b = win_b.mean(axis=(-1, -2))
    var_a = win_a.var(axis=(-1, -2))
    var_b = win_b.var(axis=(-1, -2))
    cov = (win_a * win_b).mean(axis=(-1, -2)) - mu_a * mu_b
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class DiscrepancyValue:
    """Unified discrepancy d plus the raw similarity it was derived from.

    raw_similarity is the unclamped metric value (NaN when the underlying
    correlation was degenerate); for inverse metrics d == 1/clamp(raw, SIM_EPS, 1).
    """

    d: float
    raw_similarity: float


def _invert(similarity: float) -> float:
    return 1.0 / float(np.clip(similarity, SIM_EPS, 1.0))


def discrepancy_value(metric: Metric, a, b, shape: tuple[int, int] | None = None,
                      standardize: bool = False, **ssim_params) -> DiscrepancyValue:
    metric = Metric(metric)
    if standardize:
        a = _standardize(np.asarray(a, dtype=np.float64).ravel())
        b = _standardize(np.asarray(b, dtype=np.float64).ravel())
    if metric is Metric.MSE:
        v = mse(a, b)
        return DiscrepancyValue(d=v, raw_similarity=v)
    if metric is Metric.INV_PCC:
        try:
            r = pcc(a, b)
        except DegenerateVariance:
            return DiscrepancyValue(d=1.0 / SIM_EPS, raw_similarity=float("nan"))
        return DiscrepancyValue(d=_invert(r), raw_similarity=r)
    if shape is None:
        raise ContractViolation("INV_SSIM needs the 2-D image shape")
    s = ssim(a, b, shape, **ssim_params)
    return DiscrepancyValue(d=_invert(s), raw_similarity=s)


def _standardize(v: np.ndarray) -> np.ndarray:
    centered = v - v.mean()
    sd = centered.std()
    return centered / sd if sd > 0 else centered


def pcc_batch(ref: np.ndarray, maps: np.ndarray) -> np.ndarray:
    """Correlations of each row of `maps` against `ref`; NaN marks degeneracy."""
    ref = np.asarray(ref, dtype=np.float64).ravel()
    maps = np.atleast_2d(np.asarray(maps, dtype=np.float64))
    if maps.shape[1] != ref.shape[0]:
        raise ContractViolation("attribution maps differ in length")
    rc = ref - ref.mean()
    ss_ref = float(rc @ rc)
    mc = maps - maps.mean(axis=1, keepdims=True)
    ss_rows = np.einsum("ij,ij->i", mc, mc)
    out = np.full(maps.shape[0], np.nan)
    if ss_ref == 0.0:
        return out
    valid = ss_rows > 0.0
    out[valid] = np.clip((mc[valid] @ rc) / np.sqrt(ss_ref * ss_rows[valid]), -1.0, 1.0)
    return out


def discrepancy_batch(metric: Metric, ref: np.ndarray, maps: np.ndarray,
                      shape: tuple[int, int] | None = None,
                      standardize: bool = False) -> np.ndarray:
    """Vectorized discrepancy of each row of `maps` against the reference map."""
    metric = Metric(metric)
    ref = np.asarray(ref, dtype=np.float64).ravel()
    maps = np.atleast_2d(np.asarray(maps, dtype=np.float64))
    if standardize:
        ref = _standardize(ref)
        maps = maps - maps.mean(axis=1, keepdims=True)
        sd = maps.std(axis=1, keepdims=True)
        maps = np.divide(maps, sd, out=maps.copy(), where=sd > 0)
    if metric is Metric.MSE:
        return np.mean((maps - ref) ** 2, axis=1)
    if metric is Metric.INV_PCC:
        r = pcc_batch(ref, maps)
        r = np.where(np.isnan(r), -np.inf, r)  # degenerate rows clamp to SIM_EPS below
        return 1.0 / np.clip(r, SIM_EPS, 1.0)
    if shape is None:
        raise ContractViolation("INV_SSIM needs the 2-D image shape")
    return np.array([discrepancy_value(metric, ref, row, shape=shape).d for row in maps])
