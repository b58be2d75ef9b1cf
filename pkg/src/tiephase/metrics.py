"""Error scoring between exact and candidate phase maps over a disk mask."""

from __future__ import annotations

import numpy as np

from .fields import DiskMask, ScalarField


class UndefinedMetricError(ValueError):
    """Raised when the reference phase vanishes over the whole mask."""


def _check_geometry(exact: ScalarField, candidate: ScalarField, mask: DiskMask) -> None:
    if (exact.m, exact.a) != (candidate.m, candidate.a):
        raise ValueError("exact and candidate maps must share the grid")
    if mask.m != exact.m:
        raise ValueError("mask size does not match the maps")


def rms_error(exact: ScalarField, candidate: ScalarField, mask: DiskMask,
              root: bool = False) -> float:
    """Relative squared error of a candidate phase map over the mask.

    The score is the masked sum of squared differences divided by the
    masked sum of squared exact values. This squared form is the default
    everywhere; root=True returns its square root instead.

    Raises
    ------
    UndefinedMetricError
        If the exact map is identically zero over the mask.
    """
    _check_geometry(exact, candidate, mask)
    keep = mask.data
    denom = float(np.sum(exact.data[keep] ** 2))
    if denom == 0.0:
        raise UndefinedMetricError("exact phase vanishes over the mask")
    num = float(np.sum((exact.data[keep] - candidate.data[keep]) ** 2))
    ratio = num / denom
    return float(np.sqrt(ratio)) if root else ratio


def error_map(exact: ScalarField, candidate: ScalarField, mask: DiskMask) -> ScalarField:
    """Signed difference candidate - exact inside the mask, zero outside."""
    _check_geometry(exact, candidate, mask)
    diff = np.where(mask.data, candidate.data - exact.data, 0.0)
    return ScalarField(exact.m, exact.a, diff)


def offset_correct(candidate: ScalarField, exact: ScalarField, mask: DiskMask) -> ScalarField:
    """Remove the masked mean error from a candidate map.

    Subtracting the mean of (candidate - exact) over the mask minimises the
    masked squared error over all constant shifts, so the corrected map
    never scores worse than the input.
    """
    _check_geometry(exact, candidate, mask)
    keep = mask.data
    offset = float(np.mean(candidate.data[keep] - exact.data[keep]))
    return ScalarField(candidate.m, candidate.a, candidate.data - offset)
