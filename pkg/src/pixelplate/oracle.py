"""Closed-form stand-in for electromagnetic simulation.

Maps a plate to a plausible (resonance frequency, |S21|) pair from three
physics-inspired features: copper fill, connectivity to the feed cross, and a
center-weighted sine-mode fill. Deterministic and fast, so the whole pipeline
(data generation, training, optimization) is testable at desk scale. It makes
no claim of electromagnetic accuracy and steps aside whenever real Touchstone
exports are available.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .geometry import CROSS_INDEX, PLATE_SIZE, PlateMatrix
from .sparams import ResonancePoint

TOTAL_CELLS = PLATE_SIZE * PLATE_SIZE  # 1849

F_MIN_GHZ = 1.0
F_SPAN_GHZ = 4.0
S_MIN_DB = -15.0
S_SPAN_DB = 13.0

# 4-connectivity: diagonal copper contact conducts poorly
_CONNECTIVITY = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)


@dataclass(frozen=True)
class OracleFeatures:
    """All three lie in [0, 1]; connectivity is 1 whenever fill is 1."""

    fill: float
    connectivity: float
    mode_weight: float


@lru_cache(maxsize=1)
def _mode_weights() -> tuple[np.ndarray, float]:
    idx = np.arange(1, PLATE_SIZE + 1, dtype=np.float64)
    w = np.sin(np.pi * idx / (PLATE_SIZE + 1))
    grid = np.outer(w, w)
    return grid, float(grid.sum())


def features(plate: PlateMatrix) -> OracleFeatures:
    """Fill fraction, feed-connected fraction, and sine-mode-weighted fill."""
    cells = plate.cells
    ones = int(cells.sum())  # >= 85: the cross is always copper

    labels, _ = ndimage.label(cells, structure=_CONNECTIVITY)
    feed_label = labels[CROSS_INDEX, CROSS_INDEX]
    connected = int((labels == feed_label).sum())

    weights, weight_total = _mode_weights()
    mode = float((cells * weights).sum()) / weight_total

    return OracleFeatures(
        fill=ones / TOTAL_CELLS,
        connectivity=connected / ones,
        mode_weight=mode,
    )


def synthetic_em(plate: PlateMatrix) -> ResonancePoint:
    """Deterministic (f_res, |S21|) from the plate's features.

    Denser, better-connected, more center-loaded plates resonate lower and
    couple harder; outputs span [1, 5] GHz and [-15, -2] dB.
    """
    ft = features(plate)
    rho, kappa, tau = ft.fill, ft.connectivity, ft.mode_weight
    f_drive = min(max(0.3 * rho + 0.5 * kappa * rho + 0.2 * tau, 0.0), 1.0)
    s_drive = min(max(kappa * float(np.sqrt(rho)) * (0.7 + 0.3 * tau), 0.0), 1.0)
    return ResonancePoint(
        f_res_ghz=F_MIN_GHZ + F_SPAN_GHZ * (1.0 - f_drive),
        s21_db=S_MIN_DB + S_SPAN_DB * s_drive,
    )
