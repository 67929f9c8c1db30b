"""Harmonic regression model: frequency grid, regressor vectors, predictions.

The regressor at time index k is [1, cos(q_0 k), sin(q_0 k), ...,
cos(q_h k), sin(q_h k)] with q_i = 2*pi*(i+1)/T, so a parameter vector is
ordered [dc, a_0, b_0, ..., a_h, b_h].  Angles are always computed directly
from k (no incremental rotation), so regenerating a regressor is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NyquistError, RangeError


@dataclass(frozen=True)
class HarmonicModel:
    """Fundamental period ``period`` (samples per cycle) plus ``harmonics``
    higher-order multiples; dimension n = 2*(harmonics+1) + 1."""

    period: float
    harmonics: int
    frequencies: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.period <= 0.0:
            raise RangeError(f"period must be positive, got {self.period!r}")
        if self.harmonics < 0:
            raise RangeError(f"harmonics must be >= 0, got {self.harmonics!r}")
        freqs = 2.0 * math.pi * np.arange(1, self.harmonics + 2) / self.period
        if freqs[-1] >= math.pi:
            raise NyquistError(
                f"top frequency {freqs[-1]:.6g} reaches the Nyquist limit pi; "
                f"reduce harmonics or increase the period"
            )
        object.__setattr__(self, "frequencies", freqs)

    @property
    def dim(self) -> int:
        return 2 * (self.harmonics + 1) + 1


def make_harmonic_model(period: float, harmonics: int) -> HarmonicModel:
    return HarmonicModel(period=period, harmonics=harmonics)


def regressor_at(model: HarmonicModel, k: int) -> np.ndarray:
    """Regressor vector phi_k of length model.dim."""
    angles = model.frequencies * float(k)
    phi = np.empty(model.dim)
    phi[0] = 1.0
    phi[1::2] = np.cos(angles)
    phi[2::2] = np.sin(angles)
    return phi


def regressor_matrix(model: HarmonicModel, indices) -> np.ndarray:
    """Rows of regressors for an array of time indices (len(indices) x dim)."""
    idx = np.asarray(indices, dtype=float).ravel()
    angles = idx[:, None] * model.frequencies[None, :]
    phi = np.empty((idx.size, model.dim))
    phi[:, 0] = 1.0
    phi[:, 1::2] = np.cos(angles)
    phi[:, 2::2] = np.sin(angles)
    return phi


def _check_theta(model: HarmonicModel, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != model.dim:
        raise DimensionError(
            f"parameter vector has length {theta.size}, model dimension is {model.dim}"
        )
    return theta


def predict(model: HarmonicModel, theta, k: int) -> float:
    """Full-model prediction phi_k^T theta."""
    theta = _check_theta(model, theta)
    return float(regressor_at(model, k) @ theta)


def predict_first_harmonic(model: HarmonicModel, theta, k: int) -> float:
    """dc + fundamental-harmonic part of the prediction; higher harmonics excluded."""
    theta = _check_theta(model, theta)
    angle = model.frequencies[0] * float(k)
    return float(theta[0] + theta[1] * math.cos(angle) + theta[2] * math.sin(angle))
