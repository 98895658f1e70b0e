"""Scalar Kalman filter for short-term request-rate estimation.

One filter per function. The covariance prediction uses the standard
P' = A*P*A + Q form (the state-based variant is dimensionally
inconsistent and can drive P negative); everything is scalar, so the
transposes of the usual matrix formulation collapse away.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import FilterDegenerateError

DEFAULT_A = 1.0
DEFAULT_Q = 4.0
DEFAULT_H = 1.0
DEFAULT_D = 16.0
DEFAULT_P0 = 1.0


@dataclass(frozen=True)
class KalmanState:
    """Filter state (R, P) plus its fixed parameters.

    R: current rate estimate (rps). P: estimate covariance.
    A: state transition. Q: process noise. H: observation scale.
    D: observation noise.
    """

    R: float
    P: float = DEFAULT_P0
    A: float = DEFAULT_A
    Q: float = DEFAULT_Q
    H: float = DEFAULT_H
    D: float = DEFAULT_D

    def __post_init__(self):
        if self.P < 0 or self.Q < 0 or self.D < 0:
            raise ValueError("P, Q, D must be non-negative")
        if self.H == 0:
            raise ValueError("H must be non-zero")


def predict_and_update(state: KalmanState, observed_rps: float) -> tuple[KalmanState, float]:
    """One predict/correct step; returns (new state, rate estimate >= 0).

    Raises FilterDegenerateError when the gain denominator H*P'*H + D
    collapses to zero (no information in either model or measurement).
    """
    if observed_rps < 0:
        raise ValueError("observed_rps must be non-negative")
    r_pred = state.A * state.R
    p_pred = state.A * state.P * state.A + state.Q
    denom = state.H * p_pred * state.H + state.D
    if denom == 0:
        raise FilterDegenerateError("H*P'*H + D == 0")
    gain = p_pred * state.H / denom
    r_new = r_pred + gain * (observed_rps - state.H * r_pred)
    p_new = (1.0 - gain * state.H) * p_pred
    new_state = replace(state, R=r_new, P=p_new)
    return new_state, max(0.0, r_new)
