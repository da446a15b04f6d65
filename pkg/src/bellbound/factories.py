"""State factories and Werner-state closed forms used as oracles throughout."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TwoQubitState, validate_state
from .errors import NotAProbabilityVector, OutOfRange

KET_HH = np.array([1, 0, 0, 0], dtype=complex)
KET_HV = np.array([0, 1, 0, 0], dtype=complex)
KET_VH = np.array([0, 0, 1, 0], dtype=complex)
KET_VV = np.array([0, 0, 0, 1], dtype=complex)

# Bell basis, fixed order: Phi+, Phi-, Psi+, Psi-.
BELL_KETS = (
    (KET_HH + KET_VV) / math.sqrt(2),
    (KET_HH - KET_VV) / math.sqrt(2),
    (KET_HV + KET_VH) / math.sqrt(2),
    (KET_HV - KET_VH) / math.sqrt(2),
)

# Positivity bounds of the Werner family p*|Psi-><Psi-| + (1-p)/4 * 1.
WERNER_P_MIN = -1.0 / 3.0
WERNER_P_MAX = 1.0


@dataclass(frozen=True)
class WernerPrediction:
    """Closed-form knowledge quantities of a Werner state at given analyzer angles."""

    K: float
    K_prime: float
    P: float
    P_prime: float
    b_max: float


def werner(p: float) -> TwoQubitState:
    """Werner state: singlet fraction ``p`` mixed with white noise.

    Valid over the full positivity interval -1/3 <= p <= 1 (negative p flips
    the sign of the correlation matrix).
    """
    p = float(p)
    if not (WERNER_P_MIN - 1e-12 <= p <= WERNER_P_MAX + 1e-12):
        raise OutOfRange(f"werner parameter p = {p} outside [-1/3, 1]")
    singlet = np.outer(BELL_KETS[3], BELL_KETS[3].conj())
    return validate_state(p * singlet + (1.0 - p) / 4.0 * np.eye(4))


def bell_diagonal(lambdas) -> TwoQubitState:
    """Mixture of the four Bell projectors, weights in the order Phi+, Phi-, Psi+, Psi-."""
    lams = np.asarray(lambdas, dtype=float).reshape(-1)
    if lams.shape != (4,):
        raise NotAProbabilityVector(f"expected 4 weights, got {lams.shape[0]}")
    if np.any(lams < 0.0):
        raise NotAProbabilityVector(f"negative weight: min = {lams.min():.6e}")
    if abs(lams.sum() - 1.0) > 1e-10:
        raise NotAProbabilityVector(f"weights sum to {lams.sum():.12f}, expected 1 (limit 1e-10)")
    rho = np.zeros((4, 4), dtype=complex)
    for lam, ket in zip(lams, BELL_KETS):
        rho += lam * np.outer(ket, ket.conj())
    return validate_state(rho)


def _random_state_from_rng(rng: np.random.Generator, ancilla_dim: int) -> TwoQubitState:
    """Mixed state induced from a Gaussian-random pure state on a 4 x d system."""
    amplitudes = rng.normal(size=(4, ancilla_dim)) + 1j * rng.normal(size=(4, ancilla_dim))
    amplitudes /= np.linalg.norm(amplitudes)
    return validate_state(amplitudes @ amplitudes.conj().T)


def random_state(seed: int, ancilla_dim: int) -> TwoQubitState:
    """Deterministic random mixed state of rank <= ``ancilla_dim``.

    Uses a counter-based generator keyed by (seed, ancilla_dim), so the same
    arguments produce bit-identical states on every platform.
    """
    ancilla_dim = int(ancilla_dim)
    if not 1 <= ancilla_dim <= 4:
        raise ValueError(f"ancilla_dim must be in 1..4, got {ancilla_dim}")
    key = np.array([int(seed) % 2**64, ancilla_dim], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return _random_state_from_rng(rng, ancilla_dim)


def werner_prediction(p: float, theta_deg: float, theta_prime_deg: float) -> WernerPrediction:
    """Theoretical knowledge quantities for a Werner state.

    K is evaluated for the H/V signal basis with the meter analyzer at
    ``theta``; K' for the X/Y basis with the analyzer at ``theta_prime``:
    K = p|cos 2theta|, K' = p|sin 2theta'|, P = P' = 0, B_max = 2 sqrt(2) p.
    """
    p = float(p)
    if not (WERNER_P_MIN - 1e-12 <= p <= WERNER_P_MAX + 1e-12):
        raise OutOfRange(f"werner parameter p = {p} outside [-1/3, 1]")
    theta = math.radians(theta_deg)
    theta_prime = math.radians(theta_prime_deg)
    return WernerPrediction(
        K=abs(p * math.cos(2 * theta)),
        K_prime=abs(p * math.sin(2 * theta_prime)),
        P=0.0,
        P_prime=0.0,
        b_max=abs(p) * 2.0 * math.sqrt(2.0),
    )
