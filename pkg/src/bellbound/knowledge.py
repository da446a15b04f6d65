"""Knowledge, knowledge excess, distinguishability, and the Bell-factor bound.

Every quantity is computed along two independent paths - a direct trace over
the conditional decomposition and the Bloch-form closed expression - and the
two are cross-checked to 1e-12 on every call.  A disagreement raises
``RuntimeError`` because it can only come from an implementation bug.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from .core import (
    BlochForm,
    QubitMeasurement,
    TwoQubitState,
    are_complementary,
    conditional_decompose,
    decompose,
    projectors,
)
from .errors import NotComplementary

CROSSCHECK_TOL = 1e-12
DEGENERATE_DIRECTION = 1e-12


@dataclass(frozen=True)
class KnowledgeReport:
    """Knowledge quantities for one (meter measurement -> signal measurement) pair."""

    K: float
    P: float
    deltaK: float
    D: float
    deltaD: float


@dataclass(frozen=True)
class BoundCheck:
    """Result of testing a sum of squared knowledge excesses against its bound."""

    sum_of_squares: float
    bound: float
    slack: float
    b_max: float


class ExcessOptimum(NamedTuple):
    """Measurement quadruple maximizing the excess sum, plus the bound check."""

    pi_s: QubitMeasurement
    pi_s_prime: QubitMeasurement
    pi_m: QubitMeasurement
    pi_m_prime: QubitMeasurement
    check: BoundCheck


def _crosscheck(name: str, bloch_value: float, trace_value: float) -> None:
    if abs(bloch_value - trace_value) > CROSSCHECK_TOL:
        raise RuntimeError(
            f"dual-path disagreement in {name}: bloch={bloch_value!r} trace={trace_value!r}"
        )


def _helstrom_operator(state: TwoQubitState, pi_signal: QubitMeasurement) -> np.ndarray:
    """w rho_M - w_perp rho_M_perp via the conditional decomposition."""
    cd = conditional_decompose(state, pi_signal)
    return cd.w * cd.rho_M - cd.w_perp * cd.rho_M_perp


def _apriori_both_paths(state: TwoQubitState, pi_signal: QubitMeasurement, form: BlochForm) -> float:
    p_bloch = abs(float(form.n @ pi_signal.axis))
    cd = conditional_decompose(state, pi_signal)
    _crosscheck("apriori", p_bloch, abs(cd.w - cd.w_perp))
    return p_bloch


def knowledge(state: TwoQubitState, pi_meter: QubitMeasurement, pi_signal: QubitMeasurement) -> float:
    """Fractional excess of right over wrong guesses of the signal outcome,
    given the meter outcome: K = sum_i |tr Pi_Mi (w rho_M - w_perp rho_M_perp)|."""
    form = decompose(state)
    s = pi_signal.axis
    k_bloch = max(abs(float(form.n @ s)), abs(float((form.T.T @ s) @ pi_meter.axis)))
    gamma = _helstrom_operator(state, pi_signal)
    proj_plus, proj_minus = projectors(pi_meter)
    k_trace = abs(float(np.trace(proj_plus @ gamma).real)) + abs(
        float(np.trace(proj_minus @ gamma).real)
    )
    _crosscheck("knowledge", k_bloch, k_trace)
    return k_bloch


def apriori(state: TwoQubitState, pi_signal: QubitMeasurement) -> float:
    """Guessing excess with no meter measurement at all: P = |w - w_perp| = |n.s|."""
    return _apriori_both_paths(state, pi_signal, decompose(state))


def knowledge_excess(
    state: TwoQubitState, pi_meter: QubitMeasurement, pi_signal: QubitMeasurement
) -> float:
    """Prediction improvement attributable to the meter measurement: K - P."""
    form = decompose(state)
    s = pi_signal.axis
    p = _apriori_both_paths(state, pi_signal, form)
    k_bloch = max(abs(float(form.n @ s)), abs(float((form.T.T @ s) @ pi_meter.axis)))
    gamma = _helstrom_operator(state, pi_signal)
    proj_plus, proj_minus = projectors(pi_meter)
    k_trace = abs(float(np.trace(proj_plus @ gamma).real)) + abs(
        float(np.trace(proj_minus @ gamma).real)
    )
    _crosscheck("knowledge", k_bloch, k_trace)
    excess = k_bloch - p
    # K = max(P, |...|) >= P holds exactly in floating point; no clamping, a
    # negative excess would mean a real bug.
    assert excess >= 0.0
    return excess


def distinguishability(state: TwoQubitState, pi_signal: QubitMeasurement) -> float:
    """Maximum knowledge over all meter measurements: the Helstrom trace norm."""
    form = decompose(state)
    s = pi_signal.axis
    d_bloch = max(abs(float(form.n @ s)), float(np.linalg.norm(form.T.T @ s)))
    gamma = _helstrom_operator(state, pi_signal)
    d_trace = float(np.sum(np.abs(np.linalg.eigvalsh(gamma))))
    _crosscheck("distinguishability", d_bloch, d_trace)
    return d_bloch


def distinguishability_excess(state: TwoQubitState, pi_signal: QubitMeasurement) -> float:
    """D - P = max(0, |T^T s| - |n.s|)."""
    form = decompose(state)
    s = pi_signal.axis
    return max(0.0, float(np.linalg.norm(form.T.T @ s)) - abs(float(form.n @ s)))


def knowledge_report(
    state: TwoQubitState, pi_meter: QubitMeasurement, pi_signal: QubitMeasurement
) -> KnowledgeReport:
    """All knowledge quantities for one meter/signal measurement pair."""
    k = knowledge(state, pi_meter, pi_signal)
    p = apriori(state, pi_signal)
    d = distinguishability(state, pi_signal)
    return KnowledgeReport(K=k, P=p, deltaK=k - p, D=d, deltaD=d - p)


def optimal_meter(state: TwoQubitState, pi_signal: QubitMeasurement) -> QubitMeasurement:
    """Helstrom measurement: meter axis along ``T^T s``.

    When ``|T^T s|`` vanishes every meter measurement is equally
    uninformative; the +z axis is returned with ``degenerate`` set.
    """
    form = decompose(state)
    direction = form.T.T @ pi_signal.axis
    norm = float(np.linalg.norm(direction))
    if norm < DEGENERATE_DIRECTION:
        return QubitMeasurement(np.array([0.0, 0.0, 1.0]), degenerate=True)
    meter = QubitMeasurement(direction / norm)
    _crosscheck(
        "optimal_meter", knowledge(state, meter, pi_signal), distinguishability(state, pi_signal)
    )
    return meter


def bell_max(state: TwoQubitState) -> float:
    """Maximal CHSH Bell factor: 2 sqrt of the sum of the two largest
    eigenvalues of T^T T (invariant under local unitaries)."""
    t = decompose(state).T
    eigenvalues = np.linalg.eigvalsh(t.T @ t)
    return 2.0 * float(np.sqrt(max(eigenvalues[-1], 0.0) + max(eigenvalues[-2], 0.0)))


def _require_complementary(pi_s: QubitMeasurement, pi_s_prime: QubitMeasurement) -> None:
    if not are_complementary(pi_s, pi_s_prime):
        raise NotComplementary(float(pi_s.axis @ pi_s_prime.axis))


def check_bound(
    state: TwoQubitState,
    pi_s: QubitMeasurement,
    pi_s_prime: QubitMeasurement,
    pi_m: QubitMeasurement,
    pi_m_prime: QubitMeasurement,
) -> BoundCheck:
    """Test the central inequality: for complementary signal measurements,
    deltaK^2 + deltaK'^2 <= (B_max / 2)^2 for any pair of meter measurements."""
    _require_complementary(pi_s, pi_s_prime)
    dk = knowledge_excess(state, pi_m, pi_s)
    dk_prime = knowledge_excess(state, pi_m_prime, pi_s_prime)
    b = bell_max(state)
    total = dk * dk + dk_prime * dk_prime
    bound = (b / 2.0) ** 2
    return BoundCheck(sum_of_squares=total, bound=bound, slack=bound - total, b_max=b)


def check_same_meter_bound(
    state: TwoQubitState,
    pi_s: QubitMeasurement,
    pi_s_prime: QubitMeasurement,
    pi_m: QubitMeasurement,
) -> BoundCheck:
    """Single-meter variant: deltaK(m->s)^2 + deltaK(m->s')^2 <= 1.

    With two independent meter measurements the unit bound can be exceeded;
    this check always compares against 1 (``b_max`` is reported for context).
    """
    _require_complementary(pi_s, pi_s_prime)
    dk = knowledge_excess(state, pi_m, pi_s)
    dk_prime = knowledge_excess(state, pi_m, pi_s_prime)
    total = dk * dk + dk_prime * dk_prime
    return BoundCheck(sum_of_squares=total, bound=1.0, slack=1.0 - total, b_max=bell_max(state))


def _proper_rotation_factors(t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD ``T = O_S diag(d) O_M^T`` with both factors proper rotations.

    Reflection parity is absorbed into the sign of the smallest diagonal
    entry, so ``|d|`` stays in descending order.
    """
    u, sv, vt = np.linalg.svd(t)
    o_s = u.copy()
    o_m = vt.T.copy()
    d = sv.copy()
    if np.linalg.det(o_s) < 0.0:
        o_s[:, 2] *= -1.0
        d[2] = -d[2]
    if np.linalg.det(o_m) < 0.0:
        o_m[:, 2] *= -1.0
        d[2] = -d[2]
    return o_s, d, o_m


def optimize_excess_sum(state: TwoQubitState) -> ExcessOptimum:
    """Maximize deltaK^2 + deltaK'^2 over complementary signal pairs and meters.

    The meter measurements are always Helstrom-optimal given the signal axes,
    which reduces the search to the 3-parameter signal frame.  The analytic
    seed takes the signal axes from the two leading singular directions of
    the correlation matrix; a Nelder-Mead direct search with three restarts
    then refines the frame (improvement threshold 1e-10).
    """
    form = decompose(state)
    t = form.T
    n = form.n

    def negated_objective(rotvec: np.ndarray) -> float:
        frame = Rotation.from_rotvec(rotvec).as_matrix()
        s, s_prime = frame[:, 0], frame[:, 1]
        dd = max(0.0, float(np.linalg.norm(t.T @ s)) - abs(float(n @ s)))
        dd_prime = max(0.0, float(np.linalg.norm(t.T @ s_prime)) - abs(float(n @ s_prime)))
        return -(dd * dd + dd_prime * dd_prime)

    o_s, _, _ = _proper_rotation_factors(t)
    seed = Rotation.from_matrix(o_s).as_rotvec()
    starts = [seed, seed + np.array([0.4, -0.3, 0.2]), seed + np.array([-0.25, 0.35, -0.45])]
    best = None
    for start in starts:
        result = minimize(
            negated_objective,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
        )
        if best is None or result.fun < best.fun:
            best = result
    frame = Rotation.from_rotvec(best.x).as_matrix()
    pi_s = QubitMeasurement(frame[:, 0])
    pi_s_prime = QubitMeasurement(frame[:, 1])
    pi_m = optimal_meter(state, pi_s)
    pi_m_prime = optimal_meter(state, pi_s_prime)
    check = check_bound(state, pi_s, pi_s_prime, pi_m, pi_m_prime)
    return ExcessOptimum(pi_s, pi_s_prime, pi_m, pi_m_prime, check)
