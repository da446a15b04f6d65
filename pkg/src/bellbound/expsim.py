"""Coincidence-counting experiment simulator and count-based estimators.

Count sign convention: in ``C^{ab}`` the first sign is the meter outcome and
the second the signal outcome.  Shot noise is modeled as an independent
Poisson draw per outcome channel with a flat accidental-coincidence term; the
generator is counter-based (Philox) with one stream per (point, channel), so
fixed seeds give bit-identical counts on every platform and for any degree of
parallelism over points.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import QubitMeasurement, TwoQubitState, measurement_from_polarization_angle, projectors, validate_state
from .errors import EmptyRecord, OutOfRange
from .factories import BELL_KETS, KET_HH, KET_HV, KET_VH, KET_VV, werner, werner_prediction

# Meter/signal analyzer angle pairs (degrees) used for the Bell-factor estimate.
BELL_ANGLE_PAIRS = ((22.5, 45.0), (67.5, 45.0), (22.5, 0.0), (67.5, 0.0))

SIGNAL_BASES = ("hv", "xy")


@dataclass(frozen=True)
class CountRecord:
    """Four coincidence counts; first index sign = meter outcome, second = signal."""

    c_pp: int
    c_pm: int
    c_mp: int
    c_mm: int

    def __post_init__(self):
        for name in ("c_pp", "c_pm", "c_mp", "c_mm"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"count {name} must be a non-negative integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.c_pp + self.c_pm + self.c_mp + self.c_mm


@dataclass(frozen=True)
class ExperimentConfig:
    """Noise model parameters for one measurement point.

    ``pair_rate`` is the detected coincidence-pair rate (detector efficiency
    already folded in) and ``dark_coincidence_rate`` the accidental rate per
    outcome channel, both in 1/s.
    """

    pair_rate: float
    duration: float
    dark_coincidence_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.pair_rate < 0 or self.duration < 0 or self.dark_coincidence_rate < 0:
            raise ValueError("rates and duration must be non-negative")


@dataclass(frozen=True)
class MixingModel:
    """Three-component preparation of a noisy singlet.

    ``visibility`` is the two-photon interference visibility of the singlet
    component; the weights are the effective mixing fractions (proportional
    to rate x duration of each input configuration) of the interferometric
    component and the two parallel-polarization components.
    """

    visibility: float
    w_singlet: float
    w_hh: float
    w_vv: float

    def __post_init__(self):
        if not -1e-12 <= self.visibility <= 1.0 + 1e-12:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        weights = (self.w_singlet, self.w_hh, self.w_vv)
        if min(weights) < -1e-12:
            raise ValueError(f"mixing weights must be non-negative, got {weights}")
        if abs(sum(weights) - 1.0) > 1e-10:
            raise ValueError(f"mixing weights must sum to 1, got {sum(weights)!r}")


@dataclass(frozen=True)
class SweepPoint:
    """Estimates at one analyzer angle of a simulated (or exact) sweep."""

    theta_deg: float
    basis: str
    counts: CountRecord | None
    k_hat: float
    p_hat: float
    dk_hat: float
    dk_theory: float


def signal_measurement(basis: str) -> QubitMeasurement:
    """The H/V or X/Y signal analyzer."""
    if basis == "hv":
        return measurement_from_polarization_angle(0.0)
    if basis == "xy":
        return measurement_from_polarization_angle(45.0)
    raise ValueError(f"unknown signal basis {basis!r}, expected one of {SIGNAL_BASES}")


def coincidence_probs(
    state: TwoQubitState, pi_meter: QubitMeasurement, pi_signal: QubitMeasurement
) -> np.ndarray:
    """Born-rule channel probabilities in the order (++, +-, -+, --).

    Index order matches :class:`CountRecord`: first sign meter, second signal.
    """
    sig = projectors(pi_signal)
    met = projectors(pi_meter)
    probs = np.array(
        [
            float(np.trace(np.kron(sig[b], met[a]) @ state.matrix).real)
            for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))
        ]
    )
    assert abs(probs.sum() - 1.0) < 1e-12
    return probs


def _channel_rng(seed: int, stream: int, channel: int) -> np.random.Generator:
    key = np.array([int(seed) % 2**64, (int(stream) << 2) | channel], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_counts(
    state: TwoQubitState,
    pi_meter: QubitMeasurement,
    pi_signal: QubitMeasurement,
    config: ExperimentConfig,
    stream: int = 0,
) -> CountRecord:
    """Poisson coincidence counts for one measurement point.

    Channel means are ``p_ab * pair_rate * duration + dark_rate * duration``;
    ``stream`` selects the RNG stream so distinct points stay independent.
    """
    probs = coincidence_probs(state, pi_meter, pi_signal)
    means = probs * config.pair_rate * config.duration + config.dark_coincidence_rate * config.duration
    counts = [
        int(_channel_rng(config.seed, stream, channel).poisson(max(mean, 0.0)))
        for channel, mean in enumerate(means)
    ]
    return CountRecord(*counts)


def exact_counts(
    state: TwoQubitState,
    pi_meter: QubitMeasurement,
    pi_signal: QubitMeasurement,
    total: int = 10**8,
) -> CountRecord:
    """Noise-free counts: channel probabilities scaled to ``total`` and rounded."""
    probs = coincidence_probs(state, pi_meter, pi_signal)
    return CountRecord(*(int(round(total * p)) for p in probs))


def _require_counts(record: CountRecord, context: str = "") -> int:
    total = record.total
    if total <= 0:
        raise EmptyRecord(f"count record has zero total{context}")
    return total


def estimate_knowledge(counts: CountRecord) -> float:
    """Knowledge from measured rates: (|C++ - C+-| + |C-+ - C--|) / total."""
    total = _require_counts(counts)
    return (abs(counts.c_pp - counts.c_pm) + abs(counts.c_mp - counts.c_mm)) / total


def estimate_apriori(counts: CountRecord) -> float:
    """A-priori knowledge from rates: |(C++ + C-+) - (C+- + C--)| / total."""
    total = _require_counts(counts)
    return abs((counts.c_pp + counts.c_mp) - (counts.c_pm + counts.c_mm)) / total


def estimate_correlation(counts: CountRecord) -> float:
    """Correlation function from rates: (C++ + C-- - C+- - C-+) / total."""
    total = _require_counts(counts)
    return (counts.c_pp + counts.c_mm - counts.c_pm - counts.c_mp) / total


def estimate_bell_max(records) -> float:
    """Bell factor from four count records at the angle pairs
    ``BELL_ANGLE_PAIRS``: |C(22.5,45) + C(67.5,45) + C(22.5,0) - C(67.5,0)|."""
    records = tuple(records)
    if len(records) != 4:
        raise ValueError(f"expected 4 count records, got {len(records)}")
    correlations = []
    for index, (record, angles) in enumerate(zip(records, BELL_ANGLE_PAIRS)):
        _require_counts(record, context=f" (record {index} at meter/signal angles {angles})")
        correlations.append(estimate_correlation(record))
    c1, c2, c3, c4 = correlations
    return abs(c1 + c2 + c3 - c4)


def mixed_state_from_model(model: MixingModel) -> TwoQubitState:
    """State prepared by the three-component mixing protocol.

    The interferometric component contributes the singlet with weight ``V``
    and the distinguishable-photon mixture of |HV> and |VH> with weight
    ``1 - V``; the parallel-polarization inputs contribute |HH> and |VV>.
    """
    singlet = np.outer(BELL_KETS[3], BELL_KETS[3].conj())
    hv = np.outer(KET_HV, KET_HV.conj())
    vh = np.outer(KET_VH, KET_VH.conj())
    hh = np.outer(KET_HH, KET_HH.conj())
    vv = np.outer(KET_VV, KET_VV.conj())
    v = model.visibility
    rho = (
        model.w_singlet * (v * singlet + (1.0 - v) * 0.5 * (hv + vh))
        + model.w_hh * hh
        + model.w_vv * vv
    )
    return validate_state(rho)


def mixing_model_from_schedule(visibility: float, durations, rates) -> MixingModel:
    """Effective mixing weights of a three-configuration measurement schedule.

    Entries are ordered (interferometric, HH, VV); each weight is proportional
    to that configuration's coincidence rate times its measurement duration.
    Unequal durations compensate configuration-dependent losses.
    """
    durations = np.asarray(durations, dtype=float).reshape(-1)
    rates = np.asarray(rates, dtype=float).reshape(-1)
    if durations.shape != (3,) or rates.shape != (3,):
        raise ValueError("expected 3 durations and 3 rates (interferometric, HH, VV)")
    if np.any(durations < 0) or np.any(rates < 0):
        raise ValueError("durations and rates must be non-negative")
    weights = durations * rates
    total = weights.sum()
    if total <= 0:
        raise ValueError("schedule yields zero total weight")
    weights = weights / total
    return MixingModel(
        visibility=float(visibility), w_singlet=weights[0], w_hh=weights[1], w_vv=weights[2]
    )


def werner_mixing_model(p: float) -> MixingModel:
    """Mixing-protocol parameters that prepare a Werner state of parameter ``p``.

    Inverse of :func:`mixed_state_from_model` on the Werner family:
    V = 2p/(1+p), w_singlet = (1+p)/2, w_hh = w_vv = (1-p)/4.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"mixing protocol requires 0 <= p <= 1, got {p}")
    return MixingModel(
        visibility=2.0 * p / (1.0 + p),
        w_singlet=(1.0 + p) / 2.0,
        w_hh=(1.0 - p) / 4.0,
        w_vv=(1.0 - p) / 4.0,
    )


def run_sweep_experiment(
    p: float,
    angles,
    config: ExperimentConfig,
    threads: int = 1,
) -> list[SweepPoint]:
    """Simulate a sweep over meter analyzer angles for a Werner state.

    ``angles`` is a sequence of ``(theta_deg, basis)`` pairs with basis "hv"
    or "xy".  Point ``i`` uses RNG stream ``i``, so output is identical
    whether points run serially or in parallel.
    """
    state = werner(p)

    def run_point(item) -> SweepPoint:
        index, (theta_deg, basis) = item
        pi_s = signal_measurement(basis)
        pi_m = measurement_from_polarization_angle(theta_deg)
        counts = simulate_counts(state, pi_m, pi_s, config, stream=index)
        k_hat = estimate_knowledge(counts)
        p_hat = estimate_apriori(counts)
        prediction = werner_prediction(p, theta_deg, theta_deg)
        theory = prediction.K if basis == "hv" else prediction.K_prime
        return SweepPoint(float(theta_deg), basis, counts, k_hat, p_hat, k_hat - p_hat, theory)

    items = list(enumerate(angles))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_point, items))
    return [run_point(item) for item in items]


def simulate_bell_records(
    state: TwoQubitState, config: ExperimentConfig, stream_offset: int = 1_000_000
) -> tuple[CountRecord, ...]:
    """Simulated counts at the four Bell-angle pairs (streams offset to avoid
    colliding with sweep points)."""
    records = []
    for index, (meter_deg, signal_deg) in enumerate(BELL_ANGLE_PAIRS):
        pi_m = measurement_from_polarization_angle(meter_deg)
        pi_s = measurement_from_polarization_angle(signal_deg)
        records.append(simulate_counts(state, pi_m, pi_s, config, stream=stream_offset + index))
    return tuple(records)


def bell_estimate_stderr(records) -> float:
    """Binomial standard error of the Bell-factor estimate from four records."""
    variance = 0.0
    for record in records:
        total = _require_counts(record)
        correlation = estimate_correlation(record)
        variance += max(0.0, 1.0 - correlation * correlation) / total
    return math.sqrt(variance)
