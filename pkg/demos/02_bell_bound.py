"""Walkthrough: the Bell-factor bound on complementary knowledge excesses.

For any two-qubit state and any complementary pair of signal measurements,
the squared knowledge excesses obtained from two meter measurements satisfy

    dK^2 + dK'^2  <=  (B_max / 2)^2,

where B_max is the state's maximal CHSH Bell factor.  The bound is tight for
states with unbiased marginals.
"""

import numpy as np

import bellbound as bb
from bellbound.verify import fuzz_bounds

hv = bb.measurement_from_polarization_angle(0.0)
xy = bb.measurement_from_polarization_angle(45.0)

# --- the bound at the canonical angles --------------------------------------
for p in (0.82, 0.45):
    state = bb.werner(p)
    check = bb.check_bound(state, hv, xy, hv, xy)
    print(
        f"Werner({p}): B_max = {check.b_max:.4f}, sum of squared excesses = "
        f"{check.sum_of_squares:.4f}, bound = {check.bound:.4f}, slack = {check.slack:.2e}"
    )
print("Both Werner settings saturate the bound at these measurement choices.")
print("Note B_max > 2 only for p > 1/sqrt(2): the p=0.45 state is entangled")
print("yet satisfies every CHSH inequality.\n")

# --- excess-sum surface -------------------------------------------------------
state = bb.werner(0.82)
thetas = np.arange(0.0, 91.0, 1.0)
dk = [bb.knowledge_excess(state, bb.measurement_from_polarization_angle(t), hv) for t in thetas]
dkp = [bb.knowledge_excess(state, bb.measurement_from_polarization_angle(t), xy) for t in thetas]
surface = np.asarray(dk)[:, None] ** 2 + np.asarray(dkp)[None, :] ** 2
i, j = np.unravel_index(np.argmax(surface), surface.shape)
print(
    f"surface max {surface[i, j]:.6f} at (theta, theta') = ({thetas[i]:.0f}, {thetas[j]:.0f}) "
    f"deg; (B_max/2)^2 = {(bb.bell_max(state) / 2) ** 2:.6f}"
)

# --- one meter vs two ----------------------------------------------------------
# with a single meter measurement the sum can never exceed 1 ...
meter = bb.measurement_from_polarization_angle(22.5)
single = bb.check_same_meter_bound(bb.werner(1.0), hv, xy, meter)
print(f"\nsinglet, one meter at 22.5 deg: sum = {single.sum_of_squares:.4f} <= 1")
# ... but two independent meters on an entangled state can overstep it
double = bb.check_bound(bb.werner(1.0), hv, xy, hv, xy)
print(f"singlet, two meters:            sum = {double.sum_of_squares:.4f} > 1")

# --- search for the best measurements ------------------------------------------
mixed = bb.random_state(seed=4, ancilla_dim=4)
optimum = bb.optimize_excess_sum(mixed)
print(
    f"\nrandom mixed state: optimized sum = {optimum.check.sum_of_squares:.6f}, "
    f"bound = {optimum.check.bound:.6f}, slack = {optimum.check.slack:.2e}"
)
print("(a biased state generally cannot reach its bound; filtering fixes that,")
print("see 03_filtering.py)")

# --- brute verification ----------------------------------------------------------
summary = fuzz_bounds(trials=2000, seed=1)
print(
    f"\nfuzzed {summary.trials} random instances: min slack = {summary.min_slack:.3e}, "
    f"min same-meter slack = {summary.min_same_meter_slack:.3e} (both must be >= 0)"
)
