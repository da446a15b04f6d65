"""Walkthrough: two-qubit states, Bloch decomposition, and knowledge quantities.

A pair of correlated qubits lets the outcome of a measurement on one (the
"meter") improve predictions about a measurement on the other (the
"signal").  This script builds a few states and quantifies that improvement.
"""

import numpy as np

import bellbound as bb

np.set_printoptions(precision=4, suppress=True)

# --- states ---------------------------------------------------------------
werner = bb.werner(0.82)  # noisy singlet: 82% singlet, 18% white noise
form = bb.decompose(werner)
print("Werner(0.82) Bloch decomposition")
print("  local vectors n, m:", form.n, form.m, "(unpolarized marginals)")
print("  correlation matrix T:\n", form.T)

# the decomposition is exactly invertible
assert np.allclose(bb.recompose(form).matrix, werner.matrix, atol=1e-13)

# --- measurements ----------------------------------------------------------
# linear-polarization analyzers, parametrized by the physical rotation angle
hv = bb.measurement_from_polarization_angle(0.0)     # H/V basis, Bloch +z
xy = bb.measurement_from_polarization_angle(45.0)    # X/Y basis, Bloch +x
print("\nH/V and X/Y are complementary:", bb.are_complementary(hv, xy))

# --- knowledge quantities ---------------------------------------------------
print("\nPredicting the H/V signal outcome from a meter analyzer at angle theta:")
print(f"  {'theta':>6} {'K':>8} {'P':>8} {'dK':>8} {'D':>8}")
for theta in (0.0, 15.0, 30.0, 45.0):
    meter = bb.measurement_from_polarization_angle(theta)
    report = bb.knowledge_report(werner, meter, hv)
    print(
        f"  {theta:6.1f} {report.K:8.4f} {report.P:8.4f} {report.deltaK:8.4f} {report.D:8.4f}"
    )
print("K falls off as p|cos 2theta|; P = 0 because the marginals carry no bias.")

# the best meter measurement reaches the distinguishability D
best = bb.optimal_meter(werner, hv)
print("\nOptimal meter axis for the H/V signal:", best.axis)
print("knowledge at the optimal meter:", bb.knowledge(werner, best, hv))
print("distinguishability:            ", bb.distinguishability(werner, hv))

# --- conditioning picture ----------------------------------------------------
# the same numbers via conditional meter states: measure H vs V on the signal
cd = bb.conditional_decompose(werner, hv)
print("\nConditional meter states (signal measured in H/V):")
print("  outcome probabilities:", cd.w, cd.w_perp)
print("  rho_M (signal +):\n", cd.rho_M)
print("Discriminating these two states is exactly the prediction problem.")
