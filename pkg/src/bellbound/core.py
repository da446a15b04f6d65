"""Two-qubit density matrices, Bloch decompositions, and projective qubit measurements.

Conventions, fixed once and asserted in the tests:

* Tensor-product basis order is ``|HH>, |HV>, |VH>, |VV>`` with the signal
  qubit first.
* ``|H>`` maps to the Bloch +z axis and ``|X> = (|H>+|V>)/sqrt(2)`` to +x.
  Linear polarizations therefore live in the x-z plane; the y axis is
  reserved for circular polarizations and unused here.
* A measurement is identified with a unit Bloch axis ``a``; the axes ``a``
  and ``-a`` denote the same measurement with swapped outcome labels, and
  every derived quantity is invariant under that swap.

All functions are pure and all returned arrays are read-only, so values can
be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitian, NotPositive, NotRotation, NotUnitary, TraceNotOne

# Validation tolerances (double precision leaves >= 4 orders of margin on 4x4 problems).
VALIDATION_TOL = 1e-10
UNIT_AXIS_TOL = 1e-12
COMPLEMENTARITY_TOL = 1e-9
ROTATION_TOL = 1e-8
DEGENERATE_WEIGHT = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
ID2 = np.eye(2, dtype=complex)

# Stacked two-qubit observables: signal slot first in every Kronecker product.
_SIG_OPS = np.stack([np.kron(s, ID2) for s in PAULI])
_MET_OPS = np.stack([np.kron(ID2, s) for s in PAULI])
_CORR_OPS = np.stack([np.stack([np.kron(a, b) for b in PAULI]) for a in PAULI])


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TwoQubitState:
    """A validated 4x4 density matrix (use :func:`validate_state` to build one)."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(np.asarray(self.matrix, dtype=complex)))


@dataclass(frozen=True)
class BlochForm:
    """Local Bloch vectors and the 3x3 correlation matrix of a two-qubit state.

    ``T[k, l]`` pairs signal axis ``k`` with meter axis ``l``.
    """

    n: np.ndarray
    m: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", _readonly(np.asarray(self.n, dtype=float)))
        object.__setattr__(self, "m", _readonly(np.asarray(self.m, dtype=float)))
        object.__setattr__(self, "T", _readonly(np.asarray(self.T, dtype=float)))


@dataclass(frozen=True)
class QubitMeasurement:
    """Two-outcome projective measurement along a unit Bloch axis.

    Outcome "+" is the projector ``(1 + a.sigma)/2`` and "-" its complement.
    ``degenerate`` marks an axis chosen arbitrarily because the discrimination
    problem it was derived from had no preferred direction.
    """

    axis: np.ndarray
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float).reshape(3)
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > UNIT_AXIS_TOL:
            raise ValueError(
                f"measurement axis must be a unit vector: | |a| - 1 | = {abs(norm - 1.0):.3e}"
                f" (limit {UNIT_AXIS_TOL})"
            )
        object.__setattr__(self, "axis", _readonly(a / norm))

    def flipped(self) -> "QubitMeasurement":
        """Same measurement with the outcome labels swapped."""
        return QubitMeasurement(-self.axis, degenerate=self.degenerate)


@dataclass(frozen=True)
class ConditionalDecomposition:
    """Expansion of a state over the two outcomes of a signal measurement.

    ``w`` and ``w_perp`` are the outcome probabilities, ``rho_M`` and
    ``rho_M_perp`` the conditional meter states, and ``chi_M`` the coherence
    block between the two signal outcomes.  When a weight falls below 1e-12
    the corresponding conditional is undefined; it is stored as a zero matrix
    and ``degenerate`` is set.
    """

    w: float
    w_perp: float
    rho_M: np.ndarray
    rho_M_perp: np.ndarray
    chi_M: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        for name in ("rho_M", "rho_M_perp", "chi_M"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=complex)))


def validate_state(matrix) -> TwoQubitState:
    """Validate a 4x4 matrix as a density matrix and return the wrapped state.

    The input is symmetrized to ``(A + A^dag)/2`` before the trace and
    positivity checks, but only if its asymmetry is already below 1e-10;
    otherwise :class:`NotHermitian` is raised.  Check order is Hermiticity,
    trace, positivity.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix contains non-finite entries")
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym >= VALIDATION_TOL:
        raise NotHermitian(asym)
    m = (m + m.conj().T) / 2.0
    trace = float(m.trace().real)
    if abs(trace - 1.0) >= VALIDATION_TOL:
        raise TraceNotOne(trace)
    eigenvalues = np.linalg.eigvalsh(m)
    if eigenvalues[0] < -VALIDATION_TOL:
        raise NotPositive(float(eigenvalues[0]))
    return TwoQubitState(m)


def decompose(state: TwoQubitState) -> BlochForm:
    """Bloch expansion: n_k = tr[rho (sigma_k x 1)], m_l = tr[rho (1 x sigma_l)],
    T_kl = tr[rho (sigma_k x sigma_l)]."""
    rho = state.matrix
    n = np.einsum("kij,ji->k", _SIG_OPS, rho)
    m = np.einsum("kij,ji->k", _MET_OPS, rho)
    t = np.einsum("klij,ji->kl", _CORR_OPS, rho)
    # Imaginary residues are pure floating noise for a validated (Hermitian) state.
    assert max(np.max(np.abs(n.imag)), np.max(np.abs(m.imag)), np.max(np.abs(t.imag))) < 1e-10
    return BlochForm(n.real, m.real, t.real)


def recompose(form: BlochForm) -> TwoQubitState:
    """Rebuild the density matrix from a Bloch form; raises NotPositive for
    Bloch data with no physical state."""
    rho = 0.25 * (
        np.eye(4, dtype=complex)
        + np.einsum("k,kij->ij", form.n, _SIG_OPS)
        + np.einsum("l,lij->ij", form.m, _MET_OPS)
        + np.einsum("kl,klij->ij", form.T, _CORR_OPS)
    )
    return validate_state(rho)


def _check_unitary(u, name: str = "U") -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"{name} must be a 2x2 matrix, got shape {u.shape}")
    deviation = float(np.max(np.abs(u.conj().T @ u - ID2)))
    if deviation >= VALIDATION_TOL:
        raise NotUnitary(deviation)
    return u


def apply_local_unitary(state: TwoQubitState, u_signal, u_meter) -> TwoQubitState:
    """Conjugate the state by ``u_signal (x) u_meter``.

    The correlation matrix transforms as ``T -> O_S T O_M^T`` with ``O`` the
    rotation of each unitary under the adjoint map.
    """
    u_s = _check_unitary(u_signal, "u_signal")
    u_m = _check_unitary(u_meter, "u_meter")
    big = np.kron(u_s, u_m)
    return validate_state(big @ state.matrix @ big.conj().T)


def rotation_of_unitary(u) -> np.ndarray:
    """The unique rotation O with ``U (v.sigma) U^dag = (O v).sigma`` for all v."""
    u = _check_unitary(u)
    conjugated = np.einsum("ab,lbc,dc->lad", u, PAULI, u.conj())
    o = 0.5 * np.einsum("kab,lba->kl", PAULI, conjugated).real
    return _readonly(o)


def _quaternion_from_rotation(o: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a proper rotation, Shepperd's method."""
    trace = float(np.trace(o))
    if trace > 0.0:
        s = 2.0 * math.sqrt(1.0 + trace)
        q = np.array(
            [0.25 * s, (o[2, 1] - o[1, 2]) / s, (o[0, 2] - o[2, 0]) / s, (o[1, 0] - o[0, 1]) / s]
        )
    elif o[0, 0] > o[1, 1] and o[0, 0] > o[2, 2]:
        s = 2.0 * math.sqrt(1.0 + o[0, 0] - o[1, 1] - o[2, 2])
        q = np.array(
            [(o[2, 1] - o[1, 2]) / s, 0.25 * s, (o[0, 1] + o[1, 0]) / s, (o[0, 2] + o[2, 0]) / s]
        )
    elif o[1, 1] > o[2, 2]:
        s = 2.0 * math.sqrt(1.0 + o[1, 1] - o[0, 0] - o[2, 2])
        q = np.array(
            [(o[0, 2] - o[2, 0]) / s, (o[0, 1] + o[1, 0]) / s, 0.25 * s, (o[1, 2] + o[2, 1]) / s]
        )
    else:
        s = 2.0 * math.sqrt(1.0 + o[2, 2] - o[0, 0] - o[1, 1])
        q = np.array(
            [(o[1, 0] - o[0, 1]) / s, (o[0, 2] + o[2, 0]) / s, (o[1, 2] + o[2, 1]) / s, 0.25 * s]
        )
    return q / np.linalg.norm(q)


def rotation_from_quaternion(q) -> np.ndarray:
    """Rotation matrix of a (not necessarily normalized) quaternion (w, x, y, z)."""
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def unitary_from_rotation(o) -> np.ndarray:
    """Inverse of the adjoint map: a 2x2 unitary whose rotation is ``o``.

    The result is fixed up to a global phase; the convention is that the
    first non-vanishing quaternion component is positive.
    """
    o = np.asarray(o, dtype=float)
    if o.shape != (3, 3):
        raise NotRotation(f"expected shape (3, 3), got {o.shape}")
    ortho = float(np.max(np.abs(o.T @ o - np.eye(3))))
    if ortho > ROTATION_TOL:
        raise NotRotation(f"max |O^T O - 1| = {ortho:.6e} (limit {ROTATION_TOL})")
    det = float(np.linalg.det(o))
    if abs(det - 1.0) > ROTATION_TOL:
        raise NotRotation(f"det O = {det:.12f}, expected +1 (limit {ROTATION_TOL})")
    q = _quaternion_from_rotation(o)
    for component in q:
        if abs(component) > 1e-8:
            if component < 0.0:
                q = -q
            break
    w, x, y, z = q
    u = w * ID2 - 1j * (x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)
    return _readonly(u)


def measurement_from_polarization_angle(theta_deg: float) -> QubitMeasurement:
    """Linear-polarization analyzer at ``theta`` degrees from horizontal.

    The "+" outcome projects on ``cos(theta)|H> + sin(theta)|V>``; on the
    Bloch sphere the axis is ``(sin 2theta, 0, cos 2theta)``.
    """
    theta = math.radians(float(theta_deg) % 180.0)
    return QubitMeasurement(np.array([math.sin(2 * theta), 0.0, math.cos(2 * theta)]))


def are_complementary(a: QubitMeasurement, b: QubitMeasurement) -> bool:
    """True iff the Bloch axes are orthogonal, i.e. all projector overlaps are 1/2."""
    return abs(float(a.axis @ b.axis)) <= COMPLEMENTARITY_TOL


def projectors(measurement: QubitMeasurement) -> tuple[np.ndarray, np.ndarray]:
    """The (+, -) projector pair of a measurement."""
    a_sigma = np.einsum("k,kij->ij", measurement.axis, PAULI)
    return _readonly(0.5 * (ID2 + a_sigma)), _readonly(0.5 * (ID2 - a_sigma))


def measurement_kets(measurement: QubitMeasurement) -> tuple[np.ndarray, np.ndarray]:
    """Normalized (+, -) eigenvectors of ``a.sigma`` (phase convention internal)."""
    x, y, z = measurement.axis
    if 1.0 + z >= 1.0 - z:
        plus = np.array([1.0 + z, x + 1j * y])
    else:
        plus = np.array([x - 1j * y, 1.0 - z])
    plus = plus / np.linalg.norm(plus)
    minus = np.array([-np.conj(plus[1]), np.conj(plus[0])])
    return _readonly(plus), _readonly(minus)


def conditional_decompose(state: TwoQubitState, pi_signal: QubitMeasurement) -> ConditionalDecomposition:
    """Expand the state over the outcomes of a signal measurement.

    Reassembling ``w |+><+| x rho_M + w_perp |-><-| x rho_M_perp +
    sqrt(w w_perp) (|+><-| x chi_M + h.c.)`` reproduces the input state.
    """
    plus, minus = measurement_kets(pi_signal)
    rho = state.matrix.reshape(2, 2, 2, 2)  # indices: signal, meter, signal', meter'
    block_pp = np.einsum("s,smtn,t->mn", plus.conj(), rho, plus)
    block_mm = np.einsum("s,smtn,t->mn", minus.conj(), rho, minus)
    block_pm = np.einsum("s,smtn,t->mn", plus.conj(), rho, minus)
    w = float(block_pp.trace().real)
    w_perp = float(block_mm.trace().real)
    degenerate = w < DEGENERATE_WEIGHT or w_perp < DEGENERATE_WEIGHT
    zero = np.zeros((2, 2), dtype=complex)
    rho_m = block_pp / w if w >= DEGENERATE_WEIGHT else zero
    rho_m_perp = block_mm / w_perp if w_perp >= DEGENERATE_WEIGHT else zero
    chi = block_pm / math.sqrt(w * w_perp) if not degenerate else zero
    return ConditionalDecomposition(w, w_perp, rho_m, rho_m_perp, chi, degenerate)
