"""Density operators, dichotomic observables and projective channels for one
and two polarization qubits.

Basis conventions
-----------------
Single photon: index 0 is ``|+>`` (passes a z-oriented polarizer), index 1 is
``|->``.  Two photons: ``(|++>, |+->, |-+>, |-->)``, i.e. ``np.kron`` order
with photon 1 as the most significant factor.

A polarizer at angle ``theta`` (radians) is represented by

    cos(2 theta) Z + sin(2 theta) X

so analyzers are pi-periodic and the Bell-state correlation is
``cos 2(theta_a - theta_b)``.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10
DICHOTOMIC_TOL = 1e-10
IMAG_TOL = 1e-10
PROB_CLAMP_TOL = 1e-12

PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


class DimensionError(ValueError):
    pass


def _frozen(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def canonical_angle(theta: float) -> float:
    """Map an analyzer angle to ``[0, pi)``."""
    out = float(np.mod(theta, np.pi))
    # np.mod can return pi itself for tiny negative inputs
    return 0.0 if out >= np.pi else out


class PureState:
    """Normalized state vector of dimension 2 or 4."""

    def __init__(self, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        if amps.size not in (2, 4):
            raise DimensionError(f"state dimension must be 2 or 4, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > HERMITIAN_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        self.amplitudes = _frozen(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"PureState({self.amplitudes!r})"


class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix (d = 2 or 4).

    Eigenvalues in ``[-1e-10, 0)`` are tolerated as rounding noise and
    reported as zero by :meth:`eigenvalues`; anything more negative is
    rejected.
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise DimensionError(f"density matrix must be 2x2 or 4x4, got shape {m.shape}")
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace must be 1, got {tr!r}")
        # symmetrize to kill sub-tolerance asymmetry before the spectral check
        m = 0.5 * (m + m.conj().T)
        lowest = np.linalg.eigvalsh(m)[0]
        if lowest < -NEGATIVE_EIG_TOL:
            raise ValueError(f"matrix is not positive semidefinite (eigenvalue {lowest:.3e})")
        self.matrix = _frozen(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        vals = np.linalg.eigvalsh(self.matrix)
        return np.where((vals < 0) & (vals >= -NEGATIVE_EIG_TOL), 0.0, vals)

    def allclose(self, other: "DensityOperator", atol: float = HERMITIAN_TOL) -> bool:
        return self.dim == other.dim and np.max(np.abs(self.matrix - other.matrix)) <= atol

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"


class Observable:
    """Hermitian matrix with spectrum in {-1, +1}."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise DimensionError(f"observable must be 2x2 or 4x4, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("observable is not Hermitian")
        sq_err = np.max(np.abs(m @ m - np.eye(m.shape[0])))
        if sq_err > DICHOTOMIC_TOL:
            raise ValueError(f"observable is not dichotomic (|O^2 - I| = {sq_err:.3e})")
        self.matrix = _frozen(0.5 * (m + m.conj().T))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def projectors(self) -> dict[int, np.ndarray]:
        """Eigenspace projectors keyed by eigenvalue; empty eigenspaces omitted.

        For a dichotomic operator these are ``(I +/- O) / 2``, which handles
        degenerate spectra without an eigendecomposition.
        """
        eye = np.eye(self.dim)
        out = {}
        for value in (1, -1):
            proj = 0.5 * (eye + value * self.matrix)
            if np.trace(proj).real > 0.5:
                out[value] = proj
        return out

    def __repr__(self):
        return f"Observable(dim={self.dim})"


def tensor(first: Observable, second: Observable) -> Observable:
    if first.dim != 2 or second.dim != 2:
        raise DimensionError("tensor expects two single-photon observables")
    return Observable(np.kron(first.matrix, second.matrix))


def polarizer_observable(theta: float) -> Observable:
    return Observable(np.cos(2 * theta) * PAULI_Z + np.sin(2 * theta) * PAULI_X)


def polarization_ket(theta: float, sign: int) -> np.ndarray:
    """Eigenvector of ``polarizer_observable(theta)`` with eigenvalue ``sign``."""
    if sign == 1:
        return np.array([np.cos(theta), np.sin(theta)], dtype=complex)
    if sign == -1:
        return np.array([-np.sin(theta), np.cos(theta)], dtype=complex)
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def bell_state() -> PureState:
    r = np.sqrt(0.5)
    return PureState([r, 0, 0, r])


def rotated_bell_state(theta: float) -> DensityOperator:
    """``(|+,t>|+,t> + |-,t>|-,t>) / sqrt(2)`` as a density operator.

    Equals the unrotated Bell state for every ``theta``.
    """
    plus, minus = polarization_ket(theta, 1), polarization_ket(theta, -1)
    psi = (np.kron(plus, plus) + np.kron(minus, minus)) / np.sqrt(2)
    return DensityOperator(np.outer(psi, psi.conj()))


def maximally_mixed(dim: int = 4) -> DensityOperator:
    return DensityOperator(np.eye(dim) / dim)


def _check_dims(state: DensityOperator, obs: Observable) -> None:
    if state.dim != obs.dim:
        raise DimensionError(f"state has dimension {state.dim}, observable {obs.dim}")


def expectation(state: DensityOperator, obs: Observable) -> float:
    _check_dims(state, obs)
    value = np.trace(state.matrix @ obs.matrix)
    if abs(value.imag) > IMAG_TOL:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def _sandwich(matrix: np.ndarray, projectors: Iterable[np.ndarray]) -> DensityOperator:
    return DensityOperator(sum(p @ matrix @ p for p in projectors))


def dephase(state: DensityOperator, obs: Observable) -> DensityOperator:
    """Remove coherences between the eigenspaces of ``obs``: sum_a P_a rho P_a."""
    _check_dims(state, obs)
    return _sandwich(state.matrix, obs.projectors().values())


def _lift(proj: np.ndarray, subsystem: int) -> np.ndarray:
    if subsystem == 1:
        return np.kron(proj, IDENTITY_2)
    if subsystem == 2:
        return np.kron(IDENTITY_2, proj)
    raise ValueError(f"subsystem must be 1 or 2, got {subsystem!r}")


def partial_dephase(state: DensityOperator, obs: Observable, subsystem: int) -> DensityOperator:
    """Dephase one photon of a pair in the eigenbasis of a single-photon ``obs``."""
    if state.dim != 4:
        raise DimensionError("partial_dephase needs a two-photon state")
    if obs.dim != 2:
        raise DimensionError("partial_dephase needs a single-photon observable")
    lifted = [_lift(p, subsystem) for p in obs.projectors().values()]
    return _sandwich(state.matrix, lifted)


def measure_collapse(state: DensityOperator, theta: float) -> DensityOperator:
    """Unrecorded polarizer measurement along ``theta`` on photon 1."""
    return partial_dephase(state, polarizer_observable(theta), 1)


def joint_probabilities(state: DensityOperator, theta_a: float, theta_b: float) -> np.ndarray:
    """Born probabilities ``(p++, p+-, p-+, p--)`` for analyzers at ``theta_a``, ``theta_b``."""
    if state.dim != 4:
        raise DimensionError("joint_probabilities needs a two-photon state")
    proj_a = polarizer_observable(theta_a).projectors()
    proj_b = polarizer_observable(theta_b).projectors()
    eye = np.eye(2)
    probs = []
    for a in (1, -1):
        for b in (1, -1):
            pa = proj_a.get(a, 0 * eye)
            pb = proj_b.get(b, 0 * eye)
            probs.append(np.trace(state.matrix @ np.kron(pa, pb)).real)
    probs = np.array(probs)
    if probs.min() < -PROB_CLAMP_TOL:
        raise ValueError(f"negative Born probability {probs.min():.3e}")
    probs = np.clip(probs, 0.0, None)
    if abs(probs.sum() - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {probs.sum()!r}")
    return probs


def correlation(state: DensityOperator, theta_a: float, theta_b: float) -> float:
    return expectation(state, tensor(polarizer_observable(theta_a), polarizer_observable(theta_b)))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Random density operator from a Ginibre matrix (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityOperator(0.5 * (m + m.conj().T))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_observable(dim: int, rng: np.random.Generator, n_plus: int | None = None) -> Observable:
    """Random dichotomic observable; ``n_plus`` fixes the +1 multiplicity."""
    if n_plus is None:
        n_plus = int(rng.integers(1, dim))
    u = random_unitary(dim, rng)
    spectrum = np.r_[np.ones(n_plus), -np.ones(dim - n_plus)]
    return Observable((u * spectrum) @ u.conj().T)


def matrix_to_text(matrix) -> str:
    """Row-major text with one row per line and ``re,im`` pairs at 17 significant digits."""
    m = np.asarray(matrix, dtype=complex)
    rows = []
    for row in m:
        rows.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    return "\n".join(rows) + "\n"


def matrix_from_text(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        entries = []
        for token in line.split():
            re_part, im_part = token.split(",")
            entries.append(complex(float(re_part), float(im_part)))
        rows.append(entries)
    out = np.array(rows, dtype=complex)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise ValueError(f"serialized matrix is not square: shape {out.shape}")
    return out
