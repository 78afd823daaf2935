"""Dense linear algebra for small multi-factor quantum states.

States are stored either as an amplitude vector or as a density matrix over
an ordered list of tensor factors. Factor 0 is the slowest-varying index of
the flattened representation, i.e. the full space is ``H_0 (x) H_1 (x) ...``
in ``numpy.kron`` order.

Local operators are never lifted to the full space on the hot path; they are
applied by reshaping the state so that the target factor is its own axis.
:func:`tensor_lift` builds the explicit full-space matrix and is kept as a
reference route for small systems.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ConfigurationError",
    "NumericalUnderflowError",
    "QuantumState",
    "KrausOperator",
    "MAX_PURE_DIM",
    "MAX_MIXED_DIM",
    "tensor_lift",
    "apply_local",
    "outcome_probability",
    "apply_kraus_update",
    "local_density_matrix",
    "normalize",
    "min_singular_value",
    "to_density_matrix",
]

MAX_PURE_DIM = 2**22
MAX_MIXED_DIM = 2**12
UNDERFLOW_WEIGHT = 1e-300
STATE_TOL = 1e-12
EIGEN_TOL = 1e-10


class ConfigurationError(ValueError):
    """Raised for inconsistent dimensions, parameters or experiment layouts."""


class NumericalUnderflowError(ArithmeticError):
    """Raised when an outcome weight is too small to renormalize safely."""


def _as_dims(factor_dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in factor_dims)
    if not dims:
        raise ConfigurationError("factor_dims must be non-empty")
    if any(d < 1 for d in dims):
        raise ConfigurationError(f"factor dimensions must be positive, got {dims}")
    return dims


def _readonly(arr) -> np.ndarray:
    # arrays already frozen by this module are shared, anything else is copied
    arr = np.asarray(arr)
    if arr.dtype != np.complex128 or arr.flags.writeable:
        arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure or mixed state on a tensor product of finite factors.

    Parameters
    ----------
    factor_dims : tuple of int
        Hilbert-space dimension of each tensor factor.
    data : ndarray
        Amplitude vector of length ``prod(factor_dims)`` (pure) or a square
        density matrix of that size (mixed). Stored read-only.
    """

    factor_dims: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        dims = _as_dims(self.factor_dims)
        object.__setattr__(self, "factor_dims", dims)
        data = _readonly(self.data)
        object.__setattr__(self, "data", data)
        total = int(np.prod(dims))
        if data.ndim == 1:
            if total > MAX_PURE_DIM:
                raise ConfigurationError(
                    f"pure state dimension {total} exceeds cap {MAX_PURE_DIM}"
                )
            if data.shape[0] != total:
                raise ConfigurationError(
                    f"amplitude vector has length {data.shape[0]}, expected {total}"
                )
        elif data.ndim == 2:
            if total > MAX_MIXED_DIM:
                raise ConfigurationError(
                    f"mixed state dimension {total} exceeds cap {MAX_MIXED_DIM}"
                )
            if data.shape != (total, total):
                raise ConfigurationError(
                    f"density matrix has shape {data.shape}, expected {(total, total)}"
                )
        else:
            raise ConfigurationError("state data must be a vector or a square matrix")

    @classmethod
    def from_vector(cls, amplitudes, factor_dims, normalize: bool = True) -> "QuantumState":
        state = cls(tuple(factor_dims), np.asarray(amplitudes, dtype=np.complex128))
        return _normalize(state) if normalize else state

    @classmethod
    def from_density_matrix(cls, rho, factor_dims) -> "QuantumState":
        return cls(tuple(factor_dims), np.asarray(rho, dtype=np.complex128))

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def validate(self) -> None:
        """Check the normalization, hermiticity and positivity invariants."""
        if self.is_pure:
            norm2 = float(np.vdot(self.data, self.data).real)
            if abs(norm2 - 1.0) > STATE_TOL:
                raise ConfigurationError(f"state vector has squared norm {norm2!r}")
            return
        rho = self.data
        if not np.allclose(rho, rho.conj().T, atol=STATE_TOL, rtol=0):
            raise ConfigurationError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > STATE_TOL:
            raise ConfigurationError(f"density matrix has trace {tr!r}")
        lo = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
        if lo < -EIGEN_TOL:
            raise ConfigurationError(f"density matrix has eigenvalue {lo!r}")


@dataclass(frozen=True, eq=False)
class KrausOperator:
    """A single measurement outcome: a square matrix on one tensor factor."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigurationError(f"Kraus operator must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        diag = np.diag(m)
        is_diag = np.count_nonzero(m - np.diag(diag)) == 0
        object.__setattr__(self, "diagonal", _freeze(diag.copy()) if is_diag else None)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _matrix_of(op) -> np.ndarray:
    if isinstance(op, KrausOperator):
        return op.matrix
    return np.asarray(op, dtype=np.complex128)


def _diagonal_of(op) -> np.ndarray | None:
    if isinstance(op, KrausOperator):
        return op.diagonal
    return None


def _check_factor(matrix: np.ndarray, factor_index: int, factor_dims: Sequence[int]) -> None:
    if not 0 <= factor_index < len(factor_dims):
        raise ConfigurationError(
            f"factor_index {factor_index} out of range for {len(factor_dims)} factors"
        )
    if matrix.shape != (factor_dims[factor_index],) * 2:
        raise ConfigurationError(
            f"operator of shape {matrix.shape} does not act on factor {factor_index} "
            f"of dimension {factor_dims[factor_index]}"
        )


def tensor_lift(op, factor_index: int, factor_dims: Sequence[int]) -> np.ndarray:
    """Return ``I (x) ... (x) op (x) ... (x) I`` on the full space."""
    matrix = _matrix_of(op)
    dims = _as_dims(factor_dims)
    _check_factor(matrix, factor_index, dims)
    before = int(np.prod(dims[:factor_index], dtype=np.int64))
    after = int(np.prod(dims[factor_index + 1:], dtype=np.int64))
    return np.kron(np.kron(np.eye(before), matrix), np.eye(after))


def _split(dims: tuple[int, ...], k: int) -> tuple[int, int, int]:
    before = int(np.prod(dims[:k], dtype=np.int64))
    after = int(np.prod(dims[k + 1:], dtype=np.int64))
    return before, dims[k], after


def apply_local(state: QuantumState, op, factor_index: int) -> np.ndarray:
    """Return the unnormalized data of ``A psi`` or ``A rho A^dagger``."""
    matrix = _matrix_of(op)
    _check_factor(matrix, factor_index, state.factor_dims)
    a, d, b = _split(state.factor_dims, factor_index)
    diag = _diagonal_of(op)
    if state.is_pure:
        psi = state.data.reshape(a, d, b)
        if diag is not None:
            return (psi * diag[None, :, None]).reshape(-1)
        return np.matmul(matrix, psi).reshape(-1)
    n = a * d * b
    rho = state.data.reshape(a, d, b, a, d, b)
    if diag is not None:
        out = rho * diag[None, :, None, None, None, None] * diag.conj()[None, None, None, None, :, None]
        return out.reshape(n, n)
    # A on the row index, conj(A) on the column index
    out = np.moveaxis(np.tensordot(matrix, rho, axes=([1], [1])), 0, 1)
    out = np.moveaxis(np.tensordot(out, matrix.conj(), axes=([4], [1])), -1, 4)
    return out.reshape(n, n)


def _weight(data: np.ndarray) -> float:
    if data.ndim == 1:
        return float(np.vdot(data, data).real)
    return float(np.trace(data).real)


def outcome_probability(state: QuantumState, op, factor_index: int) -> float:
    """Born weight ``Tr(A rho A^dagger)`` of a local Kraus operator."""
    return _weight(apply_local(state, op, factor_index))


def apply_kraus_update(state: QuantumState, op, factor_index: int) -> tuple[QuantumState, float]:
    """Apply a local Kraus operator and renormalize.

    Returns
    -------
    state : QuantumState
        The post-outcome state ``A rho A^dagger / Tr(A rho A^dagger)``.
    weight : float
        The pre-normalization weight, equal to :func:`outcome_probability`.

    Raises
    ------
    NumericalUnderflowError
        If the weight is below 1e-300. This means the operator is too close to
        a projector for the given history; use a larger detector error.
    """
    data = apply_local(state, op, factor_index)
    weight = _weight(data)
    if not weight > UNDERFLOW_WEIGHT:
        raise NumericalUnderflowError(
            f"outcome weight {weight!r} on factor {factor_index} underflows; "
            "the measurement model is too close to projective, increase epsilon"
        )
    data /= np.sqrt(weight) if data.ndim == 1 else weight
    return QuantumState(state.factor_dims, _freeze(data)), weight


def local_density_matrix(state: QuantumState, factor_index: int) -> np.ndarray:
    """Partial trace of ``state`` onto one factor."""
    if not 0 <= factor_index < len(state.factor_dims):
        raise ConfigurationError(f"factor_index {factor_index} out of range")
    a, d, b = _split(state.factor_dims, factor_index)
    if state.is_pure:
        psi = state.data.reshape(a, d, b)
        x = np.ascontiguousarray(np.moveaxis(psi, 1, 0)).reshape(d, a * b)
        # conj(x) @ x.T is the transpose of rho
        rho = (x.conj() @ x.T).T
    else:
        rho = np.einsum("idjiej->de", state.data.reshape(a, d, b, a, d, b))
    return (rho + rho.conj().T) / 2


def _normalize(state: QuantumState) -> QuantumState:
    w = _weight(state.data)
    if not w > 0:
        raise ConfigurationError("cannot normalize a zero state")
    data = state.data / (np.sqrt(w) if state.is_pure else w)
    return QuantumState(state.factor_dims, data)


def normalize(state: QuantumState) -> QuantumState:
    """Rescale to unit norm (pure) or unit trace (mixed)."""
    return _normalize(state)


def min_singular_value(matrix) -> float:
    return float(np.linalg.svd(np.asarray(matrix, dtype=np.complex128), compute_uv=False).min())


def to_density_matrix(state: QuantumState) -> QuantumState:
    if not state.is_pure:
        return state
    psi = state.data
    return QuantumState(state.factor_dims, np.outer(psi, psi.conj()))
