"""Dense complex linear algebra for registers of up to three qubits.

Matrices are plain ``numpy`` complex arrays. Qubit 0 is the most significant
bit of the computational-basis index, so for the three-qubit register used by
the protocol the order is A, B, C.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

MAX_QUBITS = 3
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGEN_FLOOR = -1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

for _m in (I2, SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.setflags(write=False)


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def num_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim or n > MAX_QUBITS:
        raise ValueError(f"dimension {dim} is not 2**n for n in 1..{MAX_QUBITS}")
    return n


def tensor(*factors) -> np.ndarray:
    """Kronecker product, left factor as the high-order block.

    Evaluated as a left fold, so ``tensor(a, b, c) == kron(kron(a, b), c)``.
    """
    if not factors:
        raise ValueError("tensor needs at least one factor")
    return reduce(np.kron, (as_matrix(f) for f in factors))


def ket(amplitudes) -> np.ndarray:
    """Normalized state vector on 1 to 3 qubits."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    num_qubits_of(v.size)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError("state vector has zero or non-finite norm")
    return v / norm


def basis_ket(bits: str) -> np.ndarray:
    """Computational basis state, e.g. ``basis_ket("010")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(v) -> np.ndarray:
    """Rank-one projector onto the normalized vector ``v``."""
    v = ket(v)
    return np.outer(v, v.conj())


def embed(op, target: int, num_qubits: int) -> np.ndarray:
    """Place a single-qubit operator on ``target`` with identities elsewhere."""
    op = as_matrix(op)
    if op.shape != (2, 2):
        raise ValueError(f"embed expects a 2x2 operator, got {op.shape}")
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {num_qubits}")
    if not 0 <= target < num_qubits:
        raise ValueError(f"target {target} out of range for {num_qubits} qubits")
    return tensor(*(op if q == target else I2 for q in range(num_qubits)))


def apply(op, rho) -> np.ndarray:
    """Conjugate ``rho`` by ``op``. The result is not renormalized."""
    op = as_matrix(op)
    rho = as_matrix(rho)
    if op.shape[0] != op.shape[1] or op.shape != rho.shape:
        raise ValueError(f"operator {op.shape} does not match state {rho.shape}")
    return op @ rho @ op.conj().T


def partial_trace(rho, drop: int) -> np.ndarray:
    """Trace out qubit ``drop``, keeping the remaining qubits in order."""
    rho = as_matrix(rho)
    n = num_qubits_of(rho.shape[0])
    if rho.shape[0] != rho.shape[1]:
        raise ValueError("partial_trace needs a square matrix")
    if n < 2:
        raise ValueError("partial_trace needs at least two qubits")
    if not 0 <= drop < n:
        raise ValueError(f"qubit {drop} out of range for {n} qubits")
    t = rho.reshape([2] * (2 * n))
    t = np.trace(t, axis1=drop, axis2=drop + n)
    d = 2 ** (n - 1)
    return t.reshape(d, d)


def fidelity_pure(phi, rho) -> float:
    """|<phi| rho |phi>| for a normalized pure state ``phi``."""
    phi = np.asarray(phi, dtype=complex).ravel()
    rho = as_matrix(rho)
    if rho.shape != (phi.size, phi.size):
        raise ValueError(f"state of size {phi.size} does not match {rho.shape}")
    return float(abs(np.vdot(phi, rho @ phi)))


def density_violations(rho, *, normalized: bool = True) -> list[str]:
    """List the ways ``rho`` fails to be a valid density operator.

    An empty list means Hermitian, positive semidefinite and (if
    ``normalized``) unit trace, all within the module tolerances.
    """
    rho = np.asarray(rho, dtype=complex)
    problems = []
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return [f"not square: {rho.shape}"]
    if not np.all(np.isfinite(rho)):
        return ["non-finite entries"]
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        problems.append(f"not Hermitian (max deviation {herm:.3e})")
    if normalized:
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            problems.append(f"trace {tr!r} != 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < EIGEN_FLOOR:
        problems.append(f"negative eigenvalue {lo:.3e}")
    return problems


def is_density_operator(rho, *, normalized: bool = True) -> bool:
    return not density_violations(rho, normalized=normalized)
