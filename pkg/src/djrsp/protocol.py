"""GHZ-based deterministic joint remote state preparation of one qubit.

Alice knows the amplitudes ``(a0, a1)`` of the target, Bob knows its phase
``theta``; Charlie ends up holding the target. The shared resource is
``(|000> + |111>)/sqrt(2)`` on qubits A, B, C. Qubits B and C travel through
noisy channels, optionally wrapped by a weak measurement before transit and a
reversal measurement after it.

Every measurement branch ``(m, n)`` is enumerated exactly, so results are
expectation values rather than samples.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    NO_PROTECTION,
    ZERO_PROBABILITY,
    NoiseKind,
    ProtectionConfig,
    apply_channel,
    apply_selective,
    kraus_set,
    reversal_op,
    weak_op,
)
from .qmath import (
    I2,
    SIGMA_X,
    SIGMA_Z,
    apply,
    basis_ket,
    embed,
    fidelity_pure,
    partial_trace,
    projector,
)

QUBIT_A, QUBIT_B, QUBIT_C = 0, 1, 2
NORM_TOL = 1e-12


class ProtocolMode(str, enum.Enum):
    DJRSP = "djrsp"
    # JRSP conditioned on Alice's outcome m = 0
    JRSP_M0 = "jrsp"
    # single preparer, noise and protection on Charlie's qubit only
    RSP = "rsp"

    @classmethod
    def parse(cls, value: "ProtocolMode | str") -> "ProtocolMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for mode in cls:
            if key in (mode.value, mode.name.lower()):
                return mode
        raise ValueError(f"unknown protocol mode {value!r}")

    @property
    def noisy_qubits(self) -> tuple[int, ...]:
        return (QUBIT_C,) if self is ProtocolMode.RSP else (QUBIT_B, QUBIT_C)


@dataclass(frozen=True)
class TargetState:
    """The qubit ``a0|0> + a1 e^{i theta}|1>`` with real ``a0, a1 >= 0``."""

    a0: float
    a1: float
    theta: float

    def __post_init__(self):
        if self.a0 < 0 or self.a1 < 0:
            raise ValueError("amplitudes a0, a1 must be non-negative")
        if abs(self.a0**2 + self.a1**2 - 1.0) > NORM_TOL:
            raise ValueError(f"a0^2 + a1^2 = {self.a0**2 + self.a1**2!r}, expected 1")
        if not 0.0 <= self.theta <= 2 * math.pi:
            raise ValueError(f"theta must lie in [0, 2pi], got {self.theta!r}")

    @classmethod
    def from_weight(cls, a1_squared: float, theta: float) -> "TargetState":
        """Build from the population ``a1**2`` of ``|1>``."""
        if not 0.0 <= a1_squared <= 1.0:
            raise ValueError(f"a1^2 must lie in [0, 1], got {a1_squared!r}")
        return cls(math.sqrt(1.0 - a1_squared), math.sqrt(a1_squared), theta)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a0, self.a1 * np.exp(1j * self.theta)], dtype=complex)


def ghz3() -> np.ndarray:
    return (basis_ket("000") + basis_ket("111")) / math.sqrt(2.0)


def _alice_vectors(a0, a1):
    a0 = np.asarray(a0, dtype=complex)
    a1 = np.asarray(a1, dtype=complex)
    # [..., m, component]
    return np.stack([np.stack([a0, a1], -1), np.stack([a1, -a0], -1)], -2)


def _bob_vectors(theta):
    e = np.exp(-1j * np.asarray(theta, dtype=float))
    one = np.ones_like(e)
    h = 1.0 / math.sqrt(2.0)
    m0 = np.stack([np.stack([one, e], -1), np.stack([one, -e], -1)], -2)
    m1 = np.stack([np.stack([e, one], -1), np.stack([-e, one], -1)], -2)
    # [..., m, n, component]
    return h * np.stack([m0, m1], -3)


def alice_projectors(target: TargetState) -> tuple[np.ndarray, np.ndarray]:
    P = _alice_vectors(target.a0, target.a1)
    return projector(P[0]), projector(P[1])


def bob_projectors(theta: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    if m not in (0, 1):
        raise ValueError(f"m must be 0 or 1, got {m!r}")
    O = _bob_vectors(theta)[m]
    return projector(O[0]), projector(O[1])


_RECOVERY = {
    (0, 0): I2,
    (0, 1): SIGMA_Z,
    (1, 0): -SIGMA_Z @ SIGMA_X,
    (1, 1): -SIGMA_X,
}
for _m in _RECOVERY.values():
    _m.setflags(write=False)


def recovery(m: int, n: int) -> np.ndarray:
    """Charlie's correction after outcomes ``m`` (Alice) and ``n`` (Bob)."""
    try:
        return _RECOVERY[m, n]
    except KeyError:
        raise ValueError(f"outcomes must be bits, got m={m!r}, n={n!r}") from None


@dataclass(frozen=True)
class Resource:
    """The shared three-qubit state after transmission, and what it cost."""

    rho: np.ndarray
    p_weak: float = 1.0
    p_reversal: float = 1.0

    @property
    def success_probability(self) -> float:
        return self.p_weak * self.p_reversal


def noisy_resource(
    kind: NoiseKind | str,
    lam: float,
    protection: ProtectionConfig = NO_PROTECTION,
    mode: ProtocolMode | str = ProtocolMode.DJRSP,
) -> Resource:
    """Distribute the GHZ state through the noise, with optional protection.

    The weak measurement acts before the channel and the reversal after it,
    both only on the qubits that travel (B and C, or just C in RSP mode).
    Raises :class:`~djrsp.channels.PostSelectionError` if either kept
    outcome is impossible.
    """
    mode = ProtocolMode.parse(mode)
    ch = kraus_set(kind, lam)
    qubits = mode.noisy_qubits
    g = ghz3()
    rho = np.outer(g, g.conj())
    p_weak = p_rev = 1.0
    if protection.s > 0.0:
        rho, p_weak = apply_selective(weak_op(protection.s), qubits, rho)
    for q in qubits:
        rho = apply_channel(ch, q, rho)
    if protection.r > 0.0:
        rho, p_rev = apply_selective(reversal_op(protection.r), qubits, rho)
    rho.setflags(write=False)
    return Resource(rho, p_weak, p_rev)


@dataclass(frozen=True)
class BranchOutcome:
    m: int
    n: int
    p_alice: float
    p_bob: float
    output: np.ndarray | None
    fidelity: float
    # set when the branch has zero probability and output/fidelity are placeholders
    impossible: bool = False

    @property
    def probability(self) -> float:
        return self.p_alice * self.p_bob


@dataclass(frozen=True)
class ProtocolResult:
    """All four branches plus the averaged figures of merit.

    In ``JRSP_M0`` mode ``average_fidelity`` is conditioned on ``m = 0``:
    the ``n`` branches are weighted by Bob's conditional probabilities only.
    ``branches`` always lists all four outcomes.
    """

    mode: ProtocolMode
    branches: tuple[BranchOutcome, ...]
    average_fidelity: float
    success_probability: float
    p_weak: float = 1.0
    p_reversal: float = 1.0
    alice_m0_probability: float = 0.0

    def branch(self, m: int, n: int) -> BranchOutcome:
        return self.branches[2 * m + n]


def alice_step(rho, alice) -> tuple[np.ndarray | None, float]:
    """Alice keeps the outcome ``alice`` on qubit A.

    Returns the normalized (B, C) state and the outcome probability; the
    state is ``None`` when the probability is zero.
    """
    kept = apply(embed(alice, QUBIT_A, 3), rho)
    p = float(np.trace(kept).real)
    if p < ZERO_PROBABILITY:
        return None, 0.0
    return partial_trace(kept, QUBIT_A) / p, p


def bob_step(rho_bc, bob) -> tuple[np.ndarray | None, float]:
    """Bob keeps the outcome ``bob`` on qubit B; returns Charlie's state."""
    kept = apply(embed(bob, 0, 2), rho_bc)
    p = float(np.trace(kept).real)
    if p < ZERO_PROBABILITY:
        return None, 0.0
    return partial_trace(kept, 0) / p, p


def execute(resource: Resource, target: TargetState, mode: ProtocolMode | str = ProtocolMode.DJRSP) -> ProtocolResult:
    """Run the three measurement/recovery steps on a prepared resource."""
    mode = ProtocolMode.parse(mode)
    phi = target.vector
    branches = []
    for m, alice in enumerate(alice_projectors(target)):
        rho_bc, p_a = alice_step(resource.rho, alice)
        if rho_bc is None:
            branches += [BranchOutcome(m, n, 0.0, 0.0, None, 0.0, True) for n in (0, 1)]
            continue
        for n, bob in enumerate(bob_projectors(target.theta, m)):
            rho_c, p_b = bob_step(rho_bc, bob)
            if rho_c is None:
                branches.append(BranchOutcome(m, n, p_a, 0.0, None, 0.0, True))
                continue
            out = apply(recovery(m, n), rho_c)
            out.setflags(write=False)
            branches.append(BranchOutcome(m, n, p_a, p_b, out, fidelity_pure(phi, out)))

    p_a0 = branches[0].p_alice
    if mode is ProtocolMode.JRSP_M0:
        avg = sum(b.p_bob * b.fidelity for b in branches[:2])
    else:
        avg = sum(b.probability * b.fidelity for b in branches)
    return ProtocolResult(
        mode=mode,
        branches=tuple(branches),
        average_fidelity=float(avg),
        success_probability=resource.success_probability,
        p_weak=resource.p_weak,
        p_reversal=resource.p_reversal,
        alice_m0_probability=p_a0,
    )


def run(
    kind: NoiseKind | str,
    lam: float,
    protection: ProtectionConfig,
    target: TargetState,
    mode: ProtocolMode | str = ProtocolMode.DJRSP,
) -> ProtocolResult:
    mode = ProtocolMode.parse(mode)
    return execute(noisy_resource(kind, lam, protection, mode), target, mode)


def average_fidelity_many(resource: Resource, a1_squared, theta, mode: ProtocolMode | str = ProtocolMode.DJRSP) -> np.ndarray:
    """Vectorized ``execute(...).average_fidelity`` over many targets.

    ``a1_squared`` and ``theta`` broadcast against each other. Used by the
    quadrature, where the resource is shared by every node.
    """
    mode = ProtocolMode.parse(mode)
    a1_squared, theta = np.broadcast_arrays(np.asarray(a1_squared, float), np.asarray(theta, float))
    a1 = np.sqrt(a1_squared)
    a0 = np.sqrt(1.0 - a1_squared)
    P = _alice_vectors(a0, a1)                      # [..., m, a]
    O = _bob_vectors(theta)                         # [..., m, n, b]
    R = np.stack([np.stack([_RECOVERY[m, n] for n in (0, 1)]) for m in (0, 1)])
    phi = np.stack([a0 + 0j, a1 * np.exp(1j * theta)], -1)

    t = resource.rho.reshape(2, 2, 2, 2, 2, 2)     # a b c, a' b' c'
    # unnormalized (B, C) state after Alice keeps outcome m
    bc = np.einsum("...ma,abcxyz,...mx->...mbcyz", P.conj(), t, P)
    p_alice = np.einsum("...mbcbc->...m", bc).real
    # unnormalized Charlie state after Bob keeps n as well
    c = np.einsum("...mnb,...mbcyz,...mny->...mncz", O.conj(), bc, O)
    # <phi| R c R^dagger |phi> = p_alice * p_bob * F
    v = np.einsum("mnji,...j->...mni", R.conj(), phi)
    weighted = np.abs(np.einsum("...mni,...mnij,...mnj->...mn", v.conj(), c, v))
    p_joint = np.einsum("...mncc->...mn", c).real
    weighted = np.where(p_joint < ZERO_PROBABILITY, 0.0, weighted)

    if mode is ProtocolMode.JRSP_M0:
        p0 = p_alice[..., 0]
        safe = np.where(p0 < ZERO_PROBABILITY, 1.0, p0)
        return np.where(p0 < ZERO_PROBABILITY, 0.0, weighted[..., 0, :].sum(-1) / safe)
    return weighted.sum((-1, -2))
