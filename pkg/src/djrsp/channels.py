"""Noise channels, weak measurement and reversal operators.

Each noise kind is a single-qubit Kraus set parameterized by a rate
``lam`` in [0, 1]. The weak measurement ``W0 = diag(1, sqrt(1-s))`` and its
reversal ``V0 = diag(sqrt(1-r), 1)`` are the non-click outcomes of partial
measurements; the click outcomes are discarded and accounted for through the
post-selection probability returned by :func:`apply_selective`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, apply, as_matrix, embed, num_qubits_of

ZERO_PROBABILITY = 1e-12


class PostSelectionError(ValueError):
    """A post-selected outcome has (numerically) zero probability."""

    def __init__(self, message: str, probability: float = 0.0):
        super().__init__(message)
        self.probability = probability


class NoiseKind(str, enum.Enum):
    AMPLITUDE_DAMPING = "ad"
    BIT_FLIP = "bf"
    # equivalent to phase damping
    PHASE_FLIP = "pf"
    DEPOLARIZING = "de"

    @classmethod
    def parse(cls, value: "NoiseKind | str") -> "NoiseKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown noise kind {value!r}")


def _check_unit(name: str, value: float, *, closed: bool) -> float:
    value = float(value)
    ok = 0.0 <= value <= 1.0 if closed else 0.0 <= value < 1.0
    if not ok:
        bound = "[0, 1]" if closed else "[0, 1)"
        raise ValueError(f"{name} must lie in {bound}, got {value!r}")
    return value


@dataclass(frozen=True)
class KrausChannel:
    kind: NoiseKind
    lam: float
    operators: tuple[np.ndarray, ...]

    def completeness(self) -> np.ndarray:
        """Sum of E^dagger E; the identity for a trace-preserving channel."""
        return sum(E.conj().T @ E for E in self.operators)


def kraus_set(kind: NoiseKind | str, lam: float) -> KrausChannel:
    kind = NoiseKind.parse(kind)
    lam = _check_unit("noise rate", lam, closed=True)
    keep = math.sqrt(1.0 - lam)
    if kind is NoiseKind.AMPLITUDE_DAMPING:
        ops = (
            np.array([[1.0, 0.0], [0.0, keep]], dtype=complex),
            np.array([[0.0, math.sqrt(lam)], [0.0, 0.0]], dtype=complex),
        )
    elif kind is NoiseKind.BIT_FLIP:
        ops = (keep * I2, math.sqrt(lam) * SIGMA_X)
    elif kind is NoiseKind.PHASE_FLIP:
        ops = (keep * I2, math.sqrt(lam) * SIGMA_Z)
    else:
        w = math.sqrt(lam / 3.0)
        ops = (keep * I2, w * SIGMA_X, w * SIGMA_Z, w * SIGMA_Y)
    for op in ops:
        op.setflags(write=False)
    return KrausChannel(kind, lam, ops)


def apply_channel(ch: KrausChannel, target: int, rho) -> np.ndarray:
    """Act with ``ch`` on one qubit of ``rho``."""
    rho = as_matrix(rho)
    n = num_qubits_of(rho.shape[0])
    out = np.zeros_like(rho)
    for E in ch.operators:
        out += apply(embed(E, target, n), rho)
    return out


@dataclass(frozen=True)
class ProtectionConfig:
    """Weak-measurement strength ``s`` and reversal strength ``r``.

    Both zero disables protection.
    """

    s: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "s", _check_unit("weak strength s", self.s, closed=False))
        object.__setattr__(self, "r", _check_unit("reversal strength r", self.r, closed=False))

    @property
    def enabled(self) -> bool:
        return self.s > 0.0 or self.r > 0.0


NO_PROTECTION = ProtectionConfig()


def weak_op(s: float) -> np.ndarray:
    s = _check_unit("weak strength s", s, closed=False)
    return np.diag([1.0, math.sqrt(1.0 - s)]).astype(complex)


def reversal_op(r: float) -> np.ndarray:
    r = _check_unit("reversal strength r", r, closed=False)
    return np.diag([math.sqrt(1.0 - r), 1.0]).astype(complex)


def apply_selective(op, targets: Sequence[int], rho) -> tuple[np.ndarray, float]:
    """Post-select the outcome ``op`` on every qubit in ``targets``.

    Returns the renormalized state and the probability of the kept outcome.
    Raises :class:`PostSelectionError` (carrying ``probability=0``) when that
    probability is below ``ZERO_PROBABILITY``.
    """
    rho = as_matrix(rho)
    n = num_qubits_of(rho.shape[0])
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets must be distinct, got {targets}")
    full = np.eye(2**n, dtype=complex)
    for t in targets:
        full = full @ embed(op, t, n)
    out = apply(full, rho)
    p = float(np.trace(out).real)
    if p < ZERO_PROBABILITY:
        raise PostSelectionError(f"post-selection on qubits {targets} has probability {p:.3e}")
    return out / p, p
