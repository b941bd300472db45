"""Lifted (trial-domain) representations of discrete-time MIMO LTI systems.

A system with ``n_i`` inputs and ``n_o`` outputs acting over a finite trial
of ``N`` samples is represented by a dense matrix built from ``n_o x n_i``
lower-triangular Toeplitz blocks, one per input/output channel pair.  Signals
are stacked channel-major: channel ``l`` occupies the slice ``[l*N, (l+1)*N)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class LiftingError(ValueError):
    """Lifted operator could not be constructed (unstable or malformed model)."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class StateSpace:
    """Discrete-time state-space model (A, B, C, D) with a stable A."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n_x = A.shape[0]
        if A.shape != (n_x, n_x):
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape[0] != n_x and not (n_x == 0 and B.size == 0):
            raise ValueError(f"B has {B.shape[0]} rows, expected {n_x}")
        if n_x == 0:
            B = B.reshape(0, B.shape[1] if B.ndim == 2 and B.shape[1] else D.shape[1])
            C = C.reshape(D.shape[0], 0)
        if C.shape[1] != n_x:
            raise ValueError(f"C has {C.shape[1]} columns, expected {n_x}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(f"D shape {D.shape} inconsistent with B/C ({C.shape[0]}x{B.shape[1]})")
        if not all(np.isfinite(M).all() for M in (A, B, C, D)):
            raise ValueError("state-space matrices must be finite")
        if n_x and np.max(np.abs(np.linalg.eigvals(A))) >= 1.0:
            raise ValueError("A must have spectral radius strictly below 1")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "B", _freeze(B))
        object.__setattr__(self, "C", _freeze(C))
        object.__setattr__(self, "D", _freeze(D))

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_i(self) -> int:
        return self.B.shape[1]

    @property
    def n_o(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class Signal:
    """Channel-major stacked signal over one trial.

    ``data`` has length ``N * channels``; ``space`` tags whether the signal
    lives on the input side ("input") or the output side ("output") of the
    plant.  Signals are immutable; arithmetic returns new instances.
    """

    data: np.ndarray
    space: str
    N: int
    channels: int

    def __post_init__(self):
        if self.space not in ("input", "output"):
            raise ValueError(f"space must be 'input' or 'output', got {self.space!r}")
        data = np.asarray(self.data, dtype=float).reshape(-1)
        if data.size != self.N * self.channels:
            raise ValueError(
                f"data length {data.size} != N*channels = {self.N * self.channels}")
        object.__setattr__(self, "data", _freeze(data))

    @classmethod
    def zeros(cls, space: str, N: int, channels: int) -> "Signal":
        return cls(np.zeros(N * channels), space, N, channels)

    def channel(self, l: int) -> np.ndarray:
        """Samples of channel ``l`` (0-based)."""
        return self.data[l * self.N:(l + 1) * self.N]

    def with_data(self, data: np.ndarray) -> "Signal":
        return Signal(data, self.space, self.N, self.channels)

    def _check_compatible(self, other: "Signal"):
        if (self.space, self.N, self.channels) != (other.space, other.N, other.channels):
            raise ValueError("signals live in different spaces")

    def __add__(self, other: "Signal") -> "Signal":
        self._check_compatible(other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other: "Signal") -> "Signal":
        self._check_compatible(other)
        return self.with_data(self.data - other.data)

    def __mul__(self, scalar: float) -> "Signal":
        return self.with_data(self.data * float(scalar))

    __rmul__ = __mul__

    def dot(self, other: "Signal") -> float:
        self._check_compatible(other)
        return float(self.data @ other.data)

    def norm_sq(self) -> float:
        return float(self.data @ self.data)


@dataclass(frozen=True)
class TimeReversal:
    """Per-channel sample-order reversal (block-diagonal, involutory)."""

    N: int
    channels: int

    def __call__(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data, dtype=float).reshape(self.channels, self.N)
        return data[:, ::-1].reshape(-1)

    def matrix(self) -> np.ndarray:
        """Dense permutation matrix, mainly for tests."""
        flip = np.eye(self.N)[::-1]
        M = np.zeros((self.N * self.channels,) * 2)
        for c in range(self.channels):
            M[c * self.N:(c + 1) * self.N, c * self.N:(c + 1) * self.N] = flip
        return M


@dataclass(frozen=True)
class LiftedSystem:
    """Dense lifted operator mapping stacked inputs to stacked outputs."""

    matrix: np.ndarray
    N: int
    n_i: int
    n_o: int

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.shape != (self.N * self.n_o, self.N * self.n_i):
            raise ValueError(
                f"matrix shape {matrix.shape} != ({self.N * self.n_o}, {self.N * self.n_i})")
        object.__setattr__(self, "matrix", _freeze(matrix))

    def block(self, l: int, m: int) -> np.ndarray:
        """The N x N Toeplitz block from input channel ``m`` to output ``l``."""
        N = self.N
        return self.matrix[l * N:(l + 1) * N, m * N:(m + 1) * N]


def markov_parameters(ss: StateSpace, N: int) -> np.ndarray:
    """First ``N`` Markov parameters, shape (N, n_o, n_i); index 0 is D."""
    out = np.empty((N, ss.n_o, ss.n_i))
    out[0] = ss.D
    X = ss.B.copy()
    for k in range(1, N):
        out[k] = ss.C @ X
        X = ss.A @ X
    return out


def lift(ss: StateSpace, N: int) -> LiftedSystem:
    """Build the lifted operator of ``ss`` over a trial of ``N`` samples.

    Block (l, m) is lower-triangular Toeplitz with the impulse response from
    input m to output l down its first column.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    markov = markov_parameters(ss, N)
    if not np.isfinite(markov).all():
        raise LiftingError("non-finite Markov parameters")
    idx = np.arange(N)
    lag = idx[:, None] - idx[None, :]
    causal = lag >= 0
    lag = lag.clip(min=0)
    J = np.zeros((N * ss.n_o, N * ss.n_i))
    for l in range(ss.n_o):
        for m in range(ss.n_i):
            J[l * N:(l + 1) * N, m * N:(m + 1) * N] = np.where(causal, markov[lag, l, m], 0.0)
    return LiftedSystem(J, N, ss.n_i, ss.n_o)


def apply(system: LiftedSystem, f: Signal) -> Signal:
    """Exact product y = J f for an input-space signal."""
    if f.space != "input" or f.N != system.N or f.channels != system.n_i:
        raise ValueError("signal is not an input of this system")
    return Signal(system.matrix @ f.data, "output", system.N, system.n_o)


def adjoint_apply(system: LiftedSystem, v: Signal) -> Signal:
    """Exact product J^T v; ground-truth oracle, not an experiment."""
    if v.space != "output" or v.N != system.N or v.channels != system.n_o:
        raise ValueError("signal is not an output of this system")
    return Signal(system.matrix.T @ v.data, "input", system.N, system.n_i)


def time_reverse(x: Signal) -> Signal:
    """Reverse sample order within each channel; channel order is kept."""
    return x.with_data(TimeReversal(x.N, x.channels)(x.data))


def system_to_json(ss: StateSpace, N: int) -> dict:
    """JSON document for a system; lifted blocks are re-derived on load."""
    return {
        "n_x": ss.n_x,
        "n_i": ss.n_i,
        "n_o": ss.n_o,
        "N": int(N),
        "A": ss.A.tolist(),
        "B": ss.B.tolist(),
        "C": ss.C.tolist(),
        "D": ss.D.tolist(),
    }


def system_from_json(doc: dict) -> tuple[StateSpace, int]:
    n_x, n_i, n_o = int(doc["n_x"]), int(doc["n_i"]), int(doc["n_o"])
    ss = StateSpace(
        A=np.asarray(doc["A"], dtype=float).reshape(n_x, n_x),
        B=np.asarray(doc["B"], dtype=float).reshape(n_x, n_i),
        C=np.asarray(doc["C"], dtype=float).reshape(n_o, n_x),
        D=np.asarray(doc["D"], dtype=float).reshape(n_o, n_i),
    )
    return ss, int(doc["N"])


def save_system(path, ss: StateSpace, N: int) -> None:
    with open(path, "w") as fh:
        json.dump(system_to_json(ss, N), fh, indent=1)
        fh.write("\n")


def load_system(path) -> tuple[StateSpace, int]:
    with open(path) as fh:
        return system_from_json(json.load(fh))
