"""Plant data, cost weights, and the admissible uncertainty operator families.

An uncertainty operator maps a relative-state history y(s), 0 <= s <= t,
into an m-vector and is required to satisfy the energy bound

    int_0^T ||phi(t, y)||^2 dt  <=  int_0^T ||C y||^2 dt

for a shared bounding matrix C.  Three families are shipped: a norm-bounded
time-varying gain, an input delay, and a first-order lag driven through C.
Histories are uniform-grid samples; off-grid lookups interpolate linearly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "SystemModel",
    "SampledSignal",
    "NormBounded",
    "InputDelay",
    "FirstOrderLag",
    "UncertaintyOp",
    "EdgeCouplingSet",
    "apply_uncertainty",
    "iqc_audit",
]


def _sym_check(name: str, M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.allclose(M, M.T, atol=1e-12 * (1.0 + np.abs(M).max())):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(M)[0] <= 0:
        raise ValueError(f"{name} must be positive definite")
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SystemModel:
    """State-space data (A, B1, B2, C) with quadratic weights (Q, R).

    A is n x n, B1 n x p (control channel), B2 n x m (coupling channel),
    C r x n (coupling bound).  Q and R are symmetric positive definite.
    """

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    @staticmethod
    def create(A, B1, B2, C, Q, R) -> "SystemModel":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B1 = np.atleast_2d(np.asarray(B1, dtype=float))
        B2 = np.atleast_2d(np.asarray(B2, dtype=float))
        C = np.atleast_2d(np.asarray(C, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        if B1.shape[0] != n or B2.shape[0] != n or C.shape[1] != n:
            raise ValueError("B1, B2 rows and C columns must match the state dimension")
        for name, M in (("A", A), ("B1", B1), ("B2", B2), ("C", C)):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} has non-finite entries")
        m = SystemModel(A=A, B1=B1, B2=B2, C=C, Q=_sym_check("Q", Q), R=_sym_check("R", R))
        if m.Q.shape[0] != n:
            raise ValueError("Q must be n x n")
        if m.R.shape[0] != B1.shape[1]:
            raise ValueError("R must be p x p")
        return m

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B1.shape[1]

    @property
    def m(self) -> int:
        return self.B2.shape[1]

    @property
    def r(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class SampledSignal:
    """Uniform-grid samples of a vector signal starting at t = 0.

    values has shape (n_samples, dim); sample k sits at t = k * h.
    """

    h: float
    values: np.ndarray

    @staticmethod
    def create(h: float, values) -> "SampledSignal":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if h <= 0:
            raise ValueError("grid step h must be positive")
        return SampledSignal(h=float(h), values=values)

    @property
    def t_end(self) -> float:
        return (self.values.shape[0] - 1) * self.h

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation between grid points; t must lie in range."""
        if t < -1e-12 or t > self.t_end + 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"t={t} outside sampled range [0, {self.t_end}]")
        s = min(max(t / self.h, 0.0), self.values.shape[0] - 1.0)
        k = int(np.floor(s))
        if k >= self.values.shape[0] - 1:
            return self.values[-1]
        w = s - k
        return (1.0 - w) * self.values[k] + w * self.values[k + 1]


# --------------------------------------------------------------------------
# Operator families (Assumption-1 style: causal, linear, energy bounded by C)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormBounded:
    """phi(t, y) = Delta(t) C y(t) with Delta(t)' Delta(t) <= I."""

    delta: Callable[[float], np.ndarray]
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))

    def delta_at(self, t: float) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.delta(t), dtype=float))

    def validate(self, ts) -> None:
        """Sample Delta(t)'Delta(t) <= I on a time grid; raise on violation."""
        for t in np.asarray(ts, dtype=float):
            D = self.delta_at(t)
            gram = D.T @ D
            lam = np.linalg.eigvalsh(0.5 * (gram + gram.T))[-1]
            if lam > 1.0 + 1e-9:
                raise ValueError(f"Delta({t})'Delta({t}) has eigenvalue {lam} > 1")


@dataclass(frozen=True)
class InputDelay:
    """phi(t, y) = C y(t - tau) for t >= tau, zero before the delay elapses."""

    tau: float
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))
        if self.tau < 0:
            raise ValueError("delay tau must be nonnegative")


@dataclass(frozen=True)
class FirstOrderLag:
    """phi(t, y) = zeta(t) where zeta' = -a zeta + C y, zeta(0) = 0.

    The filter is driven through C so its output lives in the C-bounded
    channel; the energy bound holds with unit margin when a >= 1 (the filter
    has L2 gain 1/a from C y to zeta).
    """

    a: float
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))
        if self.a <= 0:
            raise ValueError("lag pole a must be positive")

    def filter_states(self, history: SampledSignal) -> np.ndarray:
        """zeta at every grid point, exact for piecewise-linear C y input."""
        cy = history.values @ self.C.T  # (S, r) with r == m for this family
        S = cy.shape[0]
        z = np.zeros_like(cy)
        h, a = history.h, self.a
        ea = np.exp(-a * h)
        # int_0^h e^{-a(h-s)} (c0 + s*(c1-c0)/h) ds, exact per interval
        w0 = (1.0 - ea) / a - (h - (1.0 - ea) / a) / (a * h)
        w1 = (h - (1.0 - ea) / a) / (a * h)
        for k in range(S - 1):
            z[k + 1] = ea * z[k] + w0 * cy[k] + w1 * cy[k + 1]
        return z


UncertaintyOp = Union[NormBounded, InputDelay, FirstOrderLag]


def apply_uncertainty(op: UncertaintyOp, history: SampledSignal, t: float) -> np.ndarray:
    """Evaluate phi(t, y(.)|_0^t) for a sampled history.

    The output depends only on samples at times <= t (causality); delayed
    lookups interpolate linearly between grid points.
    """
    if t < -1e-12 or t > history.t_end + 1e-9 * max(1.0, history.t_end):
        raise ValueError(f"t={t} outside the sampled history range [0, {history.t_end}]")
    C = op.C
    if C.shape[1] != history.values.shape[1]:
        raise ValueError(
            f"C has {C.shape[1]} columns but the signal has dimension "
            f"{history.values.shape[1]}"
        )
    if isinstance(op, NormBounded):
        return op.delta_at(t) @ (C @ history.at(t))
    if isinstance(op, InputDelay):
        if t < op.tau:
            return np.zeros(C.shape[0])
        return C @ history.at(t - op.tau)
    if isinstance(op, FirstOrderLag):
        # integrate up to the last grid point <= t, then a partial step
        k = int(np.floor(t / history.h + 1e-12))
        k = min(k, history.values.shape[0] - 1)
        sub = SampledSignal(h=history.h, values=history.values[: k + 1])
        z = op.filter_states(sub)[-1]
        dt = t - k * history.h
        if dt > 1e-12:
            a = op.a
            cy0 = C @ history.values[k]
            cy1 = C @ history.at(t)
            ea = np.exp(-a * dt)
            w0 = (1.0 - ea) / a - (dt - (1.0 - ea) / a) / (a * dt)
            w1 = (dt - (1.0 - ea) / a) / (a * dt)
            z = ea * z + w0 * cy0 + w1 * cy1
        return z
    raise TypeError(f"unknown uncertainty operator {type(op)!r}")


def _outputs_on_grid(op: UncertaintyOp, y: SampledSignal, upto: int) -> np.ndarray:
    """phi at every grid point 0..upto, vectorized per family."""
    C = op.C
    if isinstance(op, NormBounded):
        cy = y.values[: upto + 1] @ C.T
        return np.stack([op.delta_at(k * y.h) @ cy[k] for k in range(upto + 1)])
    if isinstance(op, InputDelay):
        out = np.zeros((upto + 1, C.shape[0]))
        for k in range(upto + 1):
            t = k * y.h
            if t >= op.tau:
                out[k] = C @ y.at(t - op.tau)
        return out
    if isinstance(op, FirstOrderLag):
        return op.filter_states(y)[: upto + 1]
    raise TypeError(f"unknown uncertainty operator {type(op)!r}")


def iqc_audit(op: UncertaintyOp, y: SampledSignal, T: float) -> float:
    """Energy ratio (int ||phi||^2) / (int ||C y||^2) over [0, T], trapezoidal.

    Admissible operators return a ratio <= 1 up to quadrature error.
    Raises on a degenerate denominator.
    """
    if T <= 0 or T > y.t_end + 1e-9 * max(1.0, y.t_end):
        raise ValueError(f"T={T} outside (0, {y.t_end}]")
    upto = int(round(T / y.h))
    upto = min(upto, y.values.shape[0] - 1)
    cy = y.values[: upto + 1] @ op.C.T
    den = np.trapezoid((cy**2).sum(axis=1), dx=y.h)
    if den <= 1e-14 * (1.0 + float((y.values[: upto + 1] ** 2).sum())):
        raise ValueError("degenerate IQC denominator: int ||C y||^2 is (numerically) zero")
    phi = _outputs_on_grid(op, y, upto)
    num = np.trapezoid((phi**2).sum(axis=1), dx=y.h)
    return float(num / den)


@dataclass(frozen=True)
class EdgeCouplingSet:
    """Per-edge uncertainty operators for nonidentically coupled networks.

    Maps ordered node pairs to operators: (i, j) is the operator follower i
    applies to the relative signal x_j - x_i; the leader participates as
    node 0 through pairs (i, 0) and (0, i) for every d_i = 1 follower.
    Every operator carries its own bound matrix C_ij.
    """

    ops: dict[tuple[int, int], UncertaintyOp]

    @staticmethod
    def create(ops: dict[tuple[int, int], UncertaintyOp], topo) -> "EdgeCouplingSet":
        for i, j in topo.phys_edges:
            for key in ((i, j), (j, i)):
                if key not in ops:
                    raise ValueError(f"missing coupling operator for edge direction {key}")
        for i, di in enumerate(topo.d, start=1):
            if di:
                for key in ((i, 0), (0, i)):
                    if key not in ops:
                        raise ValueError(f"missing leader coupling operator {key}")
        for key, op in ops.items():
            if not np.all(np.isfinite(op.C)):
                raise ValueError(f"C for edge {key} has non-finite entries")
        return EdgeCouplingSet(ops=dict(ops))

    def bound_matrix(self, i: int, j: int) -> np.ndarray:
        return self.ops[(i, j)].C

    @staticmethod
    def identical(op: UncertaintyOp, topo) -> "EdgeCouplingSet":
        """Wrap a single shared operator as a per-edge table."""
        ops: dict[tuple[int, int], UncertaintyOp] = {}
        for i, j in topo.phys_edges:
            ops[(i, j)] = op
            ops[(j, i)] = op
        for i, di in enumerate(topo.d, start=1):
            if di:
                ops[(i, 0)] = op
                ops[(0, i)] = op
        return EdgeCouplingSet(ops=ops)
