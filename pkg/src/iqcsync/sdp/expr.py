"""Affine symmetric-matrix expressions over scalar decision variables.

Matrix variables are flattened into a scalar decision vector x: a symmetric
n x n variable contributes its upper triangle, a rectangular p x n variable
all p*n entries, a scalar one entry.  A MatExpr is an affine map
x -> A0 + sum_j x_j A_j stored as a constant plus a sparse dict of
per-scalar coefficient matrices, which is all the interior-point backend
needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["VarSpace", "MatExpr", "const", "blockmat", "scalar_times"]


class MatExpr:
    """Affine matrix-valued expression: const + sum_j x_j * coeffs[j]."""

    __slots__ = ("shape", "const", "coeffs")

    # ndarray must defer binary ops (A @ expr, A + expr) to this class
    __array_ufunc__ = None

    def __init__(self, shape, const=None, coeffs=None):
        self.shape = tuple(shape)
        self.const = np.zeros(self.shape) if const is None else np.asarray(const, float)
        self.coeffs: dict[int, np.ndarray] = {} if coeffs is None else coeffs

    # -- algebra ------------------------------------------------------------
    def __add__(self, other):
        other = const(other, self.shape) if not isinstance(other, MatExpr) else other
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        out = MatExpr(self.shape, self.const + other.const, dict(self.coeffs))
        for j, M in other.coeffs.items():
            out.coeffs[j] = out.coeffs[j] + M if j in out.coeffs else M
        return out

    __radd__ = __add__

    def __sub__(self, other):
        other = const(other, self.shape) if not isinstance(other, MatExpr) else other
        return self + (-1.0) * other

    def __rsub__(self, other):
        return const(other, self.shape) + (-1.0) * self

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, a):
        a = float(a)
        return MatExpr(
            self.shape, a * self.const, {j: a * M for j, M in self.coeffs.items()}
        )

    __rmul__ = __mul__

    def __matmul__(self, B):
        if isinstance(B, MatExpr):
            raise TypeError("product of two variable expressions is not affine")
        B = np.atleast_2d(np.asarray(B, float))
        out = MatExpr((self.shape[0], B.shape[1]), self.const @ B)
        out.coeffs = {j: M @ B for j, M in self.coeffs.items()}
        return out

    def __rmatmul__(self, A):
        A = np.atleast_2d(np.asarray(A, float))
        out = MatExpr((A.shape[0], self.shape[1]), A @ self.const)
        out.coeffs = {j: A @ M for j, M in self.coeffs.items()}
        return out

    @property
    def T(self) -> "MatExpr":
        out = MatExpr((self.shape[1], self.shape[0]), self.const.T)
        out.coeffs = {j: M.T for j, M in self.coeffs.items()}
        return out

    def sym(self) -> "MatExpr":
        return 0.5 * (self + self.T)

    # -- evaluation ---------------------------------------------------------
    def value(self, x: np.ndarray) -> np.ndarray:
        out = self.const.copy()
        for j, M in self.coeffs.items():
            out += x[j] * M
        return out

    def as_scalar_row(self, m: int) -> tuple[float, np.ndarray]:
        """Interpret a 1x1 expression as c0 + c'x over m scalar variables."""
        if self.shape != (1, 1):
            raise ValueError("objective must be a 1x1 expression")
        c = np.zeros(m)
        for j, M in self.coeffs.items():
            c[j] = M[0, 0]
        return float(self.const[0, 0]), c


def const(M, shape=None) -> MatExpr:
    M = np.atleast_2d(np.asarray(M, float))
    if shape is not None and M.shape != tuple(shape):
        if M.size == 1:
            M = float(M) * np.ones(shape) if shape == (1, 1) else None
        if M is None or M.shape != tuple(shape):
            raise ValueError("constant shape mismatch")
    return MatExpr(M.shape, M)


def scalar_times(s: MatExpr, M) -> MatExpr:
    """Product of a 1x1 affine expression with a constant matrix."""
    if s.shape != (1, 1):
        raise ValueError("scalar_times needs a 1x1 expression")
    M = np.atleast_2d(np.asarray(M, float))
    out = MatExpr(M.shape, float(s.const[0, 0]) * M)
    out.coeffs = {j: float(cj[0, 0]) * M for j, cj in s.coeffs.items()}
    return out


def blockmat(rows) -> MatExpr:
    """Assemble a block matrix from MatExpr / ndarray / 0 entries.

    A literal 0 entry is zero fill; its shape is inferred from the row and
    column partners, so every row and column needs at least one shaped entry.
    """
    nr = len(rows)
    nc = len(rows[0])
    if any(len(r) != nc for r in rows):
        raise ValueError("ragged block structure")

    def shape_of(e):
        if isinstance(e, MatExpr):
            return e.shape
        if isinstance(e, (int, float)) and e == 0:
            return None
        return np.atleast_2d(np.asarray(e, float)).shape

    heights = [None] * nr
    widths = [None] * nc
    for a in range(nr):
        for b in range(nc):
            s = shape_of(rows[a][b])
            if s is None:
                continue
            if heights[a] is None:
                heights[a] = s[0]
            elif heights[a] != s[0]:
                raise ValueError(f"row {a} height mismatch")
            if widths[b] is None:
                widths[b] = s[1]
            elif widths[b] != s[1]:
                raise ValueError(f"column {b} width mismatch")
    if any(h is None for h in heights) or any(w is None for w in widths):
        raise ValueError("a block row/column consists only of zero fill")

    R, Ctot = int(sum(heights)), int(sum(widths))
    out = MatExpr((R, Ctot))
    r0 = 0
    for a in range(nr):
        c0 = 0
        for b in range(nc):
            e = rows[a][b]
            h, w = heights[a], widths[b]
            if isinstance(e, MatExpr):
                out.const[r0 : r0 + h, c0 : c0 + w] = e.const
                for j, M in e.coeffs.items():
                    if j not in out.coeffs:
                        out.coeffs[j] = np.zeros((R, Ctot))
                    out.coeffs[j][r0 : r0 + h, c0 : c0 + w] = M
            elif not (isinstance(e, (int, float)) and e == 0):
                out.const[r0 : r0 + h, c0 : c0 + w] = np.atleast_2d(np.asarray(e, float))
            c0 += w
        r0 += h
    return out


@dataclass
class _VarInfo:
    name: str
    kind: str  # "sym" | "rect" | "scalar"
    shape: tuple[int, int]
    offset: int
    size: int


@dataclass
class VarSpace:
    """Registry mapping named matrix/scalar variables to scalar slots."""

    infos: list[_VarInfo] = field(default_factory=list)
    dim: int = 0

    def _register(self, name, kind, shape, size) -> _VarInfo:
        if any(v.name == name for v in self.infos):
            raise ValueError(f"duplicate variable name {name!r}")
        info = _VarInfo(name, kind, shape, self.dim, size)
        self.infos.append(info)
        self.dim += size
        return info

    def sym(self, name: str, n: int) -> MatExpr:
        """Symmetric n x n matrix variable."""
        info = self._register(name, "sym", (n, n), n * (n + 1) // 2)
        e = MatExpr((n, n))
        j = info.offset
        for a in range(n):
            for b in range(a, n):
                B = np.zeros((n, n))
                B[a, b] = 1.0
                B[b, a] = 1.0
                e.coeffs[j] = B
                j += 1
        return e

    def rect(self, name: str, p: int, n: int) -> MatExpr:
        """Rectangular p x n matrix variable."""
        info = self._register(name, "rect", (p, n), p * n)
        e = MatExpr((p, n))
        j = info.offset
        for a in range(p):
            for b in range(n):
                B = np.zeros((p, n))
                B[a, b] = 1.0
                e.coeffs[j] = B
                j += 1
        return e

    def scalar(self, name: str) -> MatExpr:
        info = self._register(name, "scalar", (1, 1), 1)
        e = MatExpr((1, 1))
        e.coeffs[info.offset] = np.ones((1, 1))
        return e

    def unpack(self, x: np.ndarray) -> dict[str, np.ndarray | float]:
        """Recover named variable values from a scalar decision vector."""
        out: dict[str, np.ndarray | float] = {}
        for v in self.infos:
            xs = x[v.offset : v.offset + v.size]
            if v.kind == "scalar":
                out[v.name] = float(xs[0])
            elif v.kind == "rect":
                out[v.name] = xs.reshape(v.shape)
            else:
                n = v.shape[0]
                M = np.zeros((n, n))
                k = 0
                for a in range(n):
                    for b in range(a, n):
                        M[a, b] = xs[k]
                        M[b, a] = xs[k]
                        k += 1
                out[v.name] = M
        return out
