"""Control/interconnection topologies, Laplacians, pinning and spectral data.

The control graph lives on the follower nodes {1..N} and is augmented by a
0/1 pinning vector g marking followers that observe the leader.  The
interconnection graph additionally couples the leader to the followers
marked by the 0/1 vector d.  All synthesis conditions are driven by the
eigenstructure of L_c + G and by the coupling matrix M obtained by rotating
L_phi0 + D + Dbar into the eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Topology",
    "SpectralData",
    "laplacian",
    "adjacency",
    "spectral",
    "transform_errors",
    "untransform_errors",
]

EdgeSet = frozenset


def _normalize_edges(edges, N: int) -> frozenset[tuple[int, int]]:
    """Validate an undirected edge list on nodes {1..N} and canonicalize it."""
    out = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValueError(f"self-loop at node {i} is not allowed")
        if not (1 <= i <= N and 1 <= j <= N):
            raise ValueError(f"edge ({i},{j}) out of range 1..{N}")
        key = (min(i, j), max(i, j))
        if key in out:
            raise ValueError(f"repeated edge {key}")
        out.add(key)
    return frozenset(out)


def adjacency(edges, N: int) -> np.ndarray:
    """0/1 adjacency matrix of an undirected edge set on {1..N}."""
    edges = _normalize_edges(edges, N)
    A = np.zeros((N, N))
    for i, j in edges:
        A[i - 1, j - 1] = 1.0
        A[j - 1, i - 1] = 1.0
    return A


def laplacian(edges, N: int) -> np.ndarray:
    """Graph Laplacian (degree minus adjacency) of an undirected edge set."""
    A = adjacency(edges, N)
    return np.diag(A.sum(axis=1)) - A


def _is_connected(edges: frozenset[tuple[int, int]], N: int) -> bool:
    if N <= 1:
        return True
    nbrs: dict[int, list[int]] = {i: [] for i in range(1, N + 1)}
    for i, j in edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    seen = {1}
    stack = [1]
    while stack:
        for k in nbrs[stack.pop()]:
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return len(seen) == N


@dataclass(frozen=True)
class Topology:
    """Follower count plus control/physical edge sets and leader couplings.

    g marks followers that use the leader's state for control (pinned
    nodes); d marks followers physically coupled to the leader.  Both are
    0/1 vectors of length N.
    """

    N: int
    control_edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    phys_edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    g: tuple[int, ...] = ()
    d: tuple[int, ...] = ()

    @staticmethod
    def create(N, control_edges, phys_edges, g, d) -> "Topology":
        g = tuple(int(v) for v in g)
        d = tuple(int(v) for v in d)
        if len(g) != N or len(d) != N:
            raise ValueError("g and d must have length N")
        if any(v not in (0, 1) for v in g + d):
            raise ValueError("g and d entries must be 0 or 1")
        topo = Topology(
            N=int(N),
            control_edges=_normalize_edges(control_edges, N),
            phys_edges=_normalize_edges(phys_edges, N),
            g=g,
            d=d,
        )
        if sum(g) == 0:
            raise ValueError("at least one follower must observe the leader (g != 0)")
        if not _is_connected(topo.control_edges, N):
            raise ValueError("control graph is not connected")
        return topo

    # --- control side -----------------------------------------------------
    def lap_control(self) -> np.ndarray:
        return laplacian(self.control_edges, self.N)

    def pinning(self) -> np.ndarray:
        return np.diag(np.asarray(self.g, dtype=float))

    def lc_plus_g(self) -> np.ndarray:
        return self.lap_control() + self.pinning()

    def control_degrees(self) -> np.ndarray:
        """h_i: number of control neighbors of each follower."""
        return adjacency(self.control_edges, self.N).sum(axis=1)

    def control_neighbors(self, i: int) -> list[int]:
        return sorted(
            j
            for j in range(1, self.N + 1)
            if (min(i, j), max(i, j)) in self.control_edges and j != i
        )

    # --- physical side ----------------------------------------------------
    def lap_phys(self) -> np.ndarray:
        return laplacian(self.phys_edges, self.N)

    def d_matrix(self) -> np.ndarray:
        return np.diag(np.asarray(self.d, dtype=float))

    def d_bar(self) -> np.ndarray:
        """Rank-one matrix with every row equal to d'."""
        return np.tile(np.asarray(self.d, dtype=float), (self.N, 1))

    def phys_neighbors(self, i: int) -> list[int]:
        return sorted(
            j
            for j in range(1, self.N + 1)
            if (min(i, j), max(i, j)) in self.phys_edges and j != i
        )

    def in_degrees(self) -> np.ndarray:
        """f_i: number of physical neighbors among the followers."""
        return adjacency(self.phys_edges, self.N).sum(axis=1)

    def full_phys_laplacian(self) -> np.ndarray:
        """Laplacian of the interconnection graph on nodes {0..N}.

        Row/column 0 is the leader; its off-diagonal pattern is -d.
        """
        N = self.N
        d = np.asarray(self.d, dtype=float)
        L = np.zeros((N + 1, N + 1))
        L[1:, 1:] = self.lap_phys() + self.d_matrix()
        L[0, 0] = d.sum()
        L[0, 1:] = -d
        L[1:, 0] = -d
        return L


@dataclass(frozen=True)
class SpectralData:
    """Eigenstructure of L_c + G and the rotated physical coupling matrix."""

    lambdas: np.ndarray  # ascending positive eigenvalues
    T: np.ndarray  # orthogonal, columns are eigenvectors
    M: np.ndarray  # T^{-1} (L_phi0 + D + Dbar) T

    @property
    def lambda_min(self) -> float:
        return float(self.lambdas[0])

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[-1])

    @property
    def w2(self) -> float:
        """max_i M_ii^2"""
        return float(np.max(np.diag(self.M) ** 2))

    @property
    def q2(self) -> float:
        """max_i sum_{j != i} M_ij^2"""
        M2 = self.M**2
        return float(np.max(M2.sum(axis=1) - np.diag(M2)))


def spectral(topo: Topology) -> SpectralData:
    """Symmetric eigendecomposition of L_c + G and the rotated coupling matrix.

    Eigenvalues are returned in ascending order; each eigenvector's sign is
    fixed so its first nonzero entry is positive, which makes M reproducible
    across runs and platforms.
    """
    LcG = topo.lc_plus_g()
    lambdas, T = np.linalg.eigh(LcG)
    if lambdas[0] <= 0:
        raise ValueError(
            "L_c + G is not positive definite; control graph must be connected "
            "with at least one pinned node"
        )
    # deterministic sign convention
    T = T.copy()
    for k in range(T.shape[1]):
        col = T[:, k]
        idx = np.argmax(np.abs(col) > 1e-12 * np.linalg.norm(col))
        if col[idx] < 0:
            T[:, k] = -col
    coupling = topo.lap_phys() + topo.d_matrix() + topo.d_bar()
    M = T.T @ coupling @ T
    sd = SpectralData(lambdas=lambdas, T=T, M=M)
    _check_spectral(sd, LcG)
    return sd


def _check_spectral(sd: SpectralData, LcG: np.ndarray, tol: float = 1e-10) -> None:
    N = sd.T.shape[0]
    if np.max(np.abs(sd.T.T @ sd.T - np.eye(N))) > tol:
        raise ArithmeticError("eigensolver returned a non-orthogonal basis")
    D = sd.T.T @ LcG @ sd.T
    if np.max(np.abs(D - np.diag(sd.lambdas))) > tol * max(1.0, sd.lambda_max):
        raise ArithmeticError("eigendecomposition residual too large")


def transform_errors(e: np.ndarray, sd: SpectralData) -> np.ndarray:
    """Apply (T^{-1} kron I_n) to a stacked error vector e = [e_1; ...; e_N]."""
    N = sd.T.shape[0]
    e = np.asarray(e, dtype=float)
    if e.size % N != 0:
        raise ValueError(f"stacked vector of size {e.size} does not split into {N} nodes")
    n = e.size // N
    return (sd.T.T @ e.reshape(N, n)).reshape(e.shape)


def untransform_errors(eps: np.ndarray, sd: SpectralData) -> np.ndarray:
    """Apply (T kron I_n); inverse of :func:`transform_errors`."""
    N = sd.T.shape[0]
    eps = np.asarray(eps, dtype=float)
    if eps.size % N != 0:
        raise ValueError(f"stacked vector of size {eps.size} does not split into {N} nodes")
    n = eps.size // N
    return (sd.T @ eps.reshape(N, n)).reshape(eps.shape)
