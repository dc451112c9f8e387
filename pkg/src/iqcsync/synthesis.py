"""Gain synthesis with certified consensus-tracking performance bounds.

Five construction routes are provided: the coupled per-node block LMIs
with a shared (Y, F) pair (THM1), the single decoupled LMI every node can
solve locally (THM2), the direct per-node conditions sized by physical
in-degrees (THM3), their nonidentical-coupling generalization (THM4), and
the uncertainty-free Riccati special case (COR1).  Each returns a
Certificate holding the gain, the Lyapunov-like matrix Y, the positive
multipliers, and the guaranteed upper bound on the closed-loop quadratic
cost.

Bound optimization minimizes gamma subject to the method LMIs plus the
epigraph block [[gamma, e0'], [e0, I kron Y]] (scaled by lambda_min /
lambda_max^2 for THM3); a trace variant handles random initial states with
known covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SpectralData, Topology
from .model import EdgeCouplingSet, SystemModel
from .sdp.expr import MatExpr, VarSpace, blockmat, scalar_times
from .sdp.problem import LmiProblem, LmiSolution, solve

__all__ = [
    "Certificate",
    "synth_thm1",
    "synth_thm2",
    "synth_thm3",
    "synth_thm4",
    "synth_cor1",
    "optimize_bound",
    "optimize_trace",
]


@dataclass
class Certificate:
    """LMI solution packaged with the gain and the performance bound."""

    method: str  # THM1 | THM2 | THM3 | THM4 | COR1
    K: np.ndarray
    Y: np.ndarray
    multipliers: dict
    bound: float
    F: np.ndarray | None = None
    gamma: float | None = None
    e0: np.ndarray | None = None
    solution: LmiSolution | None = None

    @property
    def feasible(self) -> bool:
        return self.solution is None or self.solution.feasible


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    w, Q = np.linalg.eigh(0.5 * (M + M.T))
    w = np.clip(w, 0.0, None)
    return (Q * np.sqrt(w)) @ Q.T


def _as_e0(e0, N: int, n: int) -> np.ndarray:
    e0 = np.asarray(e0, float)
    if e0.size != N * n:
        raise ValueError(f"e0 must have {N * n} entries, got {e0.size}")
    return e0.reshape(N, n)


def _bound_from_Y(Y: np.ndarray, e0: np.ndarray, prefactor: float = 1.0) -> float:
    Yinv = np.linalg.inv(Y)
    return prefactor * float(np.einsum("in,nm,im->", e0, Yinv, e0))


def _hrep(e: MatExpr, k: int) -> MatExpr:
    return blockmat([[e] * k])


def _vrep(e: MatExpr, k: int) -> MatExpr:
    return blockmat([[e]] * k)


def _diag(entries: list) -> MatExpr:
    k = len(entries)
    return blockmat([[entries[a] if a == b else 0 for b in range(k)] for a in range(k)])


def _trace_expr(S: MatExpr) -> MatExpr:
    out = MatExpr((1, 1), np.array([[np.trace(S.const)]]))
    out.coeffs = {j: np.array([[np.trace(M)]]) for j, M in S.coeffs.items()}
    return out


def _infeasible_error(method: str, sol: LmiSolution) -> RuntimeError:
    worst = "n/a" if sol.worst_margin is None else f"{sol.worst_margin:.3e}"
    return RuntimeError(
        f"{method} synthesis {sol.status}: worst constraint eigenvalue {worst}; "
        f"{sol.message or 'no strictly feasible point found'}"
    )


# ---------------------------------------------------------------------------
# THM1: N coupled LMIs sharing (Y, F), multipliers pi_i, theta_i
# ---------------------------------------------------------------------------


def _build_thm1(model: SystemModel, sd: SpectralData):
    N = sd.lambdas.size
    n, p, r = model.n, model.p, model.r
    A, B1, B2, C = model.A, model.B1, model.B2, model.C
    Rinv = np.linalg.inv(model.R)
    B2B2 = B2 @ B2.T

    sp = VarSpace()
    Y = sp.sym("Y", n)
    F = sp.rect("F", p, n)
    p_inv = [sp.scalar(f"pi_inv_{i + 1}") for i in range(N)]
    t_inv = [sp.scalar(f"theta_inv_{i + 1}") for i in range(N)] if N > 1 else []

    pb = LmiProblem(space=sp)
    pb.add_pos(Y, "Y_pd")
    YC = Y @ C.T
    CY = YC.T
    for i in range(N):
        lam = sd.lambdas[i]
        Mi = sd.M[i]
        cross = float((Mi**2).sum() - Mi[i] ** 2)
        Z = (A @ Y + (A @ Y).T + lam * (B1 @ F + (B1 @ F).T)).sym()
        Z = Z + scalar_times(p_inv[i], Mi[i] ** 2 * B2B2)
        if N > 1:
            Z = Z + scalar_times(t_inv[i], cross * B2B2)
        Qi_h = _psd_sqrt(lam * model.Q)
        rows = [
            [Z, F.T, Y @ Qi_h, YC],
            [F, -(1.0 / lam**2) * Rinv, 0, 0],
            [Qi_h @ Y, 0, -np.eye(n), 0],
            [CY, 0, 0, scalar_times(p_inv[i], -np.eye(r))],
        ]
        if N > 1:
            others = [j for j in range(N) if j != i]
            rows[0].append(_hrep(YC, N - 1))
            for rr in rows[1:]:
                rr.append(0)
            last = [_vrep(CY, N - 1), 0, 0, 0,
                    _diag([scalar_times(t_inv[j], -np.eye(r)) for j in others])]
            rows.append(last)
        pb.add_neg(blockmat(rows), f"lmi17[{i + 1}]")
    for s in p_inv + t_inv:
        pb.cap_scalar(s)
    return pb, sp


def _thm1_cert(model, sd, sol: LmiSolution, e0: np.ndarray) -> Certificate:
    N = sd.lambdas.size
    Y = sol.values["Y"]
    F = sol.values["F"]
    K = F @ np.linalg.inv(Y)
    pi = np.array([1.0 / sol.values[f"pi_inv_{i + 1}"] for i in range(N)])
    mult = {"pi": pi}
    if N > 1:
        mult["theta"] = np.array([1.0 / sol.values[f"theta_inv_{i + 1}"] for i in range(N)])
    return Certificate(
        method="THM1", K=K, Y=Y, F=F, multipliers=mult,
        bound=_bound_from_Y(Y, e0), e0=e0, solution=sol,
    )


def synth_thm1(model: SystemModel, topo: Topology, sd: SpectralData, e0) -> Certificate:
    """Solve the N coupled LMIs simultaneously; K = F Y^{-1}."""
    e0 = _as_e0(e0, topo.N, model.n)
    pb, _ = _build_thm1(model, sd)
    sol = solve(pb)
    if not sol.feasible:
        raise _infeasible_error("THM1", sol)
    return _thm1_cert(model, sd, sol, e0)


# ---------------------------------------------------------------------------
# THM2: one decoupled LMI, multipliers pi, theta
# ---------------------------------------------------------------------------


def _build_thm2(model: SystemModel, sd: SpectralData):
    N = sd.lambdas.size
    n, r = model.n, model.r
    A, B1, B2, C = model.A, model.B1, model.B2, model.C
    Rinv = np.linalg.inv(model.R)
    lam_lo, lam_hi = sd.lambda_min, sd.lambda_max

    sp = VarSpace()
    Y = sp.sym("Y", n)
    p_inv = sp.scalar("pi_inv")
    t_inv = sp.scalar("theta_inv") if N > 1 else None

    pb = LmiProblem(space=sp)
    pb.add_pos(Y, "Y_pd")
    Zbar = (A @ Y + (A @ Y).T).sym() - (lam_lo**2 / lam_hi**2) * (B1 @ Rinv @ B1.T)
    Zbar = Zbar + scalar_times(p_inv, sd.w2 * (B2 @ B2.T))
    if N > 1:
        Zbar = Zbar + scalar_times(t_inv, sd.q2 * (B2 @ B2.T))
    Qh = _psd_sqrt(lam_hi * model.Q)
    YC = Y @ C.T
    CY = YC.T
    rows = [
        [Zbar, Y @ Qh, YC],
        [Qh @ Y, -np.eye(n), 0],
        [CY, 0, scalar_times(p_inv, -np.eye(r))],
    ]
    if N > 1:
        rows[0].append(YC)
        rows[1].append(0)
        rows[2].append(0)
        rows.append([CY, 0, 0, scalar_times(t_inv, -(1.0 / (N - 1)) * np.eye(r))])
    pb.add_neg(blockmat(rows), "lmi21")
    pb.cap_scalar(p_inv)
    if t_inv is not None:
        pb.cap_scalar(t_inv)
    return pb, sp


def thm2_gain(model: SystemModel, sd: SpectralData, Y: np.ndarray) -> np.ndarray:
    Rinv = np.linalg.inv(model.R)
    return -(sd.lambda_min / sd.lambda_max**2) * (Rinv @ model.B1.T @ np.linalg.inv(Y))


def _thm2_cert(model, sd, sol: LmiSolution, e0: np.ndarray) -> Certificate:
    Y = sol.values["Y"]
    mult = {"pi": 1.0 / sol.values["pi_inv"]}
    if "theta_inv" in sol.values:
        mult["theta"] = 1.0 / sol.values["theta_inv"]
    return Certificate(
        method="THM2", K=thm2_gain(model, sd, Y), Y=Y, multipliers=mult,
        bound=_bound_from_Y(Y, e0), e0=e0, solution=sol,
    )


def synth_thm2(model: SystemModel, topo: Topology, sd: SpectralData, e0) -> Certificate:
    """Solve the single node-independent LMI; K = -lam_min lam_max^-2 R^-1 B1' Y^-1."""
    e0 = _as_e0(e0, topo.N, model.n)
    pb, _ = _build_thm2(model, sd)
    sol = solve(pb)
    if not sol.feasible:
        raise _infeasible_error("THM2", sol)
    return _thm2_cert(model, sd, sol, e0)


# ---------------------------------------------------------------------------
# THM3: direct per-node conditions with in-degree-sized blocks
# ---------------------------------------------------------------------------


def _build_thm3(model: SystemModel, topo: Topology, sd: SpectralData):
    N = topo.N
    n, r = model.n, model.r
    A, B1, B2, C = model.A, model.B1, model.B2, model.C
    Rinv = np.linalg.inv(model.R)
    lam_lo, lam_hi = sd.lambda_min, sd.lambda_max
    B2B2 = B2 @ B2.T
    pinned = [i for i in range(1, N + 1) if topo.d[i - 1]]

    sp = VarSpace()
    Y = sp.sym("Y", n)
    nu_inv = {i: sp.scalar(f"nu_inv_{i}") for i in range(1, N + 1)}
    mu_inv = {}
    for i in range(1, N + 1):
        for j in topo.phys_neighbors(i):
            mu_inv[(i, j)] = sp.scalar(f"mu_inv_{i}_{j}")
    nu0_inv = {i: sp.scalar(f"nu0_inv_{i}") for i in pinned}
    mu0_inv = {i: sp.scalar(f"mu0_inv_{i}") for i in pinned}

    pb = LmiProblem(space=sp)
    pb.add_pos(Y, "Y_pd")
    Qbar_h = _psd_sqrt((lam_lo / lam_hi) * model.Q)
    YC = Y @ C.T
    CY = YC.T
    stat = (A @ Y + (A @ Y).T).sym() - lam_lo * (B1 @ Rinv @ B1.T)
    leader_term = None
    for k in pinned:
        t = scalar_times(mu0_inv[k], B2B2)
        leader_term = t if leader_term is None else leader_term + t

    for i in range(1, N + 1):
        Si = topo.phys_neighbors(i)
        fi = len(Si)
        Z = stat
        if fi:
            Z = Z + scalar_times(nu_inv[i], fi**2 * B2B2)
            for j in Si:
                Z = Z + scalar_times(mu_inv[(i, j)], B2B2)
        if leader_term is not None:
            Z = Z + leader_term
        if topo.d[i - 1]:
            Z = Z + scalar_times(nu0_inv[i], B2B2)
        rows = [
            [Z, Y @ Qbar_h, YC],
            [Qbar_h @ Y, -np.eye(n), 0],
            [CY, 0, scalar_times(nu_inv[i], -np.eye(r))],
        ]
        if fi:
            rows[0].append(_hrep(YC, fi))
            rows[1].append(0)
            rows[2].append(0)
            omega = _diag([scalar_times(mu_inv[(j, i)], -np.eye(r)) for j in Si])
            rows.append([_vrep(CY, fi), 0, 0, omega])
        if topo.d[i - 1]:
            width = len(rows[0])
            rows[0].extend([YC, YC])
            for rr in rows[1:]:
                rr.extend([0, 0])
            row_nu0 = [CY] + [0] * (width - 1)
            row_nu0 += [scalar_times(nu0_inv[i], -np.eye(r)), 0]
            row_mu0 = [CY] + [0] * (width - 1)
            row_mu0 += [0, scalar_times(mu0_inv[i], -(1.0 / N) * np.eye(r))]
            rows.append(row_nu0)
            rows.append(row_mu0)
        pb.add_neg(blockmat(rows), f"pi[{i}]")

    for s in list(nu_inv.values()) + list(mu_inv.values()):
        pb.cap_scalar(s)
    for s in list(nu0_inv.values()) + list(mu0_inv.values()):
        pb.cap_scalar(s)
    return pb, sp


def _thm3_cert(model, topo, sd, sol: LmiSolution, e0: np.ndarray) -> Certificate:
    N = topo.N
    Y = sol.values["Y"]
    K = -np.linalg.inv(model.R) @ model.B1.T @ np.linalg.inv(Y)
    pinned = [i for i in range(1, N + 1) if topo.d[i - 1]]
    mult = {
        "nu": {i: 1.0 / sol.values[f"nu_inv_{i}"] for i in range(1, N + 1)},
        "mu": {
            (i, j): 1.0 / sol.values[f"mu_inv_{i}_{j}"]
            for i in range(1, N + 1)
            for j in topo.phys_neighbors(i)
        },
        "nu0": {i: 1.0 / sol.values[f"nu0_inv_{i}"] for i in pinned},
        "mu0": {i: 1.0 / sol.values[f"mu0_inv_{i}"] for i in pinned},
    }
    pref = sd.lambda_max**2 / sd.lambda_min
    return Certificate(
        method="THM3", K=K, Y=Y, multipliers=mult,
        bound=_bound_from_Y(Y, e0, pref), e0=e0, solution=sol,
    )


def synth_thm3(model: SystemModel, topo: Topology, sd: SpectralData, e0) -> Certificate:
    """Direct method: per-node LMIs sized by f_i and d_i; K = -R^-1 B1' Y^-1."""
    e0 = _as_e0(e0, topo.N, model.n)
    pb, _ = _build_thm3(model, topo, sd)
    sol = solve(pb)
    if not sol.feasible:
        raise _infeasible_error("THM3", sol)
    return _thm3_cert(model, topo, sd, sol, e0)


# ---------------------------------------------------------------------------
# THM4: nonidentical couplings with per-edge bound matrices
# ---------------------------------------------------------------------------


def _build_thm4(model: SystemModel, topo: Topology, sd: SpectralData, couplings: EdgeCouplingSet):
    N = topo.N
    n = model.n
    A, B1, B2 = model.A, model.B1, model.B2
    Rinv = np.linalg.inv(model.R)
    lam_lo, lam_hi = sd.lambda_min, sd.lambda_max
    B2B2 = B2 @ B2.T
    pinned = [i for i in range(1, N + 1) if topo.d[i - 1]]

    sp = VarSpace()
    Y = sp.sym("Y", n)
    nu_inv, mu_inv = {}, {}
    for i in range(1, N + 1):
        for j in topo.phys_neighbors(i):
            nu_inv[(i, j)] = sp.scalar(f"nu_inv_{i}_{j}")
            mu_inv[(i, j)] = sp.scalar(f"mu_inv_{i}_{j}")
    nu0_inv = {i: sp.scalar(f"nu0_inv_{i}") for i in pinned}
    mu0_inv = {i: sp.scalar(f"mu0_inv_{i}") for i in pinned}

    pb = LmiProblem(space=sp)
    pb.add_pos(Y, "Y_pd")
    Qbar_h = _psd_sqrt((lam_lo / lam_hi) * model.Q)
    stat = (A @ Y + (A @ Y).T).sym() - lam_hi * (B1 @ Rinv @ B1.T)
    leader_term = None
    for k in pinned:
        t = scalar_times(mu0_inv[k], B2B2)
        leader_term = t if leader_term is None else leader_term + t

    for i in range(1, N + 1):
        Si = topo.phys_neighbors(i)
        fi = len(Si)
        Z = stat
        for j in Si:
            Z = Z + scalar_times(nu_inv[(i, j)], B2B2)
            Z = Z + scalar_times(mu_inv[(i, j)], B2B2)
        if leader_term is not None:
            Z = Z + leader_term
        if topo.d[i - 1]:
            Z = Z + scalar_times(nu0_inv[i], B2B2)
        rows = [[Z, Y @ Qbar_h], [Qbar_h @ Y, -np.eye(n)]]
        if fi:
            Chat = [couplings.bound_matrix(i, j) for j in Si]
            Cbar = [couplings.bound_matrix(j, i) for j in Si]
            rows[0].append(blockmat([[Y @ Cij.T for Cij in Chat]]))
            rows[0].append(blockmat([[Y @ Cji.T for Cji in Cbar]]))
            rows[1].extend([0, 0])
            W = _diag([scalar_times(nu_inv[(i, j)], -np.eye(Cij.shape[0]))
                       for j, Cij in zip(Si, Chat)])
            Om = _diag([scalar_times(mu_inv[(j, i)], -np.eye(Cji.shape[0]))
                        for j, Cji in zip(Si, Cbar)])
            rows.append([blockmat([[Cij @ Y] for Cij in Chat]), 0, W, 0])
            rows.append([blockmat([[Cji @ Y] for Cji in Cbar]), 0, 0, Om])
        if topo.d[i - 1]:
            Ci0 = couplings.bound_matrix(i, 0)
            C0i = couplings.bound_matrix(0, i)
            width = len(rows[0])
            rows[0].extend([Y @ Ci0.T, Y @ C0i.T])
            for rr in rows[1:]:
                rr.extend([0, 0])
            row_nu0 = [Ci0 @ Y] + [0] * (width - 1)
            row_nu0 += [scalar_times(nu0_inv[i], -np.eye(Ci0.shape[0])), 0]
            row_mu0 = [C0i @ Y] + [0] * (width - 1)
            row_mu0 += [0, scalar_times(mu0_inv[i], -(1.0 / N) * np.eye(C0i.shape[0]))]
            rows.append(row_nu0)
            rows.append(row_mu0)
        pb.add_neg(blockmat(rows), f"gamma_i[{i}]")

    for s in list(nu_inv.values()) + list(mu_inv.values()):
        pb.cap_scalar(s)
    for s in list(nu0_inv.values()) + list(mu0_inv.values()):
        pb.cap_scalar(s)
    return pb, sp


def synth_thm4(
    model: SystemModel,
    topo: Topology,
    sd: SpectralData,
    couplings: EdgeCouplingSet,
    e0,
) -> Certificate:
    """Nonidentical couplings: per-edge bound matrices C_ij; K = -R^-1 B1' Y^-1."""
    e0 = _as_e0(e0, topo.N, model.n)
    pb, _ = _build_thm4(model, topo, sd, couplings)
    sol = solve(pb)
    if not sol.feasible:
        raise _infeasible_error("THM4", sol)
    N = topo.N
    Y = sol.values["Y"]
    K = -np.linalg.inv(model.R) @ model.B1.T @ np.linalg.inv(Y)
    pinned = [i for i in range(1, N + 1) if topo.d[i - 1]]
    pairs = [(i, j) for i in range(1, N + 1) for j in topo.phys_neighbors(i)]
    mult = {
        "nu": {(i, j): 1.0 / sol.values[f"nu_inv_{i}_{j}"] for i, j in pairs},
        "mu": {(i, j): 1.0 / sol.values[f"mu_inv_{i}_{j}"] for i, j in pairs},
        "nu0": {i: 1.0 / sol.values[f"nu0_inv_{i}"] for i in pinned},
        "mu0": {i: 1.0 / sol.values[f"mu0_inv_{i}"] for i in pinned},
    }
    pref = sd.lambda_max**2 / sd.lambda_min
    return Certificate(
        method="THM4", K=K, Y=Y, multipliers=mult,
        bound=_bound_from_Y(Y, e0, pref), e0=e0, solution=sol,
    )


# ---------------------------------------------------------------------------
# COR1: B2 = 0, C = 0 — simultaneous Riccati inequalities
# ---------------------------------------------------------------------------


def synth_cor1(model: SystemModel, topo: Topology, sd: SpectralData, e0) -> Certificate:
    """Uncertainty-free case; solves the Riccati conditions via Y = X^{-1}."""
    if np.any(model.B2 != 0) or np.any(model.C != 0):
        raise ValueError("COR1 applies only to models with B2 = 0 and C = 0")
    e0 = _as_e0(e0, topo.N, model.n)
    n = model.n
    A, B1 = model.A, model.B1
    Rinv = np.linalg.inv(model.R)
    lam_hi = sd.lambda_max

    sp = VarSpace()
    Y = sp.sym("Y", n)
    pb = LmiProblem(space=sp)
    pb.add_pos(Y, "Y_pd")
    for i, lam in enumerate(sd.lambdas):
        ratio = lam / lam_hi
        Z = (A @ Y + (A @ Y).T).sym() - ratio * (2.0 - ratio) * (B1 @ Rinv @ B1.T)
        Qi_h = _psd_sqrt(lam * model.Q)
        pb.add_neg(
            blockmat([[Z, Y @ Qi_h], [Qi_h @ Y, -np.eye(n)]]), f"riccati[{i + 1}]"
        )
    sol = solve(pb)
    if not sol.feasible:
        raise _infeasible_error("COR1", sol)
    Yv = sol.values["Y"]
    X = np.linalg.inv(Yv)
    K = -(1.0 / lam_hi) * (Rinv @ B1.T @ X)
    return Certificate(
        method="COR1", K=K, Y=Yv, multipliers={},
        bound=_bound_from_Y(Yv, e0), e0=e0, solution=sol,
    )


# ---------------------------------------------------------------------------
# Suboptimal-bound optimization (gamma epigraph and trace variants)
# ---------------------------------------------------------------------------

_BUILDERS = {
    "THM1": lambda model, topo, sd, coup: _build_thm1(model, sd),
    "THM2": lambda model, topo, sd, coup: _build_thm2(model, sd),
    "THM3": lambda model, topo, sd, coup: _build_thm3(model, topo, sd),
    "THM4": lambda model, topo, sd, coup: _build_thm4(model, topo, sd, coup),
}


def _finalize(method, model, topo, sd, sol, e0, couplings=None) -> Certificate:
    if method == "THM1":
        return _thm1_cert(model, sd, sol, e0)
    if method == "THM2":
        return _thm2_cert(model, sd, sol, e0)
    if method == "THM3":
        return _thm3_cert(model, topo, sd, sol, e0)
    raise ValueError(f"unsupported optimization method {method!r}")


def _bound_prefactor(method: str, sd: SpectralData) -> float:
    return sd.lambda_max**2 / sd.lambda_min if method in ("THM3", "THM4") else 1.0


def optimize_bound(
    method: str, model: SystemModel, topo: Topology, sd: SpectralData, e0
) -> Certificate:
    """Minimize gamma subject to the method LMIs plus the epigraph block.

    The epigraph block is kept as a closed (non-strict) constraint so the
    achieved gamma matches the bound formula at the optimizer up to solver
    tolerance, which is exactly the equivalence the optimization theorems
    assert.
    """
    if method not in ("THM1", "THM2", "THM3"):
        raise ValueError("optimize_bound supports THM1, THM2 and THM3")
    e0 = _as_e0(e0, topo.N, model.n)
    pb, sp = _BUILDERS[method](model, topo, sd, None)
    gamma = sp.scalar("gamma")
    Y = _var_expr(sp, "Y")
    scale = sd.lambda_min / sd.lambda_max**2 if method == "THM3" else 1.0
    Yblk = _diag([scale * Y] * topo.N)
    e0row = e0.reshape(1, -1)
    pb.add_pos(
        blockmat([[gamma, e0row], [e0row.T, Yblk]]), "bound_epigraph", strict=False
    )
    pb.objective = gamma
    sol = solve(pb)
    if not sol.feasible:
        raise _infeasible_error(method, sol)
    cert = _finalize(method, model, topo, sd, sol, e0)
    cert.gamma = float(sol.values["gamma"])
    return cert


def optimize_trace(
    method: str, model: SystemModel, topo: Topology, sd: SpectralData, Mcov
) -> Certificate:
    """Minimize Tr(Y^-1 Mcov) for random initial states with covariance Mcov.

    Uses the epigraph S >= Mcov^{1/2} Y^{-1} Mcov^{1/2} in Schur form; the
    reported bound is the method prefactor times N Tr(Y^-1 Mcov).
    """
    if method not in ("THM1", "THM2", "THM3"):
        raise ValueError("optimize_trace supports THM1, THM2 and THM3")
    Mcov = np.asarray(Mcov, float)
    if Mcov.shape != (model.n, model.n):
        raise ValueError("Mcov must be n x n")
    if np.linalg.eigvalsh(0.5 * (Mcov + Mcov.T))[0] <= 0:
        raise ValueError("Mcov must be symmetric positive definite")
    pb, sp = _BUILDERS[method](model, topo, sd, None)
    S = sp.sym("S_epi", model.n)
    Y = _var_expr(sp, "Y")
    Mh = _psd_sqrt(Mcov)
    pb.add_pos(blockmat([[S, Mh], [Mh, Y]]), "trace_epigraph", strict=False)
    pb.objective = _trace_expr(S)
    sol = solve(pb)
    if not sol.feasible:
        raise _infeasible_error(method, sol)
    zero_e0 = np.zeros((topo.N, model.n))
    cert = _finalize(method, model, topo, sd, sol, zero_e0)
    pref = _bound_prefactor(method, sd)
    cert.bound = pref * topo.N * float(
        np.trace(np.linalg.solve(cert.Y, Mcov))
    )
    cert.e0 = None
    return cert


def _var_expr(sp: VarSpace, name: str) -> MatExpr:
    """Rebuild the MatExpr view of an already-registered variable."""
    for v in sp.infos:
        if v.name == name:
            if v.kind != "sym":
                raise ValueError("only symmetric variables are rebuilt")
            n = v.shape[0]
            e = MatExpr((n, n))
            j = v.offset
            for a in range(n):
                for b in range(a, n):
                    B = np.zeros((n, n))
                    B[a, b] = 1.0
                    B[b, a] = 1.0
                    e.coeffs[j] = B
                    j += 1
            return e
    raise KeyError(name)
