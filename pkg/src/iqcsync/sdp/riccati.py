"""Riccati-inequality residuals equivalent to the synthesis LMIs.

Each synthesis method's block LMI is, by Schur complement, equivalent to a
set of per-node Riccati inequalities in Y^{-1}.  Evaluating those
inequalities directly on a returned certificate is an independent check of
both the LMI assembly and the solver: every residual matrix must be
negative definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ResidualReport", "schur_reduce"]


@dataclass(frozen=True)
class ResidualReport:
    method: str
    max_eigs: np.ndarray  # per node, lambda_max of the residual matrix
    ok: bool

    @property
    def worst(self) -> float:
        return float(self.max_eigs.max())


def _lam_max(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])


def schur_reduce(cert, model, topo, sd, couplings=None) -> ResidualReport:
    """Evaluate the per-node Riccati residuals for a certificate.

    `cert` must expose method, Y, K and the method's multiplier map.  For
    nonidentical couplings the per-edge bound matrices are read from
    `couplings`.
    """
    method = cert.method
    Y = np.asarray(cert.Y, float)
    K = np.asarray(cert.K, float)
    Yinv = np.linalg.inv(Y)
    A, B1, B2, C = model.A, model.B1, model.B2, model.C
    Q, R = model.Q, model.R
    Rinv = np.linalg.inv(R)
    lam = sd.lambdas
    N = topo.N
    mult = cert.multipliers
    eigs = np.zeros(N)

    if method in ("THM1", "THM2"):
        if method == "THM1":
            pi = np.asarray(mult["pi"], float)
            th = np.asarray(mult["theta"], float) if "theta" in mult else np.zeros(0)
        else:
            pi = np.full(N, float(mult["pi"]))
            th = np.full(N, float(mult.get("theta", np.nan)))
        B2B2 = B2 @ B2.T
        CC = C.T @ C
        for i in range(N):
            Acl = A + lam[i] * (B1 @ K)
            Resid = Yinv @ Acl + Acl.T @ Yinv + lam[i] ** 2 * (K.T @ R @ K) + lam[i] * Q
            Mi = sd.M[i]
            coup = Mi[i] ** 2 / pi[i]
            cross = float((Mi**2).sum() - Mi[i] ** 2)
            if N > 1:
                coup += cross / th[i]
                theta_bar = float(th.sum() - th[i])
            else:
                theta_bar = 0.0
            Resid += coup * (Yinv @ B2B2 @ Yinv) + (pi[i] + theta_bar) * CC
            eigs[i] = _lam_max(Resid)

    elif method == "THM3":
        nu = mult["nu"]
        mu = mult["mu"]
        nu0 = mult["nu0"]
        mu0 = mult["mu0"]
        lam_lo, lam_hi = sd.lambda_min, sd.lambda_max
        Qbar = (lam_lo / lam_hi) * Q
        B2B2 = B2 @ B2.T
        CC = C.T @ C
        leader_sum = sum(1.0 / mu0[k] for k in mu0)
        Acl = A + lam_lo * (B1 @ K)
        base = Yinv @ Acl + Acl.T @ Yinv + lam_lo * (K.T @ R @ K) + Qbar
        for i in range(1, N + 1):
            Si = topo.phys_neighbors(i)
            fi = len(Si)
            coup = leader_sum
            cterm = 0.0
            if fi:
                coup += fi**2 / nu[i] + sum(1.0 / mu[(i, j)] for j in Si)
                cterm += sum(mu[(j, i)] for j in Si)
            cterm += nu[i]
            if topo.d[i - 1]:
                coup += 1.0 / nu0[i]
                cterm += nu0[i] + N * mu0[i]
            Resid = base + coup * (Yinv @ B2B2 @ Yinv) + cterm * CC
            eigs[i - 1] = _lam_max(Resid)

    elif method == "THM4":
        nu = mult["nu"]
        mu = mult["mu"]
        nu0 = mult["nu0"]
        mu0 = mult["mu0"]
        lam_lo, lam_hi = sd.lambda_min, sd.lambda_max
        Qbar = (lam_lo / lam_hi) * Q
        B2B2 = B2 @ B2.T
        leader_sum = sum(1.0 / mu0[k] for k in mu0)
        base = (
            Yinv @ A + A.T @ Yinv
            - lam_hi * (Yinv @ B1 @ Rinv @ B1.T @ Yinv)
            + Qbar
        )
        for i in range(1, N + 1):
            Si = topo.phys_neighbors(i)
            coup = leader_sum
            Cterm = np.zeros((model.n, model.n))
            for j in Si:
                coup += 1.0 / nu[(i, j)] + 1.0 / mu[(i, j)]
                Cij = couplings.bound_matrix(i, j)
                Cji = couplings.bound_matrix(j, i)
                Cterm += nu[(i, j)] * (Cij.T @ Cij) + mu[(j, i)] * (Cji.T @ Cji)
            if topo.d[i - 1]:
                coup += 1.0 / nu0[i]
                Ci0 = couplings.bound_matrix(i, 0)
                C0i = couplings.bound_matrix(0, i)
                Cterm += nu0[i] * (Ci0.T @ Ci0) + N * mu0[i] * (C0i.T @ C0i)
            Resid = base + coup * (Yinv @ B2B2 @ Yinv) + Cterm
            eigs[i - 1] = _lam_max(Resid)

    elif method == "COR1":
        X = Yinv
        lam_hi = sd.lambda_max
        for i in range(N):
            ratio = lam[i] / lam_hi
            Resid = (
                X @ A + A.T @ X
                - ratio * (2.0 - ratio) * (X @ B1 @ Rinv @ B1.T @ X)
                + lam[i] * Q
            )
            eigs[i] = _lam_max(Resid)
    else:
        raise ValueError(f"unknown certificate method {method!r}")

    return ResidualReport(method=method, max_eigs=eigs, ok=bool(np.all(eigs < 0)))
