"""Primal-dual interior-point method for small dense SDPs.

Solves
    minimize    c'x
    subject to  F_k(x) = F0_k + sum_j x_j Fj_k  >= 0   (PSD, per block k)

with Nesterov-Todd scaling and a Mehrotra-style adaptive centering
parameter.  The dual iterate Z_k lives in the PSD cone per block; the
Schur complement system H dx = rhs with
H[l,j] = sum_k <Fl_k, W_k^{-1} Fj_k W_k^{-1}> is symmetric positive
definite and is factored once per iteration.

Two convergence tiers are used: the strict tolerances, and a hundredfold
relaxed tier that still counts as optimal when the iteration stalls (the
end game of badly conditioned problems routinely dithers around the last
digit).  Block sizes up to a few hundred and a few hundred scalar
variables are the intended regime; everything is dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ConeBlock", "IpmResult", "ipm_solve"]


@dataclass
class ConeBlock:
    """One PSD constraint F0 + sum_j x_j Fj >= 0 (coefficients are symmetric)."""

    F0: np.ndarray
    Fj: dict[int, np.ndarray]

    @property
    def size(self) -> int:
        return self.F0.shape[0]

    def eval(self, x: np.ndarray) -> np.ndarray:
        S = self.F0.copy()
        for j, M in self.Fj.items():
            S += x[j] * M
        return S


@dataclass
class IpmResult:
    x: np.ndarray
    status: str  # "optimal" | "max_iter" | "stalled"
    iterations: int
    pobj: float
    dobj: float
    gap: float
    pinfeas: float
    dinfeas: float
    history: list[dict] = field(default_factory=list)


class _Block:
    """Batched view of a ConeBlock: coefficients stacked along axis 0."""

    __slots__ = ("F0", "js", "Fmat", "size")

    def __init__(self, b: ConeBlock):
        self.F0 = b.F0
        self.js = np.array(sorted(b.Fj), dtype=int)
        self.Fmat = (
            np.stack([b.Fj[j] for j in self.js])
            if self.js.size
            else np.zeros((0, b.size, b.size))
        )
        self.size = b.size

    def eval(self, x: np.ndarray) -> np.ndarray:
        if not self.js.size:
            return self.F0.copy()
        return self.F0 + np.tensordot(x[self.js], self.Fmat, axes=1)


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _psd_sqrt_pair(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, Q = np.linalg.eigh(_sym(M))
    w = np.maximum(w, 1e-300)
    sq = np.sqrt(w)
    return (Q * sq) @ Q.T, (Q / sq) @ Q.T


def _nt_scaling(S: np.ndarray, Z: np.ndarray):
    """NT scaling point: W Z W = S.  Returns (Winv, Zinv)."""
    wz, Qz = np.linalg.eigh(_sym(Z))
    wz = np.maximum(wz, 1e-300)
    Zh = (Qz * np.sqrt(wz)) @ Qz.T
    Zinv = (Qz / wz) @ Qz.T
    mid = _sym(Zh @ S @ Zh)
    _, Mih = _psd_sqrt_pair(mid)
    Winv = _sym(Zh @ Mih @ Zh)
    return Winv, Zinv


def _max_step(S: np.ndarray, dS: np.ndarray) -> float:
    """Largest alpha with S + alpha*dS >= 0, via L^{-1} dS L^{-T} eigenvalues."""
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(dS))):
        return 0.0
    try:
        L = np.linalg.cholesky(_sym(S))
        A = np.linalg.solve(L, np.linalg.solve(L, dS).T).T
        lam = np.linalg.eigvalsh(_sym(A))[0]
    except np.linalg.LinAlgError:
        return 0.0
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _is_pd(M: np.ndarray) -> bool:
    if not np.all(np.isfinite(M)):
        return False
    try:
        np.linalg.cholesky(_sym(M))
        return True
    except np.linalg.LinAlgError:
        return False


def ipm_solve(
    blocks: list[ConeBlock],
    c: np.ndarray,
    x0: np.ndarray,
    max_iter: int = 200,
    tol_gap: float = 1e-9,
    tol_feas: float = 1e-9,
    step_frac: float = 0.98,
    stop_early=None,
    min_slack: float = 0.0,
) -> IpmResult:
    """Run the predictor-corrector iteration from x0.

    The slack start is S = F(x0) with eigenvalues floored at `min_slack`
    (an infeasible but well-centred start when F(x0) is nearly singular);
    the primal residual F(x) - S is carried explicitly and decays with the
    step length.  `stop_early(x)` may return True to accept the current
    iterate before optimality; callers re-verify feasibility.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _run(blocks, c, x0, max_iter, tol_gap, tol_feas, step_frac,
                    stop_early, min_slack)


def _run(raw_blocks, c, x0, max_iter, tol_gap, tol_feas, step_frac, stop_early, min_slack):
    blocks = [_Block(b) for b in raw_blocks]
    nb = len(blocks)
    m = c.size
    x = np.asarray(x0, float).copy()
    S = []
    for b in blocks:
        Sk = _sym(b.eval(x))
        lam = np.linalg.eigvalsh(Sk)[0]
        if min_slack > 0.0:
            if lam < min_slack:
                Sk = Sk + (min_slack - lam) * np.eye(b.size)
        elif lam <= 0:
            raise ValueError(
                f"initial point is not strictly feasible (lambda_min={lam:.3e}); "
                "pass min_slack > 0 for an infeasible start"
            )
        S.append(Sk)
    Z = [np.eye(b.size) for b in blocks]
    ntot = sum(b.size for b in blocks)
    cnorm = 1.0 + (np.abs(c).max() if m else 0.0)
    f0norm = 1.0 + max(np.abs(b.F0).max() for b in blocks)

    def residuals():
        Rp = [_sym(blocks[k].eval(x)) - S[k] for k in range(nb)]
        rd = c.copy()
        for k, b in enumerate(blocks):
            if b.js.size:
                rd[b.js] -= b.Fmat.reshape(b.js.size, -1) @ Z[k].ravel()
        return Rp, rd

    best = None
    history: list[dict] = []
    stall = 0
    status = "max_iter"
    it = 0
    relgap = np.inf
    pinf = dinf = np.inf
    for it in range(1, max_iter + 1):
        Rp, rd = residuals()
        mu = sum(float(np.tensordot(S[k], Z[k])) for k in range(nb)) / ntot
        pobj = float(c @ x)
        dobj = -sum(float(np.tensordot(blocks[k].F0, Z[k])) for k in range(nb))
        gap = abs(pobj - dobj)
        pinf = max(np.abs(R).max() for R in Rp) / f0norm
        dinf = (np.abs(rd).max() / cnorm) if m else 0.0
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))
        history.append(
            {"iter": it, "mu": mu, "pobj": pobj, "dobj": dobj, "pinf": pinf, "dinf": dinf}
        )
        if best is None or (relgap + pinf + dinf) < best[0]:
            best = (relgap + pinf + dinf, x.copy(), pobj, dobj, gap, pinf, dinf)
        if stop_early is not None and pinf < tol_feas and stop_early(x):
            status = "optimal"
            break
        if relgap < tol_gap and pinf < tol_feas and dinf < tol_feas:
            status = "optimal"
            break

        # NT scaling, batched coefficient transforms, Schur complement
        Winv, Zinv, G = [], [], []
        for k, b in enumerate(blocks):
            Wi, Zi = _nt_scaling(S[k], Z[k])
            Winv.append(Wi)
            Zinv.append(Zi)
            G.append(Wi @ b.Fmat @ Wi if b.js.size else None)
        H = np.zeros((m, m))
        for k, b in enumerate(blocks):
            if not b.js.size:
                continue
            v = b.js.size
            Hk = b.Fmat.reshape(v, -1) @ G[k].reshape(v, -1).T
            H[np.ix_(b.js, b.js)] += 0.5 * (Hk + Hk.T)
        if not np.all(np.isfinite(H)):
            status = "stalled"
            break
        jitter = 0.0
        for _ in range(4):
            try:
                Lh = np.linalg.cholesky(H + jitter * np.eye(m))
                break
            except np.linalg.LinAlgError:
                jitter = max(jitter * 100.0, 1e-12 * (1.0 + np.trace(H) / max(m, 1)))
        else:
            status = "stalled"
            break

        def directions(Rc):
            V = [_sym(Winv[k] @ (Rc[k] - Rp[k]) @ Winv[k]) for k in range(nb)]
            rhs = -rd.copy()
            for k, b in enumerate(blocks):
                if b.js.size:
                    rhs[b.js] += b.Fmat.reshape(b.js.size, -1) @ V[k].ravel()
            dx = np.linalg.solve(Lh.T, np.linalg.solve(Lh, rhs))
            dS, dZ = [], []
            for k, b in enumerate(blocks):
                if b.js.size:
                    step = np.tensordot(dx[b.js], b.Fmat, axes=1)
                    dS.append(_sym(step + Rp[k]))
                    dZ.append(_sym(V[k] - np.tensordot(dx[b.js], G[k], axes=1)))
                else:
                    dS.append(Rp[k].copy())
                    dZ.append(V[k].copy())
            return dx, dS, dZ

        # predictor (affine scaling), then Mehrotra centering weight
        dx_a, dS_a, dZ_a = directions([-S[k] for k in range(nb)])
        ap = min(1.0, step_frac * min(_max_step(S[k], dS_a[k]) for k in range(nb)))
        ad = min(1.0, step_frac * min(_max_step(Z[k], dZ_a[k]) for k in range(nb)))
        mu_aff = sum(
            float(np.tensordot(S[k] + ap * dS_a[k], Z[k] + ad * dZ_a[k]))
            for k in range(nb)
        ) / ntot
        sigma = min(0.99, max(1e-8, (max(mu_aff, 0.0) / mu) ** 3))

        # corrector (recentred)
        dx, dS, dZ = directions([sigma * mu * Zinv[k] - S[k] for k in range(nb)])
        if not np.all(np.isfinite(dx)) or not all(
            np.all(np.isfinite(d)) for d in dS + dZ
        ):
            status = "stalled"
            break
        ap = min(1.0, step_frac * min(_max_step(S[k], dS[k]) for k in range(nb)))
        ad = min(1.0, step_frac * min(_max_step(Z[k], dZ[k]) for k in range(nb)))
        for _ in range(30):  # rounding can defeat the fractional step
            if all(_is_pd(S[k] + ap * dS[k]) for k in range(nb)):
                break
            ap *= 0.5
        for _ in range(30):
            if all(_is_pd(Z[k] + ad * dZ[k]) for k in range(nb)):
                break
            ad *= 0.5
        if ap < 1e-10 and ad < 1e-10:
            stall += 1
            if stall >= 3:
                status = "stalled"
                break
        else:
            stall = 0
        x = x + ap * dx
        S = [_sym(S[k] + ap * dS[k]) for k in range(nb)]
        Z = [_sym(Z[k] + ad * dZ[k]) for k in range(nb)]

    # a stall within 100x of the tolerances is the end game, not a failure
    if status in ("stalled", "max_iter") and best is not None:
        _, bx, bpobj, bdobj, bgap, bpinf, bdinf = best
        brelgap = bgap / (1.0 + abs(bpobj) + abs(bdobj))
        if brelgap < 100 * tol_gap and bpinf < 100 * tol_feas and bdinf < 100 * tol_feas:
            return IpmResult(
                x=bx, status="optimal", iterations=it, pobj=bpobj, dobj=bdobj,
                gap=bgap, pinfeas=bpinf, dinfeas=bdinf, history=history,
            )
        x = bx

    Rp, rd = residuals()
    pobj = float(c @ x)
    dobj = -sum(float(np.tensordot(blocks[k].F0, Z[k])) for k in range(nb))
    return IpmResult(
        x=x,
        status=status,
        iterations=it,
        pobj=pobj,
        dobj=dobj,
        gap=abs(pobj - dobj),
        pinfeas=max(np.abs(R).max() for R in Rp) / f0norm,
        dinfeas=(np.abs(rd).max() / cnorm) if m else 0.0,
        history=history,
    )
