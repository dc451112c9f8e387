"""LMI problem container, two-phase solve driver, and solution verification.

Strict matrix inequalities A(x) < 0 are closed with a per-constraint margin
eps = 1e-7 * (1 + ||constant block||) so returned certificates are
checkable; non-strict constraints keep eps = 0.  Feasibility is established
by a phase-I program

    minimize t  s.t.  A_k(x) + eps_k I <= t * sigma_k I,   t >= -1

whose blocks are rescaled by sigma_k = 1 + ||A0_k|| so t is dimensionless;
t < 0 exhibits a strictly feasible point.  Optimization runs phase-II from
the phase-I point.  Every reported FEASIBLE/OPTIMAL answer is re-verified
by dense eigendecomposition of all constraints; the solver is never
trusted blind.

Set IQCSYNC_SOLVER=cvxopt to route the conic subproblems to an external
backend instead of the bundled interior-point method.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .expr import MatExpr, VarSpace
from .ipm import ConeBlock, ipm_solve

__all__ = ["LmiProblem", "LmiSolution", "solve"]

MARGIN_COEFF = 1e-7
SCALAR_CAP = 1e9  # reciprocal multipliers are capped to keep degenerate faces compact


@dataclass
class _Constraint:
    A0: np.ndarray
    Aj: dict[int, np.ndarray]
    eps: float
    scale: float
    strict: bool
    name: str


@dataclass
class LmiProblem:
    """Symmetric-block LMIs, affine in the registered variables."""

    space: VarSpace
    constraints: list[_Constraint] = field(default_factory=list)
    objective: MatExpr | None = None  # 1x1 expression, minimized

    def _compile(self, expr: MatExpr, name: str) -> tuple[np.ndarray, dict[int, np.ndarray]]:
        if expr.shape[0] != expr.shape[1]:
            raise ValueError(f"constraint {name!r} is not square")
        skew = np.abs(expr.const - expr.const.T).max()
        if skew > 1e-9 * (1.0 + np.abs(expr.const).max()):
            raise ValueError(f"constraint {name!r} has a non-symmetric constant block")
        A0 = 0.5 * (expr.const + expr.const.T)
        Aj = {}
        for j, M in expr.coeffs.items():
            if np.abs(M - M.T).max() > 1e-9 * (1.0 + np.abs(M).max()):
                raise ValueError(
                    f"constraint {name!r}: coefficient of scalar variable {j} "
                    "is not symmetric (mismatched block assembly)"
                )
            Aj[j] = 0.5 * (M + M.T)
        return A0, Aj

    def add_neg(self, expr: MatExpr, name: str, strict: bool = True) -> None:
        """Constrain expr < 0 (or <= 0 when strict=False)."""
        A0, Aj = self._compile(expr, name)
        scale = 1.0 + (np.linalg.norm(A0, 2) if A0.size else 0.0)
        eps = MARGIN_COEFF * scale if strict else 0.0
        self.constraints.append(_Constraint(A0, Aj, eps, scale, strict, name))

    def add_pos(self, expr: MatExpr, name: str, strict: bool = True) -> None:
        """Constrain expr > 0 (or >= 0 when strict=False)."""
        self.add_neg((-1.0) * expr, name, strict)

    def cap_scalar(self, var_expr: MatExpr, cap: float = SCALAR_CAP) -> None:
        """Upper-bound a positive scalar variable (keeps free faces compact)."""
        name = f"cap[{sorted(var_expr.coeffs)[0]}]"
        self.add_neg(var_expr - cap * np.ones((1, 1)), name, strict=False)


@dataclass
class LmiSolution:
    """Verified solver answer for an LmiProblem."""

    status: str  # OPTIMAL | FEASIBLE | INFEASIBLE | NUMERICAL_FAILURE
    x: np.ndarray | None
    values: dict
    objective: float | None
    margins: dict[str, float]  # per constraint: lambda_max of the <0 form
    worst_margin: float | None
    solver: str
    iterations: int
    phase1_level: float | None
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status in ("OPTIMAL", "FEASIBLE")


def _backend() -> str:
    return os.environ.get("IQCSYNC_SOLVER", "").strip().lower() or "bundled"


def _conic(blocks: list[ConeBlock], c: np.ndarray, x0: np.ndarray, stop_early=None,
           min_slack: float = 0.0):
    backend = _backend()
    if backend == "bundled":
        return ipm_solve(blocks, c, x0, stop_early=stop_early, min_slack=min_slack)
    if backend == "cvxopt":
        return _cvxopt_solve(blocks, c)
    raise ValueError(f"unknown IQCSYNC_SOLVER backend {backend!r}")


def _cvxopt_solve(blocks: list[ConeBlock], c: np.ndarray):
    from cvxopt import matrix, solvers

    m = c.size
    Gs, hs = [], []
    for b in blocks:
        s = b.size
        G = np.zeros((s * s, m))
        for j, M in b.Fj.items():
            G[:, j] = (-M).reshape(s * s, order="F")
        Gs.append(matrix(G))
        hs.append(matrix(b.F0))
    opts = {"show_progress": False, "maxiters": 200}
    sol = solvers.sdp(matrix(c), Gs=Gs, hs=hs, options=opts)
    x = np.array(sol["x"]).ravel() if sol["x"] is not None else np.zeros(m)
    status = "optimal" if sol["status"] == "optimal" else "stalled"
    from .ipm import IpmResult

    return IpmResult(
        x=x, status=status, iterations=0, pobj=float(c @ x), dobj=float(c @ x),
        gap=0.0, pinfeas=0.0, dinfeas=0.0,
    )


def _feas_blocks(cons: list[_Constraint], m: int) -> list[ConeBlock]:
    """F-form blocks for A_k(x) + eps_k I <= t sigma_k I with t as var m.

    Every block is divided by its scale so constants are O(1) and t is
    dimensionless across blocks.
    """
    blocks = []
    for c in cons:
        s = c.A0.shape[0]
        F0 = -(c.A0 + c.eps * np.eye(s)) / c.scale
        Fj = {j: -M / c.scale for j, M in c.Aj.items()}
        Fj[m] = np.eye(s)
        blocks.append(ConeBlock(F0=F0, Fj=Fj))
    blocks.append(ConeBlock(F0=np.array([[1.0]]), Fj={m: np.array([[1.0]])}))  # t >= -1
    return blocks


def _orig_blocks(cons: list[_Constraint]) -> list[ConeBlock]:
    blocks = []
    for c in cons:
        s = c.A0.shape[0]
        F0 = -(c.A0 + c.eps * np.eye(s)) / c.scale
        Fj = {j: -M / c.scale for j, M in c.Aj.items()}
        blocks.append(ConeBlock(F0=F0, Fj=Fj))
    return blocks


def _verify(problem: LmiProblem, x: np.ndarray) -> tuple[bool, dict[str, float]]:
    margins: dict[str, float] = {}
    ok = True
    for c in problem.constraints:
        A = c.A0.copy()
        for j, M in c.Aj.items():
            A += x[j] * M
        lam = float(np.linalg.eigvalsh(0.5 * (A + A.T))[-1])
        margins[c.name] = lam
        limit = -0.5 * c.eps if c.strict else 1e-8 * c.scale
        if lam > limit:
            ok = False
    return ok, margins


def solve(problem: LmiProblem, x_init: np.ndarray | None = None) -> LmiSolution:
    """Two-phase solve of an LmiProblem; answers are eigenvalue-verified."""
    m = problem.space.dim
    cons = problem.constraints
    if not cons:
        raise ValueError("problem has no constraints")
    x0 = np.zeros(m) if x_init is None else np.asarray(x_init, float).copy()

    # ---- phase I: strict feasibility ------------------------------------
    fb = _feas_blocks(cons, m)
    t0 = -np.inf
    for c, blk in zip(cons, fb[:-1]):
        A = c.A0.copy()
        for j, M in c.Aj.items():
            A += x0[j] * M
        t0 = max(t0, (np.linalg.eigvalsh(0.5 * (A + A.T))[-1] + c.eps) / c.scale)
    t0 = max(t0 + 1.0, -0.5)
    ct = np.zeros(m + 1)
    ct[m] = 1.0
    feasibility_only = problem.objective is None
    stop = (lambda xt: xt[m] <= -0.9) if feasibility_only else None
    res1 = _conic(fb, ct, np.concatenate([x0, [t0]]), stop_early=stop)
    t_star = float(res1.x[m])
    x1 = res1.x[:m]

    ok, margins = _verify(problem, x1)
    if not ok:
        status = "INFEASIBLE" if res1.status == "optimal" else "NUMERICAL_FAILURE"
        return LmiSolution(
            status=status, x=x1, values=problem.space.unpack(x1), objective=None,
            margins=margins, worst_margin=max(margins.values()), solver=_backend(),
            iterations=res1.iterations, phase1_level=t_star,
            message=f"phase-I level {t_star:.3e} ({res1.status})",
        )
    if feasibility_only:
        return LmiSolution(
            status="FEASIBLE", x=x1, values=problem.space.unpack(x1), objective=None,
            margins=margins, worst_margin=max(margins.values()), solver=_backend(),
            iterations=res1.iterations, phase1_level=t_star,
        )

    # ---- phase II: minimize the objective from the interior point -------
    # the slack start is lifted off the boundary; the solver carries the
    # resulting primal residual explicitly
    c0, cvec = problem.objective.as_scalar_row(m)
    res2 = _conic(_orig_blocks(cons), cvec, x1, min_slack=1e-2)
    x2 = res2.x
    ok2, margins2 = _verify(problem, x2)
    if ok2:
        status = "OPTIMAL" if res2.status == "optimal" else "FEASIBLE"
        return LmiSolution(
            status=status, x=x2, values=problem.space.unpack(x2),
            objective=c0 + float(cvec @ x2), margins=margins2,
            worst_margin=max(margins2.values()), solver=_backend(),
            iterations=res1.iterations + res2.iterations, phase1_level=t_star,
            message="" if res2.status == "optimal" else f"phase-II {res2.status}",
        )
    # fall back to the verified phase-I point
    return LmiSolution(
        status="FEASIBLE", x=x1, values=problem.space.unpack(x1),
        objective=c0 + float(cvec @ x1), margins=margins,
        worst_margin=max(margins.values()), solver=_backend(),
        iterations=res1.iterations + res2.iterations, phase1_level=t_star,
        message=f"phase-II unverified ({res2.status}); returning phase-I point",
    )
