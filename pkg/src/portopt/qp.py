"""Convex quadratic programming via a primal-dual path-following interior point.

Problem shape:

    minimize    x' S x                 (S enters as q = 2 S, the objective Hessian)
    subject to  a_k' x  = rhs_k        equalities
                a_i' x >= rhs_i        general inequalities
                lb <= x <= ub          optional per-variable bounds
                r' x - kappa * sqrt(x' S x) >= 0     optional risk-limit cone row

Equalities sit inside the KKT system; inequalities and bounds go through
slacks with Mehrotra predictor-corrector steps.  The cone row is treated as a
smooth concave inequality: the sqrt argument carries an eps = 1e-12 cushion so
its gradient exists at the origin, where long-only cold starts may begin.
Infeasibility is established by an elastic phase that minimizes the worst
constraint violation; the report includes the best value the violated
constraint can reach, so callers can surface an actionable target.

solve() is a pure function of (problem, options): no RNG, no global state,
byte-stable outputs for identical inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

SOC_EPS = 1e-12

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max_iterations"
NUMERIC_FAILURE = "numeric_failure"


@dataclass
class LinearConstraint:
    """Row a' x (= or >=) rhs."""

    coeffs: np.ndarray
    rhs: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        self.rhs = float(self.rhs)


@dataclass
class Bounds:
    """Per-variable box; use -inf/+inf for unrestricted sides."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise ValueError("lower and upper must have equal length")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")


@dataclass
class SocConstraint:
    """r' x - kappa * sqrt(x' sigma x) >= 0."""

    kappa: float
    sigma: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.kappa = float(self.kappa)
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        self.sigma = np.asarray(self.sigma, dtype=float)
        self.r = np.asarray(self.r, dtype=float)


@dataclass
class QpProblem:
    q: np.ndarray
    eq: list[LinearConstraint] = field(default_factory=list)
    ineq: list[LinearConstraint] = field(default_factory=list)
    bounds: Bounds | None = None
    soc: SocConstraint | None = None

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        if self.q.ndim != 2 or self.q.shape[0] != self.q.shape[1]:
            raise ValueError("q must be square")
        n = self.q.shape[0]
        if n < 1:
            raise ValueError("problem needs at least one variable")
        self.q = 0.5 * (self.q + self.q.T)
        for con in list(self.eq) + list(self.ineq):
            if con.coeffs.shape != (n,):
                raise ValueError("constraint dimension mismatch")
        if self.bounds is not None and self.bounds.lower.shape != (n,):
            raise ValueError("bounds dimension mismatch")
        if self.soc is not None:
            if self.soc.r.shape != (n,) or self.soc.sigma.shape != (n, n):
                raise ValueError("soc dimension mismatch")

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass
class SolveOptions:
    tol: float = 1e-8
    max_iter: int = 200
    barrier_mu0: float = 1.0


@dataclass
class Multipliers:
    """Dual variables: eq (per equality), ineq (per general row), lower/upper
    (per variable, zero where a side is infinite), soc (scalar)."""

    eq: np.ndarray
    ineq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    soc: float = 0.0


@dataclass
class KktResiduals:
    stationarity: float
    feasibility: float
    complementarity: float

    def max(self) -> float:
        return max(self.stationarity, self.feasibility, self.complementarity)


@dataclass
class InfeasibilityInfo:
    """Which constraint cannot be met, by how much, and its best achievable value."""

    kind: str                 # "ineq" | "bound" | "soc" | "eq"
    index: int | None
    violation: float
    max_achievable: float | None
    description: str


@dataclass
class Solution:
    x: np.ndarray
    objective: float
    status: str
    kkt: KktResiduals
    iterations: int
    duals: Multipliers
    infeasibility: InfeasibilityInfo | None = None


# --- canonical form ----------------------------------------------------------

@dataclass
class _Canon:
    """Internal stacked form: all linear inequality rows (general, then lower
    bounds, then upper bounds) in one matrix, plus the optional cone row last."""

    n: int
    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    Jlin: np.ndarray
    hlin: np.ndarray
    row_kinds: list[tuple[str, int]]
    soc: SocConstraint | None = None
    obj_sqrt_coef: float = 0.0
    obj_sqrt_sigma: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.Jlin.shape[0] + (1 if self.soc is not None else 0)

    @property
    def nonlinear(self) -> bool:
        return self.soc is not None or self.obj_sqrt_coef > 0.0

    def _soc_parts(self, x):
        sig_x = self.soc.sigma @ x
        rho = math.sqrt(float(x @ sig_x) + SOC_EPS)
        return sig_x, rho

    def g_all(self, x: np.ndarray) -> np.ndarray:
        g = self.Jlin @ x - self.hlin
        if self.soc is None:
            return g
        _, rho = self._soc_parts(x)
        g_soc = float(self.soc.r @ x) - self.soc.kappa * rho
        return np.append(g, g_soc)

    def J_all(self, x: np.ndarray) -> np.ndarray:
        if self.soc is None:
            return self.Jlin
        sig_x, rho = self._soc_parts(x)
        grad = self.soc.r - self.soc.kappa * sig_x / rho
        return np.vstack([self.Jlin, grad])

    def lagr_hess(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Hessian of the Lagrangian in x: objective curvature plus the
        (positive semidefinite) contribution -z_soc * hess(g_soc)."""
        H = self.Q.copy()
        if self.obj_sqrt_coef > 0.0:
            H += self.obj_sqrt_coef * self._sqrt_hess(self.obj_sqrt_sigma, x)
        if self.soc is not None:
            H += z[-1] * self.soc.kappa * self._sqrt_hess(self.soc.sigma, x)
        return H

    @staticmethod
    def _sqrt_hess(sigma: np.ndarray, x: np.ndarray) -> np.ndarray:
        sig_x = sigma @ x
        rho = math.sqrt(float(x @ sig_x) + SOC_EPS)
        return sigma / rho - np.outer(sig_x, sig_x) / rho**3

    def objective_grad(self, x: np.ndarray) -> np.ndarray:
        grad = self.Q @ x + self.c
        if self.obj_sqrt_coef > 0.0:
            sig_x = self.obj_sqrt_sigma @ x
            rho = math.sqrt(float(x @ sig_x) + SOC_EPS)
            grad = grad + self.obj_sqrt_coef * sig_x / rho
        return grad


def _canonicalize(p: QpProblem) -> _Canon:
    n = p.n
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    kinds: list[tuple[str, int]] = []
    for k, con in enumerate(p.ineq):
        rows.append(con.coeffs)
        rhs.append(con.rhs)
        kinds.append(("ineq", k))
    if p.bounds is not None:
        eye = np.eye(n)
        for j in range(n):
            if math.isfinite(p.bounds.lower[j]):
                rows.append(eye[j])
                rhs.append(p.bounds.lower[j])
                kinds.append(("bound_lower", j))
            if math.isfinite(p.bounds.upper[j]):
                rows.append(-eye[j])
                rhs.append(-p.bounds.upper[j])
                kinds.append(("bound_upper", j))
    Jlin = np.array(rows, dtype=float) if rows else np.zeros((0, n))
    hlin = np.array(rhs, dtype=float)
    A = (np.array([con.coeffs for con in p.eq], dtype=float)
         if p.eq else np.zeros((0, n)))
    b = np.array([con.rhs for con in p.eq], dtype=float)
    if p.soc is not None:
        kinds.append(("soc", 0))
    return _Canon(n=n, Q=p.q, c=np.zeros(n), A=A, b=b,
                  Jlin=Jlin, hlin=hlin, row_kinds=kinds, soc=p.soc)


def _z_stack(canon: _Canon, duals: Multipliers) -> np.ndarray:
    z = np.zeros(canon.m)
    for i, (kind, idx) in enumerate(canon.row_kinds):
        if kind == "ineq":
            z[i] = duals.ineq[idx]
        elif kind == "bound_lower":
            z[i] = duals.lower[idx]
        elif kind == "bound_upper":
            z[i] = duals.upper[idx]
        else:
            z[i] = duals.soc
    return z


def _multipliers_from(canon: _Canon, n: int, y: np.ndarray, z: np.ndarray) -> Multipliers:
    mult = Multipliers(eq=y.copy(), ineq=np.zeros(len([k for k in canon.row_kinds if k[0] == "ineq"])),
                       lower=np.zeros(n), upper=np.zeros(n), soc=0.0)
    for i, (kind, idx) in enumerate(canon.row_kinds):
        if kind == "ineq":
            mult.ineq[idx] = z[i]
        elif kind == "bound_lower":
            mult.lower[idx] = z[i]
        elif kind == "bound_upper":
            mult.upper[idx] = z[i]
        else:
            mult.soc = float(z[i])
    return mult


def check_kkt(p: QpProblem, x: np.ndarray, duals: Multipliers) -> KktResiduals:
    """First-order optimality residuals at (x, duals); pure, no iteration.

    stationarity  = inf-norm of  q x - A' y - J(x)' z
    feasibility   = worst violation over equalities, inequalities, bounds, soc
    complementarity = max_i |z_i * g_i(x)|
    """
    canon = _canonicalize(p)
    x = np.asarray(x, dtype=float)
    z = _z_stack(canon, duals)
    g = canon.g_all(x)
    J = canon.J_all(x)
    r_d = canon.Q @ x - J.T @ z
    if canon.A.shape[0]:
        r_d = r_d - canon.A.T @ np.asarray(duals.eq, dtype=float)
        eq_viol = float(np.abs(canon.A @ x - canon.b).max())
    else:
        eq_viol = 0.0
    ineq_viol = float(np.maximum(-g, 0.0).max()) if canon.m else 0.0
    comp = float(np.abs(z * g).max()) if canon.m else 0.0
    return KktResiduals(
        stationarity=float(np.abs(r_d).max()),
        feasibility=max(eq_viol, ineq_viol),
        complementarity=comp,
    )


# --- interior-point core ------------------------------------------------------

@dataclass
class _CoreResult:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    iterations: int
    converged: bool
    nonfinite: bool = False
    diverged: bool = False


def _max_step(v: np.ndarray, dv: np.ndarray, tau: float) -> float:
    neg = dv < 0
    if not neg.any():
        return 1.0
    return float(min(1.0, tau * np.min(-v[neg] / dv[neg])))


def _kkt_triple(canon: _Canon, x, y, z, g, J) -> tuple[float, float, float]:
    r_d = canon.objective_grad(x) - J.T @ z
    if canon.A.shape[0]:
        r_d = r_d - canon.A.T @ y
        eq_viol = float(np.abs(canon.A @ x - canon.b).max())
    else:
        eq_viol = 0.0
    stat = float(np.abs(r_d).max())
    feas = max(eq_viol, float(np.maximum(-g, 0.0).max()) if g.size else 0.0)
    comp = float(np.abs(z * g).max()) if g.size else 0.0
    return stat, feas, comp


def _solve_kkt_system(Hbar, A, delta_e):
    n = Hbar.shape[0]
    p = A.shape[0]
    K = np.zeros((n + p, n + p))
    K[:n, :n] = Hbar
    if p:
        K[:n, n:] = A.T
        K[n:, :n] = A
        K[n:, n:] = -delta_e * np.eye(p)
    return scipy.linalg.lu_factor(K)


def _ipm_core(canon: _Canon, x0: np.ndarray, tol: float, max_iter: int,
              mu0: float) -> _CoreResult:
    n = canon.n
    p = canon.A.shape[0]
    m = canon.m

    x = np.asarray(x0, dtype=float).copy()
    y = np.zeros(p)

    if m == 0:
        return _solve_equality_only(canon, tol)

    g = canon.g_all(x)
    s = np.maximum(g, 1.0)
    z = np.full(m, mu0) / s

    scale = max(1.0, float(np.abs(canon.Q).max()) if canon.Q.size else 1.0)
    delta = 1e-12 * scale
    x_cap = 1e10 * (1.0 + float(np.abs(x).max()))
    stall = 0

    for it in range(1, max_iter + 1):
        g = canon.g_all(x)
        J = canon.J_all(x)
        stat, feas, comp = _kkt_triple(canon, x, y, z, g, J)
        if stat <= tol and feas <= tol and comp <= tol:
            return _CoreResult(x, y, z, it - 1, converged=True)

        r_d = canon.objective_grad(x) - J.T @ z
        if p:
            r_d = r_d - canon.A.T @ y
            r_p = canon.A @ x - canon.b
        else:
            r_p = np.zeros(0)
        r_g = g - s
        mu = max(float(s @ z) / m, 1e-300)

        H = canon.lagr_hess(x, z)
        w = z / s
        Hbar = H + J.T @ (w[:, None] * J)
        Hbar[np.diag_indices(n)] += delta

        lu = None
        bump = delta
        for _ in range(4):
            try:
                lu = _solve_kkt_system(Hbar, canon.A, max(bump, 1e-12))
                break
            except (scipy.linalg.LinAlgError, ValueError):
                bump *= 1e3
                Hbar[np.diag_indices(n)] += bump
        if lu is None:
            return _CoreResult(x, y, z, it, converged=False, nonfinite=True)

        def newton(r_c):
            rhs1 = -r_d - J.T @ (r_c / s + w * r_g)
            rhs = np.concatenate([rhs1, -r_p])
            sol = scipy.linalg.lu_solve(lu, rhs)
            dx = sol[:n]
            dy = -sol[n:]
            ds = J @ dx + r_g
            dz = -(r_c + z * ds) / s
            return dx, dy, ds, dz

        # predictor (affine scaling direction)
        dxa, dya, dsa, dza = newton(s * z)
        ap_a = _max_step(s, dsa, 1.0)
        ad_a = _max_step(z, dza, 1.0)
        mu_aff = float((s + ap_a * dsa) @ (z + ad_a * dza)) / m
        sigma = min(max((mu_aff / mu) ** 3, 0.0), 0.99)

        # corrector
        dx, dy, ds, dz = newton(s * z + dsa * dza - sigma * mu)
        tau = min(0.9999, max(0.995, 1.0 - mu))
        ap = _max_step(s, ds, tau)
        ad = _max_step(z, dz, tau)

        if canon.nonlinear:
            # crude backtrack: the cone row makes residuals nonlinear in the
            # step, so guard against large overshoots
            merit0 = max(stat, float(np.abs(r_p).max()) if p else 0.0,
                         float(np.abs(r_g).max()))
            for _ in range(20):
                xn = x + ap * dx
                gn = canon.g_all(xn)
                Jn = canon.J_all(xn)
                sn = s + ap * ds
                yn = y + ad * dy
                zn = z + ad * dz
                r_dn = canon.objective_grad(xn) - Jn.T @ zn
                if p:
                    r_dn = r_dn - canon.A.T @ yn
                merit = max(float(np.abs(r_dn).max()),
                            float(np.abs(canon.A @ xn - canon.b).max()) if p else 0.0,
                            float(np.abs(gn - sn).max()))
                if np.isfinite(merit) and merit <= 10.0 * max(merit0, tol):
                    break
                ap *= 0.5
                ad *= 0.5

        x = x + ap * dx
        s = s + ap * ds
        y = y + ad * dy
        z = z + ad * dz

        if not (np.isfinite(x).all() and np.isfinite(s).all()
                and np.isfinite(y).all() and np.isfinite(z).all()):
            return _CoreResult(x, y, z, it, converged=False, nonfinite=True)
        if float(np.abs(x).max()) > x_cap:
            return _CoreResult(x, y, z, it, converged=False, diverged=True)
        if max(ap, ad) < 1e-10:
            stall += 1
            if stall >= 5:
                return _CoreResult(x, y, z, it, converged=False)
        else:
            stall = 0

    g = canon.g_all(x)
    J = canon.J_all(x)
    stat, feas, comp = _kkt_triple(canon, x, y, z, g, J)
    ok = stat <= tol and feas <= tol and comp <= tol
    return _CoreResult(x, y, z, max_iter, converged=ok)


def _solve_equality_only(canon: _Canon, tol: float) -> _CoreResult:
    n = canon.n
    p = canon.A.shape[0]
    scale = max(1.0, float(np.abs(canon.Q).max()) if canon.Q.size else 1.0)
    delta = 1e-12 * scale
    K = np.zeros((n + p, n + p))
    K[:n, :n] = canon.Q + delta * np.eye(n)
    if p:
        K[:n, n:] = canon.A.T
        K[n:, :n] = canon.A
        K[n:, n:] = -delta * np.eye(p)
    rhs = np.concatenate([-canon.c, canon.b])
    lu = scipy.linalg.lu_factor(K)
    v = scipy.linalg.lu_solve(lu, rhs)
    for _ in range(3):
        v = v + scipy.linalg.lu_solve(lu, rhs - K @ v)
    x = v[:n]
    y = -v[n:]
    r_d = canon.Q @ x + canon.c - (canon.A.T @ y if p else 0.0)
    feas = float(np.abs(canon.A @ x - canon.b).max()) if p else 0.0
    converged = float(np.abs(r_d).max()) <= tol and feas <= tol
    return _CoreResult(x, y, np.zeros(0), 1, converged=converged)


# --- starting point and orchestration ----------------------------------------

def _cold_start(canon: _Canon) -> np.ndarray:
    """Deterministic start: minimum-norm solution of the equalities (which is
    exactly the uniform budget split b/n on a budget simplex), else zero;
    nudged off the origin when a cone row is present."""
    n = canon.n
    if canon.A.shape[0]:
        x0, *_ = np.linalg.lstsq(canon.A, canon.b, rcond=None)
    else:
        x0 = np.zeros(n)
    if canon.soc is not None:
        sig_scale = float(np.trace(canon.soc.sigma)) / max(n, 1)
        if float(x0 @ canon.soc.sigma @ x0) < 1e-8 * max(sig_scale, 1.0):
            r_norm = float(np.linalg.norm(canon.soc.r))
            if r_norm > 0:
                x0 = x0 + canon.soc.r / r_norm
    return x0


def _drop_row(canon: _Canon, drop: int) -> tuple[np.ndarray, np.ndarray, list]:
    keep = [i for i in range(canon.Jlin.shape[0]) if i != drop]
    return canon.Jlin[keep], canon.hlin[keep], [canon.row_kinds[i] for i in keep]


def _max_achievable(canon: _Canon, row_index: int, tol: float) -> float | None:
    """Best attainable value of constraint row `row_index` subject to every
    other constraint.  None means the subproblem did not resolve; +inf means
    the row value is unbounded above."""
    n = canon.n
    kind, _ = canon.row_kinds[row_index]
    if kind == "soc":
        # maximize r'x - kappa*sqrt(x'Sx): convex minimization of its negation
        sub = _Canon(n=n, Q=np.zeros((n, n)), c=-canon.soc.r,
                     A=canon.A, b=canon.b, Jlin=canon.Jlin, hlin=canon.hlin,
                     row_kinds=list(canon.row_kinds[:-1]), soc=None,
                     obj_sqrt_coef=canon.soc.kappa,
                     obj_sqrt_sigma=canon.soc.sigma)
        target = lambda x: float(canon.soc.r @ x) - canon.soc.kappa * math.sqrt(
            max(float(x @ canon.soc.sigma @ x), 0.0))
    else:
        a = canon.Jlin[row_index]
        Js, hs, kinds = _drop_row(canon, row_index)
        sub = _Canon(n=n, Q=np.zeros((n, n)), c=-a, A=canon.A, b=canon.b,
                     Jlin=Js, hlin=hs, row_kinds=kinds, soc=canon.soc)
        target = lambda x, a=a: float(a @ x)
    res = _ipm_core(sub, _cold_start(sub), tol=min(tol, 1e-9), max_iter=300, mu0=1.0)
    if res.diverged:
        return math.inf
    if not res.converged:
        return None
    return target(res.x)


def _elastic_diagnosis(canon: _Canon, tol: float):
    """Minimize the worst constraint violation t over (x, t).

    Returns (feasible: bool | None, violation, x_star).  None means the
    elastic solve itself failed and no claim is made.
    """
    n = canon.n
    mlin = canon.Jlin.shape[0]
    Jlin = np.zeros((mlin + 1, n + 1))
    Jlin[:mlin, :n] = canon.Jlin
    Jlin[:mlin, n] = 1.0
    Jlin[mlin, n] = 1.0                    # t >= -1 keeps the phase bounded
    hlin = np.append(canon.hlin, -1.0)
    kinds = list(canon.row_kinds if canon.soc is None else canon.row_kinds[:-1])
    kinds = kinds + [("elastic_bound", 0)]
    soc = None
    if canon.soc is not None:
        sigma = np.zeros((n + 1, n + 1))
        sigma[:n, :n] = canon.soc.sigma
        soc = SocConstraint(kappa=canon.soc.kappa, sigma=sigma,
                            r=np.append(canon.soc.r, 1.0))
        kinds.append(("soc", 0))
    A = np.hstack([canon.A, np.zeros((canon.A.shape[0], 1))]) if canon.A.shape[0] \
        else np.zeros((0, n + 1))
    c = np.zeros(n + 1)
    c[n] = 1.0
    elastic = _Canon(n=n + 1, Q=np.zeros((n + 1, n + 1)), c=c, A=A, b=canon.b,
                     Jlin=Jlin, hlin=hlin, row_kinds=kinds, soc=soc)

    x0 = _cold_start(canon)
    g0 = canon.g_all(x0)
    t0 = max(0.0, -(float(g0.min()) if g0.size else 0.0)) + 1.0
    res = _ipm_core(elastic, np.append(x0, t0), tol=min(tol, 1e-9),
                    max_iter=300, mu0=1.0)
    if not res.converged:
        return None, math.nan, None
    return float(res.x[n]) <= 1e-6, float(res.x[n]), res.x[:n]


_KIND_LABEL = {
    "ineq": "inequality constraint",
    "bound_lower": "lower bound",
    "bound_upper": "upper bound",
    "soc": "risk-limit constraint",
}


def _diagnose_infeasibility(p: QpProblem, canon: _Canon,
                            tol: float) -> InfeasibilityInfo | None:
    feasible, violation, x_star = _elastic_diagnosis(canon, tol)
    if feasible is None or feasible:
        return None

    g = canon.g_all(x_star)
    # prefer to pin the blame on a general or cone row before a plain bound
    general = [i for i, (k, _) in enumerate(canon.row_kinds)
               if k in ("ineq", "soc")]
    candidates = general if general and min(g[general]) < -1e-6 else range(len(g))
    worst = min(candidates, key=lambda i: g[i])
    kind, idx = canon.row_kinds[worst]

    achievable = _max_achievable(canon, worst, tol)
    if achievable is None or math.isinf(achievable):
        # fall back to the elastic point's value for the row
        if kind == "soc":
            achievable = float(canon.soc.r @ x_star) - canon.soc.kappa * math.sqrt(
                max(float(x_star @ canon.soc.sigma @ x_star), 0.0))
        else:
            achievable = float(canon.Jlin[worst] @ x_star)

    if kind == "soc":
        required = 0.0
    elif kind == "bound_upper":
        required = -canon.hlin[worst]
    else:
        required = canon.hlin[worst]
    if kind == "bound_upper":
        achievable_reported = -achievable   # row is -x_j >= -ub
    else:
        achievable_reported = achievable

    label = _KIND_LABEL[kind]
    return InfeasibilityInfo(
        kind={"bound_lower": "bound", "bound_upper": "bound"}.get(kind, kind),
        index=idx if kind != "soc" else None,
        violation=violation,
        max_achievable=achievable_reported,
        description=(
            f"{label} {idx if kind != 'soc' else ''}".strip()
            + f" unsatisfiable: best achievable value {achievable_reported:.12g}, "
              f"required {required:.12g} (violation {violation:.12g})"
        ),
    )


def solve(p: QpProblem, opts: SolveOptions | None = None,
          x0: np.ndarray | None = None) -> Solution:
    """Solve the program; status is one of optimal / infeasible /
    max_iterations / numeric_failure.

    The caller is expected to hand in a PSD q (run the covariance repair
    first); a q that is indefinite beyond 1e-7 of its scale is rejected.
    """
    if opts is None:
        opts = SolveOptions()
    canon = _canonicalize(p)
    n = canon.n

    scale = max(1.0, float(np.abs(p.q).max()))
    if float(np.linalg.eigvalsh(p.q)[0]) < -1e-7 * scale:
        raise ValueError("objective matrix q is not positive semidefinite")

    if x0 is None:
        x0 = _cold_start(canon)
    res = _ipm_core(canon, np.asarray(x0, dtype=float), opts.tol,
                    opts.max_iter, opts.barrier_mu0)

    duals = _multipliers_from(canon, n, res.y,
                              res.z if res.z.size else np.zeros(canon.m))
    kkt = check_kkt(p, res.x, duals)
    objective = 0.5 * float(res.x @ p.q @ res.x)

    if res.converged:
        return Solution(x=res.x, objective=objective, status=OPTIMAL, kkt=kkt,
                        iterations=res.iterations, duals=duals)

    info = _diagnose_infeasibility(p, canon, opts.tol)
    if info is not None:
        return Solution(x=res.x, objective=objective, status=INFEASIBLE,
                        kkt=kkt, iterations=res.iterations, duals=duals,
                        infeasibility=info)
    status = NUMERIC_FAILURE if res.nonfinite else MAX_ITERATIONS
    return Solution(x=res.x, objective=objective, status=status, kkt=kkt,
                    iterations=res.iterations, duals=duals)


# --- JSON interchange ---------------------------------------------------------

def _num_or_none(v: float):
    return None if math.isinf(v) else v


def problem_to_json(p: QpProblem, opts: SolveOptions | None = None) -> str:
    doc = {
        "q": p.q.tolist(),
        "eq": [{"coeffs": c.coeffs.tolist(), "rhs": c.rhs} for c in p.eq],
        "ineq": [{"coeffs": c.coeffs.tolist(), "rhs": c.rhs} for c in p.ineq],
        "bounds": None if p.bounds is None else {
            "lower": [_num_or_none(v) for v in p.bounds.lower],
            "upper": [_num_or_none(v) for v in p.bounds.upper],
        },
        "soc": None if p.soc is None else {
            "kappa": p.soc.kappa,
            "sigma": p.soc.sigma.tolist(),
            "r": p.soc.r.tolist(),
        },
        "options": None if opts is None else {
            "tol": opts.tol,
            "max_iter": opts.max_iter,
            "barrier_mu0": opts.barrier_mu0,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def problem_from_json(text: str) -> tuple[QpProblem, SolveOptions | None]:
    doc = json.loads(text)
    bounds = None
    if doc.get("bounds") is not None:
        lower = [(-math.inf if v is None else v) for v in doc["bounds"]["lower"]]
        upper = [(math.inf if v is None else v) for v in doc["bounds"]["upper"]]
        bounds = Bounds(lower=np.array(lower), upper=np.array(upper))
    soc = None
    if doc.get("soc") is not None:
        soc = SocConstraint(kappa=doc["soc"]["kappa"],
                            sigma=np.array(doc["soc"]["sigma"]),
                            r=np.array(doc["soc"]["r"]))
    problem = QpProblem(
        q=np.array(doc["q"]),
        eq=[LinearConstraint(np.array(e["coeffs"]), e["rhs"]) for e in doc["eq"]],
        ineq=[LinearConstraint(np.array(e["coeffs"]), e["rhs"]) for e in doc["ineq"]],
        bounds=bounds,
        soc=soc,
    )
    opts = None
    if doc.get("options") is not None:
        o = doc["options"]
        opts = SolveOptions(tol=o.get("tol", 1e-8),
                            max_iter=o.get("max_iter", 200),
                            barrier_mu0=o.get("barrier_mu0", 1.0))
    return problem, opts
