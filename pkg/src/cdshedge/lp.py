"""Simplex solver for the hedge bound problems plus a uniqueness probe.

Both bound problems optimize over a sign-free portfolio ``v`` against
inequality constraints in the discretized states:

    ask side (+):  min c.v  s.t.  B v >= b
    bid side (-):  max c.v  s.t.  B v <= b

Their duals share one feasible region and are natively in standard form:
optimize ``b.x`` subject to ``B^T x = c`` with ``x >= 0``.  With only
``K + 1`` equality rows the bases stay tiny, so the solver runs a revised
two-phase simplex on the ``x`` problem and recovers ``v`` as the simplex
multipliers of the optimal basis.  Bland's rule (lowest eligible index in,
lowest basic index out on ratio ties) makes the pivot sequence finite and
deterministic.

The deposit column makes every bound problem feasible (a large enough
deposit dominates anything), so an infeasible dual is reported as an
unbounded bound problem and vice versa.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lattice import ConstraintSystem

FEAS_TOL = 1e-9
GAP_TOL = 1e-8
_PIVOT_TOL = 1e-10
_MAX_ITER = 20000


class LpStatusError(RuntimeError):
    """A bound problem came back infeasible or unbounded."""

    def __init__(self, status: str, side: int):
        label = "ask" if side == +1 else "bid"
        super().__init__(f"{label}-side bound problem is {status}")
        self.status = status
        self.side = side


@dataclass(frozen=True)
class LpSolution:
    """Solver output for one bound problem.

    ``variables`` is the portfolio (market notionals plus deposit),
    ``dual`` the non-negative state weights with B^T x = c, ``basis`` the
    state indices whose constraints are active at the returned vertex.
    """

    status: str
    variables: np.ndarray | None
    dual: np.ndarray | None
    objective: float | None
    basis: tuple[int, ...] | None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _bland_entering(reduced: np.ndarray, allowed: np.ndarray) -> int:
    eligible = np.flatnonzero(allowed & (reduced < -_PIVOT_TOL))
    return int(eligible[0]) if eligible.size else -1


def _revised_simplex(A, rhs, cost, basis, allowed):
    """Minimize cost.x over {A x = rhs, x >= 0} from a feasible basis.

    Returns (status, x_full, basis, multipliers).  ``allowed`` masks the
    columns permitted to enter (artificials stay barred in phase 2).
    """
    m, n = A.shape
    basis = list(basis)
    for _ in range(_MAX_ITER):
        Bmat = A[:, basis]
        xB = np.linalg.solve(Bmat, rhs)
        y = np.linalg.solve(Bmat.T, cost[basis])
        reduced = cost - y @ A
        reduced[basis] = 0.0
        j = _bland_entering(reduced, allowed)
        if j < 0:
            x = np.zeros(n)
            x[basis] = xB
            return "optimal", x, basis, y
        direction = np.linalg.solve(Bmat, A[:, j])
        positive = direction > _PIVOT_TOL
        if not positive.any():
            return "unbounded", None, basis, None
        ratios = np.full(m, np.inf)
        ratios[positive] = xB[positive] / direction[positive]
        best = ratios.min()
        # ratio ties broken by smallest basic column index (Bland)
        tied = [r for r in range(m) if ratios[r] <= best + 1e-15]
        leave = min(tied, key=lambda r: basis[r])
        basis[leave] = j
    raise RuntimeError("simplex iteration limit exceeded")


def _solve_standard(A: np.ndarray, rhs: np.ndarray, cost: np.ndarray):
    """Two-phase minimization of cost.x over {A x = rhs, x >= 0}.

    Returns (status, x, basis, y) where y are the optimal-basis
    multipliers of the original rows.  Redundant equality rows keep a
    pinned artificial in the basis and contribute zero multipliers.
    """
    m, n = A.shape
    flip = np.where(rhs < 0.0, -1.0, 1.0)
    A1 = A * flip[:, None]
    rhs1 = rhs * flip
    A_ext = np.hstack([A1, np.eye(m)])

    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    allowed1 = np.ones(n + m, dtype=bool)
    status, x, basis, _ = _revised_simplex(A_ext, rhs1, cost1, range(n, n + m), allowed1)
    if status != "optimal" or float(cost1 @ x) > FEAS_TOL:
        return "infeasible", None, None, None

    # Drive artificials out of the basis where an original column can
    # replace them; rows that cannot be cleared are redundant equalities.
    for r in range(m):
        if basis[r] < n:
            continue
        Bmat = A_ext[:, basis]
        w = np.linalg.solve(Bmat.T, np.eye(m)[:, r])
        row = w @ A_ext[:, :n]
        candidates = np.flatnonzero(np.abs(row) > 1e-9)
        if candidates.size:
            basis[r] = int(candidates[0])

    allowed2 = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    cost2 = np.concatenate([cost, np.zeros(m)])
    status, x, basis, y = _revised_simplex(A_ext, rhs1, cost2, basis, allowed2)
    if status != "optimal":
        return status, None, None, None
    return "optimal", x[:n], basis, y * flip


def _solve_bound(system: ConstraintSystem) -> LpSolution:
    A = system.B.T
    if system.side == +1:
        # dual: max b.x -> minimize (-b).x; multipliers y satisfy B y <= -b,
        # so the ask portfolio is v = -y.
        status, x, basis, y = _solve_standard(A, system.c, -system.b)
        v = None if y is None else -y
    else:
        # dual: min b.x; multipliers y satisfy B y <= b and are the bid
        # portfolio directly.
        status, x, basis, y = _solve_standard(A, system.c, system.b)
        v = y
    if status == "infeasible":
        return LpSolution("unbounded", None, None, None, None)
    if status == "unbounded":
        return LpSolution("infeasible", None, None, None, None)
    active = tuple(sorted(k for k in basis if k < system.n_states))
    objective = float(system.c @ v)
    return LpSolution("optimal", v, x, objective, active)


def solve_lub(system: ConstraintSystem) -> LpSolution:
    """Least upper bound: min c.v subject to B v >= b (ask side)."""
    if system.side != +1:
        raise ValueError("system was built for the bid side")
    return _solve_bound(system)


def solve_glb(system: ConstraintSystem) -> LpSolution:
    """Greatest lower bound: max c.v subject to B v <= b (bid side)."""
    if system.side != -1:
        raise ValueError("system was built for the ask side")
    return _solve_bound(system)


def solve(system: ConstraintSystem) -> LpSolution:
    return solve_lub(system) if system.side == +1 else solve_glb(system)


def solution_residuals(system: ConstraintSystem, sol: LpSolution) -> dict[str, float]:
    """Feasibility, duality-gap, and complementary-slackness residuals."""
    if not sol.optimal:
        raise ValueError("residuals are defined for optimal solutions only")
    slack = system.B @ sol.variables - system.b
    if system.side == +1:
        primal = float(max(0.0, -slack.min()))
    else:
        primal = float(max(0.0, slack.max()))
    dual_eq = float(np.abs(system.B.T @ sol.dual - system.c).max())
    dual_sign = float(max(0.0, -sol.dual.min()))
    gap = float(abs(system.c @ sol.variables - system.b @ sol.dual))
    comp = float(np.abs(sol.dual * slack).max())
    return {
        "primal_feasibility": primal,
        "dual_feasibility": dual_eq,
        "dual_sign": dual_sign,
        "duality_gap": gap,
        "complementary_slackness": comp,
    }


def check_solution(system: ConstraintSystem, sol: LpSolution,
                   feas_tol: float = FEAS_TOL, gap_tol: float = GAP_TOL) -> None:
    res = solution_residuals(system, sol)
    if res["primal_feasibility"] > feas_tol or res["dual_feasibility"] > feas_tol:
        raise ArithmeticError(f"LP feasibility residual exceeds {feas_tol}: {res}")
    if res["dual_sign"] > feas_tol:
        raise ArithmeticError(f"dual sign violation exceeds {feas_tol}: {res}")
    if res["duality_gap"] > gap_tol:
        raise ArithmeticError(f"duality gap exceeds {gap_tol}: {res}")


@dataclass(frozen=True)
class UniquenessProbe:
    """Outcome of re-solving under random cost perturbations.

    A solution is certified unique when every perturbed re-solve returns
    the same portfolio: by Mangasarian's criterion a solution is unique
    iff it survives every sufficiently small cost-row perturbation.  A
    perturbed instance with no optimal solution also means the original
    did not survive, so it counts against uniqueness; ``n_failed`` keeps
    those trials visible separately.
    """

    classification: str
    max_deviation: float
    trials: int
    n_failed: int
    scale: float
    tolerance: float

    @property
    def unique(self) -> bool:
        return self.classification == "unique"


def uniqueness_probe(
    system: ConstraintSystem,
    solution: LpSolution,
    trials: int = 100,
    scale: float = 1e-7,
    seed: int = 0,
    tolerance: float = 1e-6,
) -> UniquenessProbe:
    """Classify an optimal portfolio as unique or non-unique.

    Each trial draws independent uniform noise in [-scale, scale] for
    every market upfront (the deposit cost stays exactly 1) and re-solves.
    Trials use independently spawned generator streams so the outcome does
    not depend on evaluation order.
    """
    if not solution.optimal:
        raise ValueError("uniqueness probe requires an optimal solution")
    if trials < 1:
        raise ValueError("trials must be positive")
    n_quotes = system.n_quotes
    streams = np.random.SeedSequence(seed).spawn(trials)
    max_dev = 0.0
    n_failed = 0
    for stream in streams:
        rng = np.random.default_rng(stream)
        noise = rng.uniform(-scale, scale, n_quotes)
        c2 = system.c.copy()
        c2[:n_quotes] += noise
        perturbed = replace(system, c=c2)
        re_solved = solve(perturbed)
        if not re_solved.optimal:
            n_failed += 1
            continue
        dev = float(np.abs(re_solved.variables - solution.variables).max())
        max_dev = max(max_dev, dev)
    unique = n_failed == 0 and max_dev <= tolerance
    return UniquenessProbe(
        classification="unique" if unique else "non_unique",
        max_deviation=max_dev,
        trials=trials,
        n_failed=n_failed,
        scale=scale,
        tolerance=tolerance,
    )
