"""Numerical reference for the phase-domain design problem.

Builds the per-chain quadratic explicitly from the subcarrier grid and solves
each box-constrained subproblem by enumerating its KKT cases with dense linear
solves. Nothing here uses the closed-form solution, so the two can be checked
against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .closed_form import ScenarioParams, appendix_constants, theorem1_design
from .precoder import HybridDesign, subarray_offsets

KKT_TOL = 1e-8


class SingularInstanceError(ValueError):
    """The aggregated quadratic is not positive definite (B = 0 or K = 1)."""


@dataclass(frozen=True)
class QpInstance:
    """Per-chain quadratic ``a^T C a - 2 d_m^T a`` with ``0 <= a[-1] <= theta_max``.

    ``Ck`` has shape (K, N, N+1), ``Bk`` (K, N, M); ``C`` and ``D`` are the
    subcarrier averages of ``Ck^T Ck`` and ``Ck^T Bk``.
    """

    zeta: np.ndarray
    gamma: np.ndarray  # (N, M)
    Ck: np.ndarray
    Bk: np.ndarray
    C: np.ndarray
    D: np.ndarray
    theta_max: float
    degenerate: bool

    @property
    def n_ps(self) -> int:
        return self.gamma.shape[0]

    @property
    def m_ttd(self) -> int:
        return self.gamma.shape[1]

    def d(self, m: int) -> np.ndarray:
        """Linear term of subarray m (1-based)."""
        return self.D[:, m - 1]

    def quadratic(self, a: np.ndarray, m: int) -> float:
        return float(a @ self.C @ a - 2.0 * self.d(m) @ a)

    def residual(self, a: np.ndarray, m: int) -> float:
        """``(1/K) sum_k ||Ck a - b_{k,m}||^2``: the quadratic plus a constant, evaluated stably."""
        r = self.Ck @ a - self.Bk[:, :, m - 1]
        return float(np.sum(r * r) / len(self.zeta))

    def constant(self, m: int) -> float:
        b = self.Bk[:, :, m - 1]
        return float(np.sum(b * b) / len(self.zeta))


def build_instance(sc: ScenarioParams, l: int) -> QpInstance:
    N = sc.geom.n_ps
    zeta = sc.grid.zeta()
    K = len(zeta)
    gam = subarray_offsets(sc.geom).T * sc.psi_c[l - 1]
    Ck = np.concatenate([np.broadcast_to(np.eye(N), (K, N, N)), -zeta[:, None, None] * np.ones((K, N, 1))], axis=2)
    Bk = -zeta[:, None, None] * gam[None]
    C = np.einsum("kij,kil->jl", Ck, Ck) / K
    D = np.einsum("kij,kim->jm", Ck, Bk) / K
    degenerate = sc.grid.bandwidth == 0 or K < 2
    return QpInstance(zeta, gam, Ck, Bk, C, D, sc.theta_max, degenerate)


@dataclass
class SubproblemSolution:
    a: np.ndarray
    value: float  # quadratic a^T C a - 2 d^T a
    residual: float  # constant-shifted form, see QpInstance.residual
    branch: str  # "interior", "upper" or "lower"
    multiplier: float
    kkt_residual: float


def _solve_reduced(C: np.ndarray, d: np.ndarray, theta: float) -> np.ndarray:
    x = np.linalg.solve(C[:-1, :-1], d[:-1] - C[:-1, -1] * theta)
    return np.append(x, theta)


def solve_subproblem(inst: QpInstance, m: int) -> SubproblemSolution:
    """Global minimiser for subarray m by KKT case enumeration."""
    if inst.degenerate:
        raise SingularInstanceError("aggregated quadratic is singular for B = 0 or K = 1")
    C, d = inst.C, inst.d(m)
    a = np.linalg.solve(C, d)
    if 0.0 <= a[-1] <= inst.theta_max:
        branch = "interior"
    else:
        candidates = [(_solve_reduced(C, d, th), name) for th, name in ((inst.theta_max, "upper"), (0.0, "lower"))]
        a, branch = min(candidates, key=lambda c: inst.residual(c[0], m))
    grad = 2.0 * (C @ a - d)
    # stationarity in theta fixes the active multiplier: grad[-1] + lam1 - lam2 = 0
    lam = {"interior": 0.0, "upper": -grad[-1], "lower": grad[-1]}[branch]
    e = np.zeros_like(a)
    e[-1] = 1.0
    sign = {"interior": 0.0, "upper": 1.0, "lower": -1.0}[branch]
    kkt = float(np.max(np.abs(grad + sign * lam * e)))
    if lam < -KKT_TOL * max(1.0, np.abs(d).max()):
        kkt = max(kkt, -lam)
    return SubproblemSolution(a, inst.quadratic(a, m), inst.residual(a, m), branch, lam, kkt)


@dataclass
class OracleSolution:
    A: np.ndarray  # (N+1, M): columns [x_m; theta_m]
    subproblems: list = field(repr=False)

    @property
    def branches(self) -> list:
        return [s.branch for s in self.subproblems]


def solve_numeric(inst: QpInstance) -> OracleSolution:
    subs = [solve_subproblem(inst, m) for m in range(1, inst.m_ttd + 1)]
    return OracleSolution(np.column_stack([s.a for s in subs]), subs)


def projected_gradient(inst: QpInstance, m: int, max_iter: int = 10_000, rtol: float = 1e-12) -> np.ndarray:
    """Fixed-step projected gradient on one subproblem, as a second independent check.

    Stops once an iteration moves the point by less than ``rtol`` relative to
    its size. Converges slowly when eta is small (the quadratic is ill
    conditioned); use for spot checks on well-conditioned instances.
    """
    C, d = inst.C, inst.d(m)
    step = 1.0 / np.linalg.eigvalsh(C)[-1]
    a = np.zeros(C.shape[0])
    for _ in range(max_iter):
        nxt = a - step * (C @ a - d)
        nxt[-1] = min(max(nxt[-1], 0.0), inst.theta_max)
        moved = np.max(np.abs(nxt - a))
        a = nxt
        if moved <= rtol * max(1.0, np.max(np.abs(a))):
            break
    return a


def design_columns(design: HybridDesign, fc: float, l: int) -> np.ndarray:
    """Stack chain l of a design as the (N+1, M) matrix of ``[x_m; theta_m]`` columns."""
    return np.vstack([design.x[l - 1].T, design.theta(fc)[l - 1][None, :]])


@dataclass
class VerificationReport:
    max_coord_error: float
    max_objective_gap: float
    max_kkt_residual: float
    branches: list  # per chain, per subarray
    lemma2_regime: bool  # every optimal per-entry phase error inside (-1, 1) (units of pi)
    coord_tol: float = 1e-6
    objective_tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return (self.max_coord_error <= self.coord_tol and self.max_objective_gap <= self.objective_tol
                and self.max_kkt_residual <= KKT_TOL)


def max_phase_error(A: np.ndarray, inst: QpInstance) -> float:
    """Largest ``|x - zeta theta + zeta gamma|`` over subcarriers, in units of pi."""
    x, theta = A[:-1], A[-1]
    err = x[None] - inst.zeta[:, None, None] * (theta[None, None, :] - inst.gamma[None])
    return float(np.max(np.abs(err)))


def verify_against_theorem1(sc: ScenarioParams, design: HybridDesign | None = None) -> VerificationReport:
    """Compare a design (default: the closed form) with the numerical optimum chain by chain.

    Only meaningful for non-negative directions, where the closed form is the
    optimiser of the phase-domain problem itself.
    """
    design = theorem1_design(sc) if design is None else design
    coord = gap = kkt = 0.0
    branches, regime = [], True
    for l in range(1, sc.geom.n_rf + 1):
        inst = build_instance(sc, l)
        sol = solve_numeric(inst)
        A = design_columns(design, sc.grid.fc, l)
        coord = max(coord, float(np.max(np.abs(A - sol.A))))
        for m, sub in enumerate(sol.subproblems, start=1):
            gap = max(gap, abs(inst.residual(A[:, m - 1], m) - sub.residual))
            kkt = max(kkt, sub.kkt_residual)
        branches.append(sol.branches)
        regime = regime and max_phase_error(sol.A, inst) < 1.0
    return VerificationReport(coord, gap, kkt, branches, regime)


def check_c_inverse(sc: ScenarioParams) -> float:
    """``max |C_closed_inv @ C - I|`` using the explicitly built aggregate C."""
    inst = build_instance(sc, 1)
    Ci = appendix_constants(sc.grid, sc.geom.n_ps).c_inverse()
    return float(np.max(np.abs(Ci @ inst.C - np.eye(inst.C.shape[0]))))


def chord_distance(x0, y):
    return np.abs(np.exp(1j * np.asarray(x0)) - np.exp(1j * np.asarray(y)))


@dataclass
class Lemma2Report:
    max_identity_error: float  # max | |e^{jx0}-e^{jy}| - 2|sin((x0-y)/2)| |
    same_order: bool

    @property
    def ok(self) -> bool:
        return self.max_identity_error <= 1e-12 and self.same_order


def lemma2_check(x0: float, samples) -> Lemma2Report:
    """Chord distance on the unit circle versus plain phase distance.

    Samples must satisfy ``0 < |x0 - y| < pi``; within that range sorting by
    either distance gives the same order.
    """
    y = np.asarray(samples, dtype=float)
    diff = np.abs(x0 - y)
    if np.any(diff <= 0) or np.any(diff >= np.pi):
        raise ValueError("every sample must satisfy 0 < |x0 - y| < pi")
    chord = chord_distance(x0, y)
    ident = float(np.max(np.abs(chord - 2 * np.abs(np.sin((x0 - y) / 2))))) if len(y) else 0.0
    same = bool(np.array_equal(np.argsort(chord, kind="stable"), np.argsort(diff, kind="stable")))
    return Lemma2Report(ident, same)
