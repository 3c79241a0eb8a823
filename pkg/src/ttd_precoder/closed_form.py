"""Closed-form joint PS/TTD design under a per-device delay bound.

For each RF chain and subarray the optimal normalised delay is the subarray
mean of the fully-digital phase targets, ``((2m-1)N - 1) * psi / 2``, whenever
that fits under ``theta_max``; otherwise the delay saturates at ``t_max`` and
the phase shifters absorb the remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ArrayGeometry, OfdmGrid
from .precoder import HybridDesign, gamma, sign_flip


@dataclass(frozen=True)
class ScenarioParams:
    grid: OfdmGrid
    geom: ArrayGeometry
    psi_c: tuple
    t_max: float

    def __post_init__(self):
        psi = tuple(float(p) for p in np.atleast_1d(self.psi_c))
        if len(psi) != self.geom.n_rf:
            raise ValueError(f"need one central direction per RF chain ({self.geom.n_rf}), got {len(psi)}")
        if any(abs(p) > 1 for p in psi):
            raise ValueError("central directions must lie in [-1, 1]")
        if self.t_max < 0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")
        object.__setattr__(self, "psi_c", psi)

    @property
    def theta_max(self) -> float:
        return 2.0 * self.grid.fc * self.t_max

    def with_(self, **changes) -> "ScenarioParams":
        """Copy with ``n_t``, ``t_max`` or ``psi_c`` replaced."""
        geom = self.geom
        if "n_t" in changes:
            geom = ArrayGeometry(changes.pop("n_t"), geom.m_ttd, geom.n_rf, geom.spacing)
        t_max = changes.pop("t_max", self.t_max)
        psi_c = changes.pop("psi_c", self.psi_c)
        if changes:
            raise TypeError(f"unsupported fields: {sorted(changes)}")
        return ScenarioParams(self.grid, geom, psi_c, t_max)


@dataclass(frozen=True)
class AppendixConstants:
    """Closed-form pieces of the aggregated quadratic for a subarray of N elements."""

    n_ps: int
    eta: float

    @property
    def c_inv_corner(self) -> float:
        return 1.0 / self.eta

    @property
    def schur_gamma(self) -> float:
        return self.n_ps + self.eta

    def c_matrix(self) -> np.ndarray:
        N = self.n_ps
        C = np.eye(N + 1)
        C[:N, N] = C[N, :N] = -1.0
        C[N, N] = self.schur_gamma
        return C

    def c_inverse(self) -> np.ndarray:
        """Block inverse ``[[I + 11^T/eta, 1/eta], [1^T/eta, 1/eta]]``."""
        N = self.n_ps
        Ci = np.full((N + 1, N + 1), 1.0 / self.eta)
        Ci[:N, :N] += np.eye(N)
        return Ci


def eta(grid: OfdmGrid, n_ps: int) -> float:
    B, fc, K = grid.bandwidth, grid.fc, grid.n_subcarriers
    return n_ps * (B / fc) ** 2 * (K ** 2 - 1) / (12 * K ** 2)


def appendix_constants(grid: OfdmGrid, n_ps: int) -> AppendixConstants:
    if n_ps < 1:
        raise ValueError(f"subarray size must be >= 1, got {n_ps}")
    if grid.bandwidth == 0 or grid.n_subcarriers < 2:
        raise ValueError("eta vanishes for B = 0 or K = 1; the aggregated quadratic is singular")
    return AppendixConstants(n_ps, eta(grid, n_ps))


def unconstrained_theta(n_ps: int, m: int, psi: float) -> float:
    """Subarray mean of the phase targets, ``((2m-1)N - 1) * psi / 2`` (m is 1-based)."""
    return ((2 * m - 1) * n_ps - 1) * psi / 2.0


def interior_mask(sc: ScenarioParams) -> np.ndarray:
    """``(n_rf, M)`` booleans: True where the unconstrained delay fits under the bound.

    Uses the magnitude of psi, matching the positive-direction solve that
    negative directions are mapped from.
    """
    N, M = sc.geom.n_ps, sc.geom.m_ttd
    m = np.arange(1, M + 1)
    need = ((2 * m - 1) * N - 1)[None, :] * np.abs(np.asarray(sc.psi_c))[:, None] / 2.0
    return need <= sc.theta_max


def _theorem1_chain(geom: ArrayGeometry, fc: float, psi: float, t_max: float):
    N, M = geom.n_ps, geom.m_ttd
    theta_max = 2.0 * fc * t_max
    m = np.arange(1, M + 1)
    n = np.arange(1, N + 1)
    need = ((2 * m - 1) * N - 1) * psi / 2.0
    inside = need <= theta_max
    x_in = np.broadcast_to((N - 2 * n + 1) * psi / 2.0, (M, N))
    x_out = theta_max - gamma(geom, psi)
    x = np.where(inside[:, None], x_in, x_out)
    # rounding in need / (2 fc) can overshoot t_max by an ulp
    t = np.where(inside, np.minimum(((2 * m - 1) * N - 1) * psi / (4.0 * fc), t_max), t_max)
    return x, t


def theorem1_design(sc: ScenarioParams) -> HybridDesign:
    """Globally optimal PS values and delays for each RF chain.

    Negative directions are solved for ``|psi|`` and mirrored with
    :func:`~ttd_precoder.precoder.sign_flip`.
    """
    g = sc.geom
    xs, ts = [], []
    for psi in sc.psi_c:
        x, t = _theorem1_chain(g, sc.grid.fc, abs(psi), sc.t_max)
        if psi < 0:
            single = ArrayGeometry(g.n_t, g.m_ttd, 1, g.spacing)
            flipped, _ = sign_flip(HybridDesign(single, x, t, sc.t_max), [abs(psi)])
            x, t = flipped.x[0], flipped.t[0]
        xs.append(x)
        ts.append(t)
    return HybridDesign(g, np.array(xs), np.array(ts), sc.t_max)


def baseline_design(sc: ScenarioParams) -> HybridDesign:
    """Fixed-PS design with linearly growing delays, clipped to ``t_max``.

    ``x = -(n-1) psi`` and ``t = m N psi / (2 fc)`` as used by earlier
    delay-phase precoding work; delays above the bound are knocked down to it.
    """
    g = sc.geom
    N, M, fc = g.n_ps, g.m_ttd, sc.grid.fc
    n = np.arange(1, N + 1)
    m = np.arange(1, M + 1)
    xs, ts = [], []
    for psi in sc.psi_c:
        a = abs(psi)
        x = np.broadcast_to(-(n - 1) * a, (M, N))
        t = np.minimum(m * N * a / (2.0 * fc), sc.t_max)
        if psi < 0:
            x, t = -x, sc.t_max - t
        xs.append(x)
        ts.append(t)
    return HybridDesign(g, np.array(xs), np.array(ts), sc.t_max)


def max_nt_bound(m_ttd: int, fc: float, t_max: float, psi_max: float, m: int | None = None) -> float:
    """Right-hand side of the antenna-count rule; ``m`` defaults to the binding m = M."""
    m = m_ttd if m is None else m
    if psi_max == 0:
        return math.inf
    return m_ttd / (2 * m - 1) + 4 * m_ttd * fc * t_max / ((2 * m - 1) * abs(psi_max))


def max_nt_criterion(m_ttd: int, fc: float, t_max: float, psi_max: float) -> int | float:
    """Largest antenna count meeting the rule at every subarray, or ``inf`` for psi = 0."""
    bound = max_nt_bound(m_ttd, fc, t_max, psi_max)
    return bound if math.isinf(bound) else math.floor(bound)


def min_tmax_criterion(n_t: int, m_ttd: int, fc: float, psi_max: float, m: int | None = None) -> float:
    """Smallest delay bound (s) that keeps subarray m (default M) unsaturated."""
    m = m_ttd if m is None else m
    return abs(psi_max) * ((2 * m - 1) * n_t - m_ttd) / (4 * m_ttd * fc)
