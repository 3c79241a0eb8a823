"""PS/TTD hybrid precoder representation, fully-digital reference and objective.

PS phases ``x`` are stored in units of pi (the applied phase is ``pi * x``)
and are never wrapped. Delays ``t`` are in seconds. The normalised delay
``theta = 2 * fc * t`` is the same bookkeeping in units of pi radians at the
carrier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ArrayGeometry, OfdmGrid, gains_over_band


@dataclass(frozen=True)
class HybridDesign:
    """PS values ``x[l, m, n]`` and TTD delays ``t[l, m]`` for every RF chain.

    Shapes are ``(n_rf, m_ttd, n_ps)`` and ``(n_rf, m_ttd)``. Delays must lie in
    ``[0, t_max]``.
    """

    geom: ArrayGeometry
    x: np.ndarray
    t: np.ndarray
    t_max: float

    def __post_init__(self):
        g = self.geom
        x = np.array(self.x, dtype=float).reshape(g.n_rf, g.m_ttd, g.n_ps)
        t = np.array(self.t, dtype=float).reshape(g.n_rf, g.m_ttd)
        if self.t_max < 0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")
        if np.any(t < 0) or np.any(t > self.t_max):
            raise ValueError("TTD delays must lie in [0, t_max]")
        x.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    def theta(self, fc: float) -> np.ndarray:
        return 2.0 * fc * self.t

    def theta_max(self, fc: float) -> float:
        return 2.0 * fc * self.t_max

    def replace(self, x=None, t=None) -> "HybridDesign":
        return HybridDesign(self.geom, self.x if x is None else x, self.t if t is None else t, self.t_max)


def _chain(design: HybridDesign, l: int) -> int:
    if not 1 <= l <= design.geom.n_rf:
        raise IndexError(f"RF chain {l} outside 1..{design.geom.n_rf}")
    return l - 1


def subarray_offsets(geom: ArrayGeometry) -> np.ndarray:
    """Antenna index ``(m-1)*N + n-1`` as an (M, N) array."""
    return np.arange(geom.n_t, dtype=float).reshape(geom.m_ttd, geom.n_ps)


def gamma(geom: ArrayGeometry, psi_c: float) -> np.ndarray:
    """Fully-digital phase targets ``((m-1)N + n-1) * psi_c`` as an (M, N) array."""
    return subarray_offsets(geom) * psi_c


def ps_matrix(design: HybridDesign) -> np.ndarray:
    """Block PS matrix F1 of shape (n_t, m_ttd * n_rf)."""
    g = design.geom
    F1 = np.zeros((g.n_t, g.m_ttd * g.n_rf), dtype=complex)
    for l in range(g.n_rf):
        for m in range(g.m_ttd):
            rows = slice(m * g.n_ps, (m + 1) * g.n_ps)
            F1[rows, l * g.m_ttd + m] = np.exp(1j * np.pi * design.x[l, m])
    return F1 / np.sqrt(g.n_t)


def ttd_matrix(design: HybridDesign, grid: OfdmGrid, k: int) -> np.ndarray:
    """Block time-delay matrix F2k of shape (m_ttd * n_rf, n_rf)."""
    f_k = grid.frequencies()[grid.check_index(k)]
    g = design.geom
    F2 = np.zeros((g.m_ttd * g.n_rf, g.n_rf), dtype=complex)
    for l in range(g.n_rf):
        F2[l * g.m_ttd:(l + 1) * g.m_ttd, l] = np.exp(-2j * np.pi * f_k * design.t[l])
    return F2


def fully_digital(grid: OfdmGrid, n_t: int, psi_c, k: int) -> np.ndarray:
    """Optimal unconstrained precoder at subcarrier k: column l is f(n_t, zeta_k psi_l)."""
    zeta_k = grid.zeta()[grid.check_index(k)]
    psi_c = np.atleast_1d(np.asarray(psi_c, dtype=float))
    return np.exp(-1j * np.pi * zeta_k * np.outer(np.arange(n_t), psi_c)) / np.sqrt(n_t)


def _beam_phases(design: HybridDesign, grid: OfdmGrid, l: int) -> np.ndarray:
    # (K, n_t) phases in units of pi: x - zeta_k * theta_m, broadcast over n
    idx = _chain(design, l)
    theta = design.theta(grid.fc)[idx]
    ph = design.x[idx][None, :, :] - grid.zeta()[:, None, None] * theta[None, :, None]
    return ph.reshape(grid.n_subcarriers, design.geom.n_t)


def effective_beams(design: HybridDesign, grid: OfdmGrid, l: int) -> np.ndarray:
    """Column l of F1 @ F2k for every subcarrier, stacked as (K, n_t)."""
    return np.exp(1j * np.pi * _beam_phases(design, grid, l)) / np.sqrt(design.geom.n_t)


def effective_beam(design: HybridDesign, grid: OfdmGrid, k: int, l: int) -> np.ndarray:
    return effective_beams(design, grid, l)[grid.check_index(k)]


def design_gains(design: HybridDesign, grid: OfdmGrid, l: int, psi_c: float) -> np.ndarray:
    """Per-subcarrier array gain of RF chain l towards central direction psi_c."""
    return gains_over_band(effective_beams(design, grid, l), grid, psi_c)


def _check_directions(design: HybridDesign, psi_c) -> np.ndarray:
    psi_c = np.atleast_1d(np.asarray(psi_c, dtype=float))
    if psi_c.shape != (design.geom.n_rf,):
        raise ValueError(f"expected {design.geom.n_rf} central directions, got {psi_c.shape[0]}")
    return psi_c


def chord_terms(design: HybridDesign, grid: OfdmGrid, psi_c) -> np.ndarray:
    """Per-entry squared distances to the fully-digital optimum, shape (K, n_rf, M, N).

    Each term is ``|exp(-j pi zeta gamma) - exp(j pi x) exp(-j pi zeta theta)|^2 / n_t``.
    """
    psi_c = _check_directions(design, psi_c)
    g = design.geom
    zeta = grid.zeta()[:, None, None, None]
    gam = subarray_offsets(g)[None, None] * psi_c[None, :, None, None]
    theta = design.theta(grid.fc)[None, :, :, None]
    target = np.exp(-1j * np.pi * zeta * gam)
    got = np.exp(1j * np.pi * design.x[None]) * np.exp(-1j * np.pi * zeta * theta)
    return np.abs(target - got) ** 2 / g.n_t


def objective(design: HybridDesign, grid: OfdmGrid, psi_c) -> float:
    """Subcarrier-averaged squared Frobenius distance to the fully-digital precoder."""
    return float(chord_terms(design, grid, psi_c).sum() / grid.n_subcarriers)


def objective_matrix(design: HybridDesign, grid: OfdmGrid, psi_c) -> float:
    """Same value as :func:`objective`, built from materialised F1, F2k and F*_k."""
    psi_c = _check_directions(design, psi_c)
    F1 = ps_matrix(design)
    total = 0.0
    for k in range(1, grid.n_subcarriers + 1):
        diff = fully_digital(grid, design.geom.n_t, psi_c, k) - F1 @ ttd_matrix(design, grid, k)
        total += np.linalg.norm(diff, "fro") ** 2
    return total / grid.n_subcarriers


def sign_flip(design: HybridDesign, psi_c):
    """Mirror a design to the negated directions.

    Returns ``(design', -psi_c)`` with ``x' = -x`` and ``t' = t_max - t``. The
    array gain of the mirrored design towards ``-psi`` equals that of the
    original towards ``psi`` on every subcarrier.
    """
    psi_c = np.atleast_1d(np.asarray(psi_c, dtype=float))
    t_new = np.clip(design.t_max - design.t, 0.0, design.t_max)
    return design.replace(x=-design.x, t=t_new), -psi_c
