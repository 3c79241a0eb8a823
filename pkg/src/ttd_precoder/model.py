"""OFDM grid, ULA geometry, multipath channel and array gain.

Subcarrier indices ``k`` and RF-chain/path indices ``l`` are 1-based in every
public function, matching the usual labelling of the K subcarriers
(the centre of a 129-subcarrier grid is ``k = 65``). Arrays are numpy and
0-based internally. All quantities are SI (Hz, s, m).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 3e8

# |sin(delta)| below this is treated as the removable singularity of the
# Dirichlet kernel.
_SINGULAR_EPS = 1e-12


@dataclass(frozen=True)
class OfdmGrid:
    """Symmetric OFDM subcarrier grid around a carrier ``fc``."""

    fc: float
    bandwidth: float
    n_subcarriers: int

    def __post_init__(self):
        if int(self.n_subcarriers) != self.n_subcarriers or self.n_subcarriers < 1:
            raise ValueError(f"subcarrier count must be a positive integer, got {self.n_subcarriers}")
        if self.n_subcarriers % 2 == 0:
            raise ValueError(f"subcarrier count must be odd, got {self.n_subcarriers}")
        if not self.fc > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.fc}")
        if self.bandwidth < 0 or self.bandwidth >= 2 * self.fc:
            raise ValueError(f"bandwidth must lie in [0, 2*fc), got {self.bandwidth}")
        object.__setattr__(self, "n_subcarriers", int(self.n_subcarriers))

    @property
    def center(self) -> int:
        """1-based index of the carrier subcarrier."""
        return (self.n_subcarriers + 1) // 2

    def offsets(self) -> np.ndarray:
        """Integer offsets ``k - center`` for k = 1..K."""
        K = self.n_subcarriers
        return np.arange(K, dtype=float) - (K - 1) / 2

    def frequencies(self) -> np.ndarray:
        return self.fc + (self.bandwidth / self.n_subcarriers) * self.offsets()

    def zeta(self) -> np.ndarray:
        """Ratios f_k / fc. Computed from offsets so the centre entry is exactly 1."""
        return 1.0 + (self.bandwidth / (self.n_subcarriers * self.fc)) * self.offsets()

    def check_index(self, k: int) -> int:
        if not 1 <= k <= self.n_subcarriers:
            raise IndexError(f"subcarrier index {k} outside 1..{self.n_subcarriers}")
        return k - 1


def subcarrier_frequencies(grid: OfdmGrid) -> np.ndarray:
    return grid.frequencies()


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA of ``n_t`` antennas split into ``m_ttd`` subarrays per RF chain."""

    n_t: int
    m_ttd: int
    n_rf: int = 1
    spacing: float | None = None

    def __post_init__(self):
        if self.n_t < 1 or self.m_ttd < 1 or self.n_rf < 1:
            raise ValueError("antenna, TTD and RF-chain counts must be >= 1")
        if self.n_t % self.m_ttd:
            raise ValueError(f"n_t={self.n_t} is not divisible by m_ttd={self.m_ttd}")
        if self.n_t < self.n_rf:
            raise ValueError(f"n_t={self.n_t} smaller than n_rf={self.n_rf}")

    @property
    def n_ps(self) -> int:
        """Phase shifters per TTD (antennas per subarray)."""
        return self.n_t // self.m_ttd

    @classmethod
    def half_wavelength(cls, n_t: int, m_ttd: int, n_rf: int, fc: float) -> "ArrayGeometry":
        return cls(n_t, m_ttd, n_rf, spacing=SPEED_OF_LIGHT / (2 * fc))


@dataclass(frozen=True)
class PathSet:
    """Per-path gains, delays and angles. One path per RF chain."""

    alpha: np.ndarray
    tau: np.ndarray
    aod: np.ndarray
    aoa: np.ndarray
    n_r: int = 1

    def __post_init__(self):
        arrays = [np.atleast_1d(np.asarray(a)) for a in (self.alpha, self.tau, self.aod, self.aoa)]
        if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
            raise ValueError("alpha, tau, aod and aoa must be 1-D arrays of equal length")
        for name, angles in (("aod", arrays[2]), ("aoa", arrays[3])):
            if np.any(np.abs(angles) > np.pi / 2 + 1e-12):
                raise ValueError(f"{name} must lie in [-pi/2, pi/2]")
        object.__setattr__(self, "alpha", arrays[0].astype(complex))
        object.__setattr__(self, "tau", arrays[1].astype(float))
        object.__setattr__(self, "aod", arrays[2].astype(float))
        object.__setattr__(self, "aoa", arrays[3].astype(float))

    @property
    def n_paths(self) -> int:
        return len(self.alpha)

    @property
    def psi_c(self) -> np.ndarray:
        return np.sin(self.aod)

    @property
    def phi_c(self) -> np.ndarray:
        return np.sin(self.aoa)

    @classmethod
    def from_directions(cls, psi_c, n_r: int = 1, phi_c=None) -> "PathSet":
        """Unit-gain, zero-delay paths with the given central directions."""
        psi_c = np.atleast_1d(np.asarray(psi_c, dtype=float))
        phi_c = psi_c if phi_c is None else np.atleast_1d(np.asarray(phi_c, dtype=float))
        return cls(np.ones(len(psi_c)), np.zeros(len(psi_c)), np.arcsin(psi_c), np.arcsin(phi_c), n_r)

    @classmethod
    def random(cls, rng: np.random.Generator, n_paths: int, n_r: int = 1,
               delay_window: tuple[float, float] = (0.0, 100e-9)) -> "PathSet":
        """CN(0, 1) gains, uniform delays in ``delay_window``, uniform angles."""
        alpha = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2)
        tau = rng.uniform(*delay_window, size=n_paths)
        aod = rng.uniform(-np.pi / 2, np.pi / 2, size=n_paths)
        aoa = rng.uniform(-np.pi / 2, np.pi / 2, size=n_paths)
        return cls(alpha, tau, aod, aoa, n_r)


def steering(n: int, psi: float) -> np.ndarray:
    """Array response ``(1/sqrt(n)) * exp(-j*pi*i*psi)`` for i = 0..n-1."""
    if n < 1:
        raise ValueError(f"antenna count must be >= 1, got {n}")
    return np.exp(-1j * np.pi * np.arange(n) * psi) / np.sqrt(n)


def channel_matrix(grid: OfdmGrid, geom: ArrayGeometry, paths: PathSet, k: int) -> np.ndarray:
    """Frequency-domain channel ``H_k`` of shape (n_t, n_r)."""
    idx = grid.check_index(k)
    f_k = grid.frequencies()[idx]
    zeta_k = grid.zeta()[idx]
    H = np.zeros((geom.n_t, paths.n_r), dtype=complex)
    for a, tau, psi, phi in zip(paths.alpha, paths.tau, paths.psi_c, paths.phi_c):
        H += a * np.exp(-2j * np.pi * tau * f_k) * np.outer(
            steering(geom.n_t, zeta_k * psi), steering(paths.n_r, zeta_k * phi).conj()
        )
    return np.sqrt(geom.n_t * paths.n_r / paths.n_paths) * H


def dirichlet_gain(n_t: int, delta) -> np.ndarray:
    """``|sin(n_t*delta) / (n_t*sin(delta))|`` with the limit 1 at the singular points."""
    delta = np.asarray(delta, dtype=float)
    s = np.sin(delta)
    singular = np.abs(s) < _SINGULAR_EPS
    safe = np.where(singular, 1.0, s)
    return np.where(singular, 1.0, np.abs(np.sin(n_t * delta) / (n_t * safe)))


def array_gain(beam: np.ndarray, grid: OfdmGrid, k: int, psi_c: float) -> float:
    """``|f(N_t, zeta_k * psi_c)^H beam|`` for a unit-norm beam."""
    beam = np.asarray(beam)
    if abs(np.linalg.norm(beam) - 1.0) > 1e-9:
        raise ValueError(f"beam must have unit 2-norm, got {np.linalg.norm(beam)}")
    zeta_k = grid.zeta()[grid.check_index(k)]
    return float(abs(np.vdot(steering(len(beam), zeta_k * psi_c), beam)))


def gains_over_band(beams: np.ndarray, grid: OfdmGrid, psi_c: float) -> np.ndarray:
    """Array gain for a stack of beams, one row per subcarrier (shape (K, n_t))."""
    n_t = beams.shape[1]
    # conj(f(n_t, zeta_k*psi)) has entries exp(+j*pi*i*zeta_k*psi)/sqrt(n_t)
    phase = np.pi * np.outer(grid.zeta() * psi_c, np.arange(n_t))
    return np.abs(np.sum(np.exp(1j * phase) * beams, axis=1)) / np.sqrt(n_t)


def squint_profile(grid: OfdmGrid, geom: ArrayGeometry | int, psi_c: float) -> np.ndarray:
    """Per-subcarrier gain of the beam matched at the carrier (length K)."""
    n_t = geom.n_t if isinstance(geom, ArrayGeometry) else int(geom)
    delta = 0.5 * np.pi * (grid.zeta() - 1.0) * psi_c
    return dirichlet_gain(n_t, delta)
