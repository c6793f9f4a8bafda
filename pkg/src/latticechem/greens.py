"""Lattice Green's functions of the simple-cubic tight-binding band.

Everything here is a Brillouin-zone sum over the periodic mediator lattice,

    sigma(z, r) = (1/N_M) sum_k exp(i k.r) / (z - omega_k),
    g(z, r)     = (1/N_M) sum_k exp(i k.r) / (z - omega_k)**2 = -d sigma/dz,

with omega_k = sign * 2t * (cos kx + cos ky + cos kz) and k on the N_M-point
grid k_a = 2*pi*j/n.  Bound states of on-site impurity problems live strictly
outside the band |z| > 6t; all evaluators reject energies inside it.

Above the upper band edge the continuum limit has the closed forms

    sigma(z, r) ~ exp(-r*sqrt(z-6)) / (4*pi*r)        (hopping units, r > 0)
    sigma(z, 0) ~ 0.253 - sqrt(z-6) / (4*pi)
    g(z, r)     ~ exp(-r*sqrt(z-6)) / (8*pi*sqrt(z-6))

where 0.253 is the (rounded) simple-cubic Watson integral supplying the
natural lattice cutoff at r = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import fft as _fft

# Rounded Watson-integral value of the band-edge lattice sum sigma(6t, 0)/t.
BAND_EDGE_SIGMA0 = 0.253

_EDGE_PAD = 1e-12


class InsideBandError(ValueError):
    """Energy argument falls inside the tight-binding continuum."""


@dataclass(frozen=True)
class DispersionSpec:
    """Mediator band: omega_k = sign * 2*hopping * sum_a cos(k_a).

    ``hopping`` is t_b, t_a or J_A depending on the scheme using the band.
    ``sign = +1`` puts the upper band edge at k = 0 (no checkerboard phase);
    ``sign = -1`` is the bare-boson convention with the edge at k = (pi,pi,pi).
    Either way the band spans [-6t, +6t].
    """

    hopping: float
    n_side_m: int
    sign: int = 1

    def __post_init__(self):
        if self.hopping <= 0:
            raise ValueError(f"hopping must be positive, got {self.hopping}")
        if self.n_side_m < 2:
            raise ValueError(f"n_side_m must be >= 2, got {self.n_side_m}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def band_edge(self) -> float:
        return 6.0 * self.hopping

    @property
    def n_sites(self) -> int:
        return self.n_side_m**3

    def k_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_side_m)


class GreensTable:
    """Cached Brillouin-zone grids for one dispersion.

    Holds the omega_k grid plus per-displacement cos(k.r) tables so that
    root finders can evaluate sigma/g at a handful of displacements for many
    energies without re-running FFTs.  Instances are read-only after
    construction and safe to share between threads.
    """

    def __init__(self, disp: DispersionSpec):
        self.disp = disp
        k = disp.k_axis()
        c = np.cos(k)
        cos_sum = c[:, None, None] + c[None, :, None] + c[None, None, :]
        self._omega = disp.sign * 2.0 * disp.hopping * cos_sum
        self._cos_cache: dict[tuple[int, int, int], np.ndarray] = {}

    # -- helpers ---------------------------------------------------------

    def _check_outside(self, z: float) -> None:
        if abs(z) <= self.disp.band_edge + _EDGE_PAD:
            raise InsideBandError(
                f"z = {z} lies inside the band [-{self.disp.band_edge}, "
                f"{self.disp.band_edge}] (resonant denominator)"
            )

    def _cos_kr(self, r: Sequence[int]) -> np.ndarray:
        key = (int(r[0]), int(r[1]), int(r[2]))
        tab = self._cos_cache.get(key)
        if tab is None:
            k = self.disp.k_axis()
            ph = [np.exp(1j * k * key[a]) for a in range(3)]
            tab = np.real(
                ph[0][:, None, None] * ph[1][None, :, None] * ph[2][None, None, :]
            )
            self._cos_cache[key] = tab
        return tab

    # -- point evaluations -------------------------------------------------

    def sigma(self, z: float, r: Sequence[int] = (0, 0, 0)) -> float:
        """(1/N_M) sum_k cos(k.r) / (z - omega_k)."""
        self._check_outside(z)
        den = z - self._omega
        if all(int(x) == 0 for x in r):
            return float(np.mean(1.0 / den))
        return float(np.mean(self._cos_kr(r) / den))

    def g(self, z: float, r: Sequence[int] = (0, 0, 0)) -> float:
        """(1/N_M) sum_k cos(k.r) / (z - omega_k)**2 = -d sigma/dz."""
        self._check_outside(z)
        den = (z - self._omega) ** 2
        if all(int(x) == 0 for x in r):
            return float(np.mean(1.0 / den))
        return float(np.mean(self._cos_kr(r) / den))

    # -- full-lattice maps (one FFT each) ----------------------------------

    def sigma_map(self, z: float) -> np.ndarray:
        """sigma(z, r) for every displacement r, as an (n, n, n) array."""
        self._check_outside(z)
        return np.real(_fft.ifftn(1.0 / (z - self._omega)))

    def g_map(self, z: float) -> np.ndarray:
        self._check_outside(z)
        return np.real(_fft.ifftn(1.0 / (z - self._omega) ** 2))


@lru_cache(maxsize=8)
def _table(disp: DispersionSpec) -> GreensTable:
    return GreensTable(disp)


def table_for(disp: DispersionSpec) -> GreensTable:
    """Shared read-only table for ``disp`` (one grid per (N_M, t, sign))."""
    return _table(disp)


def sigma_numeric(disp: DispersionSpec, z: float, r: Sequence[int] = (0, 0, 0)) -> float:
    """Exact BZ-grid sigma(z, r) for the periodic mediator lattice."""
    return table_for(disp).sigma(z, r)


def g_numeric(disp: DispersionSpec, z: float, r: Sequence[int] = (0, 0, 0)) -> float:
    """Exact BZ-grid g(z, r) = -d sigma/dz."""
    return table_for(disp).g(z, r)


# Spec surface name: the Franck-Condon-type second-power sum.
g_fc = g_numeric


def sigma_analytic(z: float, r: float) -> float:
    """Band-edge expansion of sigma in hopping units (t = 1), valid z > 6.

    For r > 0 this is the Yukawa form exp(-r*sqrt(z-6))/(4*pi*r); at r = 0
    the lattice-regularized value 0.253 - sqrt(z-6)/(4*pi).
    """
    if z <= 6.0:
        raise InsideBandError(f"analytic expansion requires z > 6, got z = {z}")
    if r < 0:
        raise ValueError("displacement magnitude must be >= 0")
    q = np.sqrt(z - 6.0)
    if r == 0:
        return BAND_EDGE_SIGMA0 - q / (4.0 * np.pi)
    return float(np.exp(-r * q) / (4.0 * np.pi * r))


def g_analytic(z: float, r: float) -> float:
    """Band-edge expansion of g in hopping units: exp(-r*sqrt(z-6))/(8*pi*sqrt(z-6))."""
    if z <= 6.0:
        raise InsideBandError(f"analytic expansion requires z > 6, got z = {z}")
    q = np.sqrt(z - 6.0)
    return float(np.exp(-r * q) / (8.0 * np.pi * q))
