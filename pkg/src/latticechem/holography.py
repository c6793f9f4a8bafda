"""3D Fourier-hologram phase retrieval with the Ewald-sphere constraint.

A phase-only mask on an N_f x N_f grid (N_f = R_f * n_side pixels, one pixel
= a/R_f) sits in the Fourier plane of the reconstruction volume.  The field
in the z-plane at distance z from focus is the inverse transform of the
masked spectrum times the propagation phase exp(i k_z z) with
k_z = sqrt(k_f^2 - |k_perp|^2), supported on the Ewald disc |k_perp| <= k_f.
The Ewald radius saturates the diffraction limit a_f = lambda_f/2, i.e.
k_f = pi per reconstruction pixel.

The retrieval loop constrains only the fermionic lattice sites (every
R_f-th pixel of every lattice plane): amplitudes there are replaced by the
square root of the target intensity while phases (and all inter-site
pixels) stay free; the constrained planes are propagated back and summed
coherently, the pupil is re-projected to phase-only, and the cycle repeats
until the error improvement stalls.

Per-plane power is fixed by the unitary propagation, which is exactly why a
refinement factor of 1 (every pixel constrained) cannot represent targets
whose per-plane sums differ, while R_f > 1 leaves free pixels to absorb the
imbalance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import fft as _fft

from .lattice import LatticeGeometry, NucleusSpec, PotentialField


@dataclass(frozen=True)
class HologramPlan:
    """Target intensities at fermionic sites plus the SLM discretization."""

    n_side: int
    refine: int
    site_coords: tuple[tuple[int, int, int], ...]  # (ix, iy, iz) lattice sites
    target_values: tuple[float, ...]

    def __post_init__(self):
        if self.refine < 1:
            raise ValueError("refinement factor must be >= 1")
        if len(self.site_coords) != len(self.target_values):
            raise ValueError("one target value per site required")
        if any(v <= 0 for v in self.target_values):
            raise ValueError("target intensities must be positive")
        n = self.n_side
        for s in self.site_coords:
            if not all(0 <= c < n for c in s):
                raise ValueError(f"site {s} outside the reconstruction volume")

    @property
    def slm_size(self) -> int:
        return self.refine * self.n_side


@dataclass
class HologramResult:
    phases: np.ndarray  # (N_f, N_f), radians in [0, 2*pi)
    achieved: np.ndarray  # intensity per target site, caller's scale
    epsilon_trace: list[float]
    converged: bool = True

    @property
    def final_epsilon(self) -> float:
        return self.epsilon_trace[-1]


def hologram_error(achieved: Sequence[float], target: Sequence[float]) -> float:
    """Average normalized intensity error over the constrained sites.

    The raw per-site sum |(V - V0)/V0| divided by the site count, so values
    are comparable across lattice sizes; invariant under a common rescale of
    both arguments.
    """
    a = np.asarray(achieved, dtype=float)
    t = np.asarray(target, dtype=float)
    if a.shape != t.shape:
        raise ValueError("achieved and target must have equal length")
    if np.any(t == 0):
        raise ValueError("target intensities must be nonzero")
    return float(np.mean(np.abs((a - t) / t)))


def coulomb_target(
    geom: LatticeGeometry,
    nuclei: Sequence[NucleusSpec],
    v0: float,
    refine: int,
) -> HologramPlan:
    """Plan whose target intensity at site j is sum_a Z_a*v0/|j - R_a|.

    The intensity is proportional to the light-shift magnitude; the
    attractive sign is applied downstream by red detuning.
    """
    if v0 <= 0:
        raise ValueError("v0 must be positive")
    n = geom.n_side
    ax = geom.axes()
    vals = np.zeros((n, n, n))
    for nuc in nuclei:
        if not nuc.inside(geom):
            raise ValueError(f"nucleus at {nuc.position} outside the lattice")
        dx = ax - nuc.position[0]
        dy = ax - nuc.position[1]
        dz = ax - nuc.position[2]
        vals += nuc.charge * v0 / np.sqrt(
            dx[:, None, None] ** 2 + dy[None, :, None] ** 2 + dz[None, None, :] ** 2
        )
    sites = tuple(
        (ix, iy, iz) for ix in range(n) for iy in range(n) for iz in range(n)
    )
    targets = tuple(float(vals[s]) for s in sites)
    return HologramPlan(n_side=n, refine=refine, site_coords=sites,
                        target_values=targets)


def _ewald_grids(n_f: int, refine: int, n_side: int):
    """Ewald mask and stacked per-plane propagation phases (lattice z's)."""
    k = 2.0 * np.pi * np.fft.fftfreq(n_f)
    k2 = k[:, None] ** 2 + k[None, :] ** 2
    k_f = np.pi  # radians per pixel: a_f = lambda_f/2 saturated
    mask = k2 <= k_f**2
    kz = np.sqrt(np.maximum(k_f**2 - k2, 0.0))
    z_planes = (np.arange(n_side) - (n_side - 1) / 2.0) * refine  # in pixels
    props = np.stack(
        [np.where(mask, np.exp(1j * kz * z), 0.0) for z in z_planes]
    )
    return mask, props


def gs_iterate(
    plan: HologramPlan,
    seed: int = 0,
    stop_tol: float = 1e-4,
    max_iters: int = 400,
) -> HologramResult:
    """Modified Gerchberg-Saxton cycle for the 3D target.

    Deterministic for a given seed (random initial phases).  The stopping
    rule follows the raw summed error (the un-averaged form of the error
    functional): iteration ends when its improvement falls below
    ``stop_tol``, i.e. when the site-averaged trace improves by less than
    stop_tol / n_sites.  On hitting ``max_iters`` the best-so-far solution
    is returned with the converged flag cleared (never raises).

    Targets are rescaled internally so their total matches the power the
    initial field already delivers to the constrained sites (the physical
    laser power is a free knob); achieved intensities are reported back in
    the caller's scale.
    """
    if stop_tol <= 0:
        raise ValueError("stop_tol must be positive")
    n_f = plan.slm_size
    n = plan.n_side
    r_f = plan.refine
    mask, props = _ewald_grids(n_f, r_f, n)
    props_conj = np.conj(props)

    # site pixel coordinates, grouped per plane but indexed flat
    coords = np.asarray(plan.site_coords, dtype=int)
    pz = coords[:, 2]
    px = coords[:, 0] * r_f
    py = coords[:, 1] * r_f

    n_sites = len(coords)
    avg_tol = stop_tol / n_sites
    target = np.asarray(plan.target_values, dtype=float)
    rng = np.random.default_rng(seed)
    pupil = np.where(mask, np.exp(2j * np.pi * rng.random((n_f, n_f))), 0.0)

    def forward(pupil):
        fields = _fft.ifft2(pupil[None, :, :] * props, norm="ortho", axes=(-2, -1))
        achieved = np.abs(fields[pz, px, py]) ** 2
        return fields, achieved

    fields, achieved = forward(pupil)
    scale = float(np.sum(achieved) / np.sum(target))
    target_int = target * scale
    amp = np.sqrt(target_int)

    trace = [hologram_error(achieved, target_int)]
    best = (trace[0], np.angle(pupil) % (2 * np.pi), achieved / scale)
    converged = False
    for _ in range(max_iters):
        cur = fields[pz, px, py]
        mag = np.abs(cur)
        fields[pz, px, py] = amp * np.where(mag > 0, cur / np.where(mag > 0, mag, 1.0), 1.0)
        back = np.sum(
            _fft.fft2(fields, norm="ortho", axes=(-2, -1)) * props_conj, axis=0
        )
        pupil = np.where(mask, np.exp(1j * np.angle(back)), 0.0)
        fields, achieved = forward(pupil)
        trace.append(hologram_error(achieved, target_int))
        if trace[-1] < best[0]:
            best = (trace[-1], np.angle(pupil) % (2 * np.pi), achieved / scale)
        if abs(trace[-1] - trace[-2]) < avg_tol:
            converged = True
            break
    return HologramResult(
        phases=best[1], achieved=best[2], epsilon_trace=trace, converged=converged
    )


def perturb_potential(field: PotentialField, eps: float, seed: int) -> PotentialField:
    """Multiply every site value by (1 + eps*xi), xi iid standard normal."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(field.values.shape)
    return PotentialField(field.geom, field.values * (1.0 + eps * xi))


def propagate_roundtrip(field: np.ndarray, z_pixels: float) -> np.ndarray:
    """Forward-then-backward angular-spectrum propagation (unitarity check)."""
    n_f = field.shape[0]
    k = 2.0 * np.pi * np.fft.fftfreq(n_f)
    k2 = k[:, None] ** 2 + k[None, :] ** 2
    mask = k2 <= np.pi**2
    kz = np.sqrt(np.maximum(np.pi**2 - k2, 0.0))
    spec = _fft.fft2(field, norm="ortho") * np.where(mask, np.exp(1j * kz * z_pixels), 0.0)
    back = _fft.ifft2(spec * np.where(mask, np.exp(-1j * kz * z_pixels), 0.0), norm="ortho")
    # restrict comparison to the band-limited content of the input
    ref = _fft.ifft2(_fft.fft2(field, norm="ortho") * mask, norm="ortho")
    return back - ref
