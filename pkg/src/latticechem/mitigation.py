"""Discretization-error extrapolation to the continuum limit.

Finite-lattice ground energies scanned against the effective Bohr radius
follow a power law E(x) = E_inf + c * x**b (b close to -2) in the
discretization-dominated regime, before finite-size effects bend the curve
over.  The continuum energy is recovered *without* knowing it a priori:
for each candidate E_guess a line is fitted to log|E - E_guess| vs log x
and the candidate minimizing the standard error of the slope is selected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._util import line_fit
from .eigensolver import lowest_eigenpairs
from .lattice import SimulationUnits, SparseHamiltonian

_MIN_WINDOW = 4


class ExtrapolationError(RuntimeError):
    pass


@dataclass
class EnergyCurve:
    """Ground energies (Ry) against effective Bohr radius a0/a, ascending."""

    ratios: np.ndarray
    energies_ry: np.ndarray

    def __post_init__(self):
        self.ratios = np.asarray(self.ratios, dtype=float)
        self.energies_ry = np.asarray(self.energies_ry, dtype=float)
        if self.ratios.shape != self.energies_ry.shape or self.ratios.ndim != 1:
            raise ValueError("ratios and energies must be 1-D arrays of equal length")
        if len(self.ratios) < _MIN_WINDOW:
            raise ValueError(f"need at least {_MIN_WINDOW} scan points")
        if np.any(np.diff(self.ratios) <= 0):
            raise ValueError("bohr ratios must be strictly increasing")


@dataclass
class ExtrapolationResult:
    e_infinity: float
    exponent_b: float
    sigma_curve: list[tuple[float, float]]
    fit_window: np.ndarray
    coefficient_c: float = field(default=float("nan"))

    @property
    def sigma_min(self) -> float:
        return min(s for _, s in self.sigma_curve)


def scan_bohr_radius(
    family: Callable[[float], tuple[SparseHamiltonian, SimulationUnits]],
    ratios: Sequence[float],
    tol: float = 1e-9,
    seed: int = 0,
) -> EnergyCurve:
    """Ground energy (Ry, band-bottom referenced) for each Bohr ratio.

    ``family(ratio)`` must return the assembled single-particle operator and
    its units; eigensolver failures propagate.
    """
    ratios = np.asarray(sorted(float(r) for r in ratios))
    energies = np.empty_like(ratios)
    v0 = None
    for i, r in enumerate(ratios):
        op, units = family(r)
        ep = lowest_eigenpairs(op, k=1, tol=tol, seed=seed, v0=v0)
        v0 = ep.vectors[:, 0]
        energies[i] = units.to_ry(ep.values[0])
    return EnergyCurve(ratios, energies)


def monotone_window(curve: EnergyCurve, center: float | None = None) -> np.ndarray:
    """Indices of the discretization-dominated prefix.

    The maximal prefix over which |E - center| is strictly decreasing in
    a0/a; the finite-size-contaminated tail (where the distance turns over)
    is excluded.  ``center`` defaults to the minimum scanned energy.
    """
    if center is None:
        center = float(np.min(curve.energies_ry))
    d = np.abs(curve.energies_ry - center)
    stop = len(d)
    for i in range(1, len(d)):
        if d[i] >= d[i - 1] or d[i] == 0.0:
            stop = i
            break
    idx = np.arange(stop)
    if len(idx) < _MIN_WINDOW:
        raise ExtrapolationError(
            f"monotone window has only {len(idx)} points (need {_MIN_WINDOW}); "
            "scan more ratios in the discretization regime"
        )
    return idx


def _fit_candidate(x_log, energies, e_guess):
    """(b, sigma_b, c) for one guess, or None when log-fit is inapplicable."""
    delta = energies - e_guess
    if np.any(delta == 0.0):
        return None
    if not (np.all(delta > 0) or np.all(delta < 0)):
        return None  # sign-inconsistent window
    slope, intercept, stderr = line_fit(x_log, np.log(np.abs(delta)))
    return slope, stderr, float(np.exp(intercept))


def _guess_grid(center: float, half_width: float, n: int) -> np.ndarray:
    return np.linspace(center - half_width, center + half_width, n)


def extrapolate(
    curve: EnergyCurve,
    guess_grid: Sequence[float] | None = None,
    window: Sequence[int] | None = None,
    grid_points: int = 401,
    refine: bool = True,
) -> ExtrapolationResult:
    """Continuum energy from the sigma-minimization fit.

    For every candidate E_guess, fit log|E - E_guess| against log(a0/a) on
    the monotone window by ordinary least squares; sigma is the standard
    error of the slope.  The returned ``e_infinity`` is the argmin-sigma
    candidate (refined once on a finer grid around the coarse optimum unless
    ``refine`` is False), with its exponent b and the full sigma curve.
    """
    if window is None:
        idx = monotone_window(curve)
    else:
        idx = np.asarray(window, dtype=int)
        if len(idx) < _MIN_WINDOW:
            raise ExtrapolationError("fit window needs at least 4 points")
    x_log = np.log(curve.ratios[idx])
    energies = curve.energies_ry[idx]

    if guess_grid is None:
        center = float(np.min(curve.energies_ry))
        guess_grid = _guess_grid(center, 0.05 * abs(center), grid_points)
    guess_grid = np.asarray(guess_grid, dtype=float)
    if len(guess_grid) < 3:
        raise ExtrapolationError("guess grid needs at least 3 candidates")

    def sweep(grid):
        sig = []
        for e in grid:
            fit = _fit_candidate(x_log, energies, e)
            if fit is not None:
                sig.append((float(e), float(fit[1]), float(fit[0]), fit[2]))
        return sig

    sig = sweep(guess_grid)
    if not sig:
        raise ExtrapolationError(
            "every E_guess candidate was sign-inconsistent on the fit window"
        )
    best = min(sig, key=lambda t: t[1])
    i_best = [t[0] for t in sig].index(best[0])
    if i_best in (0, len(sig) - 1):
        raise ExtrapolationError(
            f"sigma minimum sits on the guess-grid boundary (E={best[0]:.6g}); "
            "widen the grid"
        )
    sigma_curve = [(e, s) for e, s, _, _ in sig]

    if refine:
        step = abs(guess_grid[1] - guess_grid[0])
        fine = _guess_grid(best[0], 2.0 * step, len(guess_grid))
        fine_sig = sweep(fine)
        if fine_sig:
            fb = min(fine_sig, key=lambda t: t[1])
            j = [t[0] for t in fine_sig].index(fb[0])
            if j not in (0, len(fine_sig) - 1):
                best = fb

    return ExtrapolationResult(
        e_infinity=best[0],
        exponent_b=best[2],
        sigma_curve=sigma_curve,
        fit_window=idx,
        coefficient_c=best[3],
    )
