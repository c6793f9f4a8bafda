"""Grid-discretized single-particle Hamiltonians and unit conversions.

The electron lives on a cubic grid of n_side**3 sites with open (hard-wall)
boundaries.  The kinetic term is the simplest second-order finite-difference
stencil, i.e. nearest-neighbour hopping -t_f with the constant 6 t_f on-site
shift dropped; the nuclear term is the Coulomb value at each site for nuclei
pinned at half-integer coordinates (so no site ever coincides with a charge).

Simulator units: energies are carried in units of t_f and converted to
Rydbergs only when reporting, with Ry = V0**2 / (4 t_f) and the effective
Bohr radius a0/a = 2 t_f / V0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

_HALF_TOL = 1e-9


@dataclass(frozen=True)
class LatticeGeometry:
    """Cubic grid with n_side sites per axis; spacing fixed to one lattice
    constant (all lengths in units of a)."""

    n_side: int
    spacing: float = 1.0

    def __post_init__(self):
        if self.n_side < 2:
            raise ValueError(f"n_side must be >= 2, got {self.n_side}")
        if self.spacing != 1.0:
            raise ValueError("spacing is fixed to 1 lattice constant")

    @property
    def n_sites(self) -> int:
        return self.n_side**3

    def axes(self) -> np.ndarray:
        return np.arange(self.n_side, dtype=float)

    def site_index(self, ix: int, iy: int, iz: int) -> int:
        n = self.n_side
        if not (0 <= ix < n and 0 <= iy < n and 0 <= iz < n):
            raise IndexError(f"site ({ix},{iy},{iz}) outside [0,{n})^3")
        return (ix * n + iy) * n + iz

    def center(self) -> tuple[float, float, float]:
        """Half-integer point nearest the middle of the grid."""
        c = (self.n_side - 1) // 2 + 0.5
        return (c, c, c)


def _is_half_integer(x: float) -> bool:
    return abs(x - np.floor(x) - 0.5) < _HALF_TOL


@dataclass(frozen=True)
class NucleusSpec:
    """Point charge at a half-integer lattice position.

    The half-site offset keeps every site at distance >= sqrt(3)/2 from the
    charge, avoiding the Coulomb divergence.
    """

    position: tuple[float, float, float]
    charge: float

    def __post_init__(self):
        if self.charge <= 0:
            raise ValueError(f"charge must be positive, got {self.charge}")
        pos = tuple(float(x) for x in self.position)
        if len(pos) != 3:
            raise ValueError("position must be a 3-vector")
        if not all(_is_half_integer(x) for x in pos):
            raise ValueError(
                f"nucleus position {pos} must be half-integer on all axes "
                "(on-site charges diverge)"
            )
        object.__setattr__(self, "position", pos)

    def inside(self, geom: LatticeGeometry) -> bool:
        return all(-0.5 < x < geom.n_side - 0.5 for x in self.position)


@dataclass(frozen=True)
class SimulationUnits:
    """Derived atomic units of the simulator: ry = V0^2/(4 t_f), a0/a = 2 t_f/V0."""

    t_f: float
    v0: float

    def __post_init__(self):
        if self.t_f <= 0 or self.v0 <= 0:
            raise ValueError("t_f and V0 must be positive")

    @property
    def ry(self) -> float:
        return self.v0**2 / (4.0 * self.t_f)

    @property
    def bohr_ratio(self) -> float:
        return 2.0 * self.t_f / self.v0

    def to_ry(self, energy, n_electrons: int = 1) -> float | np.ndarray:
        """Convert a lattice eigenvalue to Rydbergs.

        The kinetic operator drops its constant 6 t_f on-site shift, so the
        continuum-comparable energy is (E + 6 t_f per electron) / Ry.
        """
        return (energy + 6.0 * self.t_f * n_electrons) / self.ry

    def scale_to_ry(self, energy) -> float | np.ndarray:
        """Pure unit conversion (no band-bottom reference shift)."""
        return energy / self.ry


def units_from_hopping(t_f: float, v0: float) -> SimulationUnits:
    return SimulationUnits(t_f=float(t_f), v0=float(v0))


@dataclass
class PotentialField:
    """Per-site potential values, length n_sites, simulator units."""

    geom: LatticeGeometry
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.geom.n_sites,):
            raise ValueError(
                f"expected {self.geom.n_sites} values, got shape {self.values.shape}"
            )


class SparseHamiltonian:
    """Symmetric sparse single-particle operator (hopping + on-site terms).

    Stores a CSR matrix; immutable after construction so matvec is safe to
    call concurrently on a shared instance.
    """

    def __init__(self, geom: LatticeGeometry, matrix: sp.spmatrix):
        self.geom = geom
        self.matrix = matrix.tocsr()
        if self.matrix.shape != (geom.n_sites, geom.n_sites):
            raise ValueError("matrix dimension does not match geometry")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def __matmul__(self, v):
        return self.matrix @ v


def _open_chain(n: int) -> sp.csr_matrix:
    off = np.ones(n - 1)
    return sp.diags([off, off], [-1, 1], format="csr")


def build_kinetic(geom: LatticeGeometry, t_f: float) -> SparseHamiltonian:
    """Nearest-neighbour hopping -t_f on all bonds, open boundaries, zero
    diagonal (the constant 6 t_f shift is dropped)."""
    if t_f <= 0:
        raise ValueError(f"t_f must be positive, got {t_f}")
    n = geom.n_side
    chain = _open_chain(n)
    eye = sp.identity(n, format="csr")
    hop = (
        sp.kron(sp.kron(chain, eye), eye)
        + sp.kron(sp.kron(eye, chain), eye)
        + sp.kron(sp.kron(eye, eye), chain)
    )
    return SparseHamiltonian(geom, (-t_f) * hop)


def build_nuclear_potential(
    geom: LatticeGeometry, nuclei: Iterable[NucleusSpec], v0: float
) -> PotentialField:
    """values(j) = -sum_a Z_a * V0 / |j - R_a| over every lattice site j."""
    if v0 <= 0:
        raise ValueError(f"V0 must be positive, got {v0}")
    ax = geom.axes()
    values = np.zeros((geom.n_side,) * 3)
    for nuc in nuclei:
        if not nuc.inside(geom):
            raise ValueError(f"nucleus at {nuc.position} lies outside the lattice")
        dx = ax - nuc.position[0]
        dy = ax - nuc.position[1]
        dz = ax - nuc.position[2]
        dist = np.sqrt(
            dx[:, None, None] ** 2 + dy[None, :, None] ** 2 + dz[None, None, :] ** 2
        )
        values -= nuc.charge * v0 / dist
    return PotentialField(geom, values.ravel())


def assemble_single_particle(
    kinetic: SparseHamiltonian, potential: PotentialField
) -> SparseHamiltonian:
    """Kinetic operator with the potential placed on the diagonal."""
    if kinetic.dimension != potential.values.shape[0]:
        raise ValueError(
            f"dimension mismatch: kinetic {kinetic.dimension}, "
            f"potential {potential.values.shape[0]}"
        )
    mat = kinetic.matrix + sp.diags(potential.values)
    return SparseHamiltonian(kinetic.geom, mat)


def hydrogen_like(
    geom: LatticeGeometry,
    nuclei: Sequence[NucleusSpec],
    bohr_ratio: float,
    t_f: float = 1.0,
) -> tuple[SparseHamiltonian, SimulationUnits]:
    """Assembled single-particle problem at a chosen effective Bohr radius.

    Fixes t_f and derives V0 = 2 t_f / (a0/a); the workhorse for Bohr-radius
    scans.
    """
    if bohr_ratio <= 0:
        raise ValueError("bohr_ratio must be positive")
    units = units_from_hopping(t_f, 2.0 * t_f / bohr_ratio)
    kin = build_kinetic(geom, units.t_f)
    pot = build_nuclear_potential(geom, nuclei, units.v0)
    return assemble_single_particle(kin, pot), units
