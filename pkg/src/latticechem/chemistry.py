"""Two-electron effective Hamiltonians (He, HeH+) in a projected orbital basis.

The two-electron problem on N = n_side**3 sites is projected onto a small
orthonormal orbital set combining (i) the lowest single-electron eigenstates
of the bare nuclear problem and (ii) mean-field orbitals whose electrons see
the smoothed charge of the previously converged lowest orbital.  The
projected tensor

    h[i,j,r,s] = <phi_i phi_j| H1 x 1 + 1 x H1 + V_ee |phi_r phi_s>

is assembled with one FFT convolution per (i, r) pair density, and the
spatially symmetric (para) / antisymmetric (ortho) sectors are reduced to
small dense matrices whose lowest eigenvalues are the reported energies.

The density-density repulsion kernel is V0*a/|n-m| between distinct sites;
its same-site value (only reachable by opposite spins, i.e. the para
sector) is regularized to V0*a/a_reg with a_reg one lattice constant by
default, exposed as a knob.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import fft as _fft

from .eigensolver import Eigenpairs, lowest_eigenpairs
from .lattice import (
    LatticeGeometry,
    NucleusSpec,
    PotentialField,
    SimulationUnits,
    SparseHamiltonian,
    assemble_single_particle,
    build_kinetic,
    build_nuclear_potential,
    units_from_hopping,
)
from .mitigation import EnergyCurve, ExtrapolationError, extrapolate

_GRAM_TOL = 1e-10
_DUP_TOL = 1e-6


class CoulombKernel:
    """Translation-invariant pair repulsion V0*a/|d| with regularized d = 0.

    Holds the kernel on the displacement grid and its rFFT on the padded
    shape so convolutions against site densities are one transform pair.
    """

    def __init__(self, geom: LatticeGeometry, v0: float, same_site_scale: float = 1.0):
        if v0 < 0:
            raise ValueError("v0 must be >= 0")
        self.geom = geom
        self.v0 = float(v0)
        self.same_site_scale = float(same_site_scale)
        n = geom.n_side
        d = np.arange(-(n - 1), n)
        dist = np.sqrt(
            d[:, None, None] ** 2 + d[None, :, None] ** 2 + d[None, None, :] ** 2
        )
        with np.errstate(divide="ignore"):
            vals = np.where(dist > 0, v0 / np.where(dist > 0, dist, 1.0), 0.0)
        vals[n - 1, n - 1, n - 1] = v0 * same_site_scale
        self._pad = _fft.next_fast_len(2 * n - 1, real=True)
        kern = np.zeros((self._pad,) * 3)
        idx = (d + self._pad) % self._pad
        kern[np.ix_(idx, idx, idx)] = vals
        self._kernel_hat = _fft.rfftn(kern)
        self._disp_vals = vals

    def value(self, displacement: Sequence[int]) -> float:
        n = self.geom.n_side
        return float(self._disp_vals[tuple(int(c) + n - 1 for c in displacement)])

    def convolve(self, density: np.ndarray) -> np.ndarray:
        """W(m) = sum_n density(n) * kernel(n - m) over the open lattice."""
        n = self.geom.n_side
        rho = density.reshape((n, n, n))
        pad = self._pad
        rho_hat = _fft.rfftn(rho, s=(pad,) * 3)
        out = _fft.irfftn(rho_hat * self._kernel_hat, s=(pad,) * 3)
        return out[:n, :n, :n].reshape(-1)


@dataclass
class OrbitalBasis:
    """Column-stacked real orbitals over the lattice with provenance tags."""

    geom: LatticeGeometry
    orbitals: np.ndarray  # (N, n)
    provenance: list[str]
    converged: bool = True
    dropped: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.orbitals = np.asarray(self.orbitals, dtype=float)
        if self.orbitals.ndim != 2 or self.orbitals.shape[0] != self.geom.n_sites:
            raise ValueError("orbitals must be (n_sites, n) column-stacked")
        if self.orbitals.shape[1] != len(self.provenance):
            raise ValueError("one provenance tag per orbital required")

    @property
    def n_orbitals(self) -> int:
        return self.orbitals.shape[1]

    def gram(self) -> np.ndarray:
        return self.orbitals.T @ self.orbitals


def single_particle_orbitals(
    h1: SparseHamiltonian, n: int, tol: float = 1e-8, seed: int = 0
) -> OrbitalBasis:
    """Lowest-n eigenvectors of the single-particle Hamiltonian."""
    ep = lowest_eigenpairs(h1, k=n, tol=tol, seed=seed)
    return OrbitalBasis(
        geom=h1.geom,
        orbitals=ep.vectors,
        provenance=[f"single-electron:{i}" for i in range(n)],
    )


def hf_orbitals(
    h1: SparseHamiltonian,
    kernel: CoulombKernel,
    n: int,
    iters: int = 10,
    energy_tol_ry: float = 1e-8,
    units: SimulationUnits | None = None,
    tol: float = 1e-8,
    seed: int = 0,
) -> OrbitalBasis:
    """Mean-field orbitals: each electron sees the smoothed charge of the
    previous iteration's lowest orbital.

    The loop diagonalizes h1 + V_mf, V_mf(j) = sum_m kernel(j-m) rho(m),
    starting from the bare ground orbital, and stops early once the lowest
    orbital energy moves by less than ``energy_tol_ry`` (in Ry when units
    are given, in hopping units otherwise).  If the loop exhausts its
    iterations the last iterate is returned with ``converged`` cleared.
    """
    if iters < 1:
        raise ValueError("need at least one mean-field iteration")
    scale = units.ry if units is not None else 1.0
    ep = lowest_eigenpairs(h1, k=1, tol=tol, seed=seed)
    rho = ep.vectors[:, 0] ** 2
    e_prev = ep.values[0]
    h_mf = None
    converged = False
    v0_warm = ep.vectors[:, 0]
    import scipy.sparse as sp

    for _ in range(iters):
        v_mf = kernel.convolve(rho)
        h_mf = SparseHamiltonian(h1.geom, h1.matrix + sp.diags(v_mf))
        ep = lowest_eigenpairs(h_mf, k=1, tol=tol, seed=seed, v0=v0_warm)
        rho = ep.vectors[:, 0] ** 2
        v0_warm = ep.vectors[:, 0]
        if abs(ep.values[0] - e_prev) / scale < energy_tol_ry:
            converged = True
            break
        e_prev = ep.values[0]
    ep_n = lowest_eigenpairs(h_mf, k=n, tol=tol, seed=seed)
    return OrbitalBasis(
        geom=h1.geom,
        orbitals=ep_n.vectors,
        provenance=[f"mean-field:{i}" for i in range(n)],
        converged=converged,
    )


def orthonormalize(bases: Sequence[OrbitalBasis], drop_tol: float = _DUP_TOL) -> OrbitalBasis:
    """Gram-Schmidt over the concatenated bases in listed order.

    Vectors whose residual after projection has norm below ``drop_tol`` are
    near-duplicates and dropped; their input indices are reported in
    ``dropped``.
    """
    if not bases:
        raise ValueError("need at least one input basis")
    geom = bases[0].geom
    cols = np.hstack([b.orbitals for b in bases])
    tags = [t for b in bases for t in b.provenance]
    kept: list[np.ndarray] = []
    kept_tags: list[str] = []
    dropped: list[int] = []
    for i in range(cols.shape[1]):
        v = cols[:, i].copy()
        for _ in range(2):  # second pass controls roundoff
            for u in kept:
                v -= u.dot(v) * u
        nrm = np.linalg.norm(v)
        if nrm < drop_tol:
            dropped.append(i)
            continue
        kept.append(v / nrm)
        kept_tags.append(tags[i])
    if not kept:
        raise ValueError("all input orbitals were dropped as duplicates")
    return OrbitalBasis(
        geom=geom,
        orbitals=np.column_stack(kept),
        provenance=kept_tags,
        dropped=dropped,
    )


@dataclass
class ProjectedHamiltonian:
    """Two-electron tensor h[i,j,r,s] and its para/ortho sector matrices."""

    tensor: np.ndarray
    para_matrix: np.ndarray
    ortho_matrix: np.ndarray
    para_pairs: list[tuple[int, int]]
    ortho_pairs: list[tuple[int, int]]
    units: SimulationUnits

    @property
    def n_orbitals(self) -> int:
        return self.tensor.shape[0]


def project_two_body(
    basis: OrbitalBasis,
    h1: SparseHamiltonian,
    kernel: CoulombKernel,
    units: SimulationUnits,
) -> ProjectedHamiltonian:
    """Project the two-electron Hamiltonian onto the orbital basis.

    One-body parts enter as <i|h1|r> delta_js + <j|h1|s> delta_ir; the
    two-body tensor is sum_{n,m} rho_ir(n) kernel(n-m) rho_js(m), assembled
    from one convolution per (i <= r) pair density and a single dense
    contraction.  The identity h[i,j,r,s] = h[j,i,s,r] holds by
    construction.
    """
    phi = basis.orbitals
    n_orb = phi.shape[1]
    gram_err = np.max(np.abs(basis.gram() - np.eye(n_orb)))
    if gram_err > 1e-8:
        raise ValueError(f"basis not orthonormal (gram error {gram_err:.2e})")
    if phi.shape[0] != h1.dimension:
        raise ValueError("basis/operator dimension mismatch")

    h1_mat = phi.T @ (h1.matrix @ phi)
    pairs = [(i, r) for i in range(n_orb) for r in range(i, n_orb)]
    pair_index = np.zeros((n_orb, n_orb), dtype=int)
    for k, (i, r) in enumerate(pairs):
        pair_index[i, r] = pair_index[r, i] = k

    dens = np.empty((len(pairs), phi.shape[0]))
    conv = np.empty_like(dens)
    for k, (i, r) in enumerate(pairs):
        dens[k] = phi[:, i] * phi[:, r]
        conv[k] = kernel.convolve(dens[k])
    v2 = conv @ dens.T
    v2 = 0.5 * (v2 + v2.T)  # exact symmetry of the pair-pair matrix

    tensor = v2[pair_index[:, :, None, None], pair_index[None, None, :, :]]
    tensor = np.transpose(tensor, (0, 2, 1, 3))  # [(i,r),(j,s)] -> [i,j,r,s]
    eye = np.eye(n_orb)
    tensor = tensor + np.einsum("ir,js->ijrs", h1_mat, eye) \
        + np.einsum("js,ir->ijrs", h1_mat, eye)

    para_pairs = [(i, j) for i in range(n_orb) for j in range(i, n_orb)]
    ortho_pairs = [(i, j) for i in range(n_orb) for j in range(i + 1, n_orb)]

    def sector(pairs_list, sign):
        m = len(pairs_list)
        out = np.empty((m, m))
        for a, (i, j) in enumerate(pairs_list):
            na = np.sqrt(2.0 * (1.0 + (1.0 if i == j else 0.0)))
            for b, (r, s) in enumerate(pairs_list):
                nb = np.sqrt(2.0 * (1.0 + (1.0 if r == s else 0.0)))
                val = (
                    tensor[i, j, r, s] + sign * tensor[i, j, s, r]
                    + sign * tensor[j, i, r, s] + tensor[j, i, s, r]
                )
                out[a, b] = val / (na * nb)
        return 0.5 * (out + out.T)

    return ProjectedHamiltonian(
        tensor=tensor,
        para_matrix=sector(para_pairs, +1.0),
        ortho_matrix=sector(ortho_pairs, -1.0),
        para_pairs=para_pairs,
        ortho_pairs=ortho_pairs,
        units=units,
    )


def ground_energy(proj: ProjectedHamiltonian, sector: str) -> float:
    """Lowest eigenvalue of the chosen symmetry sector, in Ry
    (band-bottom referenced, two electrons)."""
    if sector == "para":
        mat = proj.para_matrix
    elif sector == "ortho":
        mat = proj.ortho_matrix
    else:
        raise ValueError("sector must be 'para' or 'ortho'")
    val = float(np.linalg.eigvalsh(mat)[0])
    return float(proj.units.to_ry(val, n_electrons=2))


@dataclass
class TwoElectronResult:
    bohr_ratio: float
    e_para_ry: float
    e_ortho_ry: float
    n_orbitals: int


def two_electron_ground(
    geom: LatticeGeometry,
    nuclei: Sequence[NucleusSpec],
    bohr_ratio: float,
    n_single: int = 8,
    n_mean_field: int = 8,
    mf_iters: int = 10,
    same_site_scale: float = 1.0,
    tol: float = 1e-8,
    seed: int = 0,
) -> TwoElectronResult:
    """Full pipeline at one effective Bohr radius: orbitals, projection,
    sector ground energies (Ry)."""
    t_f = 1.0
    units = units_from_hopping(t_f, 2.0 * t_f / bohr_ratio)
    kin = build_kinetic(geom, t_f)
    pot = build_nuclear_potential(geom, nuclei, units.v0)
    h1 = assemble_single_particle(kin, pot)
    kernel = CoulombKernel(geom, units.v0, same_site_scale=same_site_scale)
    b1 = single_particle_orbitals(h1, n_single, tol=tol, seed=seed)
    b2 = hf_orbitals(h1, kernel, n_mean_field, iters=mf_iters, units=units,
                     tol=tol, seed=seed)
    basis = orthonormalize([b1, b2])
    proj = project_two_body(basis, h1, kernel, units)
    return TwoElectronResult(
        bohr_ratio=bohr_ratio,
        e_para_ry=ground_energy(proj, "para"),
        e_ortho_ry=ground_energy(proj, "ortho"),
        n_orbitals=basis.n_orbitals,
    )


@dataclass
class MolecularCurve:
    """Total molecular energies (electronic + nuclear repulsion) vs d/a0."""

    separations_a0: np.ndarray
    energies_ry: np.ndarray
    minimum: tuple[float, float]

    def __post_init__(self):
        self.separations_a0 = np.asarray(self.separations_a0, dtype=float)
        self.energies_ry = np.asarray(self.energies_ry, dtype=float)


def _interpolated_minimum(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Quadratic interpolation through the bracketing triple of the minimum."""
    i = int(np.argmin(y))
    if i in (0, len(y) - 1):
        return float(x[i]), float(y[i])
    c = np.polyfit(x[i - 1 : i + 2], y[i - 1 : i + 2], 2)
    xm = -c[1] / (2 * c[0]) if c[0] > 0 else x[i]
    if not (x[i - 1] <= xm <= x[i + 1]):
        xm = x[i]
    return float(xm), float(np.polyval(c, xm))


def _nuclei_for_separation(geom: LatticeGeometry, d_sites: int,
                           z1: float, z2: float) -> list[NucleusSpec]:
    n = geom.n_side
    cy = (n - 1) // 2 + 0.5
    if d_sites % 2 == 0:
        cx = (n - 1) // 2 + 0.5
    else:
        cx = float((n - 1) // 2)
    x1, x2 = cx - d_sites / 2.0, cx + d_sites / 2.0
    return [NucleusSpec((x1, cy, cy), z1), NucleusSpec((x2, cy, cy), z2)]


def molecular_curve(
    z1: float,
    z2: float,
    seps_a0: Sequence[float],
    geom: LatticeGeometry,
    site_seps: Sequence[int] = (4, 6, 8, 10),
    n_single: int = 8,
    n_mean_field: int = 8,
    sector: str = "para",
    same_site_scale: float = 1.0,
    tol: float = 1e-8,
    progress=None,
) -> MolecularCurve:
    """Molecular potential over physical separations d/a0.

    For each d/a0 the integer site separation d/a is scanned (the effective
    Bohr radius a0/a = (d/a)/(d/a0) adjusts accordingly, keeping the nuclei
    half a site off the grid), the electronic energies are extrapolated to
    the continuum, and the nuclear repulsion 2*z1*z2/(d/a0) Ry is added.
    """
    if z1 <= 0:
        raise ValueError("z1 must be positive")
    energies = []
    for d_a0 in seps_a0:
        ratios, elec = [], []
        for d_sites in sorted(int(d) for d in site_seps):
            ratio = d_sites / d_a0
            nuclei = _nuclei_for_separation(geom, d_sites, z1, z2)
            if z2 <= 0:
                nuclei = nuclei[:1]
            res = two_electron_ground(
                geom, nuclei, ratio, n_single=n_single,
                n_mean_field=n_mean_field, same_site_scale=same_site_scale,
                tol=tol,
            )
            ratios.append(ratio)
            elec.append(res.e_para_ry if sector == "para" else res.e_ortho_ry)
            if progress is not None:
                progress(d_a0, d_sites, elec[-1])
        curve = EnergyCurve(np.asarray(ratios), np.asarray(elec))
        try:
            e_inf = extrapolate(curve).e_infinity
        except ExtrapolationError:
            e_inf = float(curve.energies_ry[-1])
        energies.append(e_inf + 2.0 * z1 * z2 / d_a0 if z2 > 0 else e_inf)
    seps = np.asarray(list(seps_a0), dtype=float)
    energies = np.asarray(energies)
    order = np.argsort(seps)
    seps, energies = seps[order], energies[order]
    return MolecularCurve(
        separations_a0=seps,
        energies_ry=energies,
        minimum=_interpolated_minimum(seps, energies),
    )
