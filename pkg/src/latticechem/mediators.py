"""Bound states and effective fermion-fermion potentials for the three
mediated-repulsion schemes, with every perturbative validity inequality.

Scheme I: one mediator atom in a single band; on-site coupling U to the
fermions binds it above the band and the bound-state energy's dependence on
the fermion configuration is the induced potential (1/d**2 at short range,
Yukawa beyond L_I; strength and range both set by U/t_b).

Scheme II: two internal mediator levels; the slow level b sits at U + Delta
on fermion sites and is Raman-coupled (g) to a fast band a.  Eliminating b
exactly gives an a-band impurity problem with an energy-dependent on-site
strength, so range (L_II) and strength (V_II = g**2/(4 pi t_a)) decouple.

Scheme III: spin excitations over a Mott background plus a cavity-assisted
all-to-all term J_c/N_M that pins the mediating state to the symmetric
combination, making the induced Yukawa/Coulomb repulsion pairwise for any
fermion number.

Exact multi-fermion solutions never diagonalize the N_M-dimensional lattice:
the on-site couplings (and the rank-1 cavity term) restrict the nonlinear
eigenproblem to an (N_e+1)-dimensional matrix built from lattice Green's
functions, whose top root is tracked by bisection (the matrix derivative is
negative semidefinite, so the largest eigenvalue is monotone in energy).

Upper-edge convention throughout: dispersions are normalized to
omega_k = +2t*sum(cos), so every bound state lives above +6t and the
checkerboard phase of a t_b > 0 bare band is absorbed into the sign flag of
the dispersion (only observable as an alternating sign, never in magnitudes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._util import line_fit
from .greens import DispersionSpec, GreensTable, table_for

# Paper-printed roundings of the Watson constant 4*pi*sigma(6,0).
_LENGTH_CONST = 3.176
# Short-distance pair-potential expansion coefficients (gamma ~ 0.567).
_SHORT_C2 = 0.322
_SHORT_C1 = 0.724

_ROOT_TOL = 1e-10
_EDGE_OFFSET = 1e-9

Scheme = Literal["I", "II", "III"]


class NoBoundStateError(RuntimeError):
    """No discrete solution above the band for the given parameters."""


class MediatorError(ValueError):
    pass


@dataclass(frozen=True)
class MediatorParams:
    """Parameters of one mediated-repulsion scheme.

    Fields not used by the selected scheme are ignored; missing required
    fields raise at construction.  All energies share the hopping's units.
    """

    scheme: Scheme
    u: float
    n_side_m: int
    t_b: float | None = None
    t_a: float | None = None
    g: float | None = None
    delta: float | None = None
    j_c: float | None = None
    j_a: float | None = None
    n_e: int | None = None

    _REQUIRED = {
        "I": ("t_b",),
        "II": ("t_a", "g", "delta"),
        "III": ("j_a", "g", "delta", "j_c"),
    }

    def __post_init__(self):
        if self.scheme not in ("I", "II", "III"):
            raise MediatorError(f"unknown scheme {self.scheme!r}")
        if self.u <= 0:
            raise MediatorError("on-site coupling U must be positive")
        if self.n_side_m < 2:
            raise MediatorError("n_side_m must be >= 2")
        for name in self._REQUIRED[self.scheme]:
            if getattr(self, name) is None:
                raise MediatorError(f"scheme {self.scheme} requires {name}")
        if self.n_e is not None and not (0 < self.n_e < self.n_side_m**3):
            raise MediatorError("n_e must satisfy 0 < n_e < N_M")

    @property
    def hopping(self) -> float:
        return {"I": self.t_b, "II": self.t_a, "III": self.j_a}[self.scheme]

    @property
    def n_sites_m(self) -> int:
        return self.n_side_m**3

    def density(self, n_e: int | None = None) -> float:
        ne = n_e if n_e is not None else self.n_e
        if ne is None:
            raise MediatorError("fermion count n_e not set")
        return ne / self.n_sites_m

    def dispersion(self) -> DispersionSpec:
        return DispersionSpec(hopping=self.hopping, n_side_m=self.n_side_m, sign=1)


@dataclass(frozen=True)
class FermionConfig:
    """Distinct integer fermion positions inside the mediator lattice."""

    positions: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        pos = tuple(tuple(int(c) for c in p) for p in self.positions)
        if len(set(pos)) != len(pos):
            raise MediatorError("fermion positions must be distinct")
        if any(len(p) != 3 for p in pos):
            raise MediatorError("positions must be integer 3-vectors")
        object.__setattr__(self, "positions", pos)

    @property
    def n_e(self) -> int:
        return len(self.positions)

    def displacements(self) -> np.ndarray:
        p = np.asarray(self.positions)
        return p[:, None, :] - p[None, :, :]

    def pair_distances(self) -> np.ndarray:
        d = self.displacements()
        return np.sqrt(np.sum(d.astype(float) ** 2, axis=-1))


@dataclass
class BoundStateSolution:
    energy: float
    wavefunction_samples: dict[int, float]
    fitted_length: float
    analytic_length: float
    franck_condon: float
    symmetric: bool = True
    energy_length: float | None = None  # a*(E/t - 6)^(-1/2), scheme II/III


@dataclass
class EffectivePotential:
    samples: dict[int, float]
    strength: float
    length: float
    analytic_short: dict[int, float] = field(default_factory=dict)
    analytic_long: dict[int, float] = field(default_factory=dict)
    e2_total: float | None = None
    e2_single: float | None = None


@dataclass
class ValidityEntry:
    condition: str
    lhs: float
    threshold: float

    @property
    def satisfied(self) -> bool:
        return self.lhs < self.threshold

    @property
    def margin(self) -> float:
        return self.threshold / self.lhs if self.lhs > 0 else float("inf")


@dataclass
class ValidityReport:
    scheme: Scheme
    entries: list[ValidityEntry]
    g_config: float

    def all_satisfied(self, margin: float = 1.0) -> bool:
        return all(e.lhs * margin < e.threshold for e in self.entries)

    def entry(self, condition: str) -> ValidityEntry:
        for e in self.entries:
            if e.condition == condition:
                return e
        raise KeyError(condition)


@dataclass
class PopulationReport:
    eta: float
    w: float
    per_site: dict[tuple[int, int, int], float]


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _root_decreasing(f, lo: float, hi: float, tol: float = _ROOT_TOL) -> float:
    """Root of a strictly decreasing f with f(lo) > 0 > f(hi).

    Bisection to bracket down to ~1e3*tol, then secant polish; the bisection
    bracket is kept as a safety net for the secant steps.
    """
    flo, fhi = f(lo), f(hi)
    if flo < 0:
        raise NoBoundStateError(
            f"no solution above the band edge (f({lo}) = {flo:.3g} < 0)"
        )
    if fhi > 0:
        raise NoBoundStateError(f"bracket too small: f({hi}) = {fhi:.3g} > 0")
    a, b, fa, fb = lo, hi, flo, fhi
    while b - a > 1e3 * tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm > 0:
            a, fa = m, fm
        else:
            b, fb = m, fm
    x0, x1, f0, f1 = a, b, fa, fb
    for _ in range(60):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (a <= x2 <= b):
            x2 = 0.5 * (a + b)
        f2 = f(x2)
        if f2 > 0:
            a = x2
        else:
            b = x2
        x0, f0, x1, f1 = x1, f1, x2, f2
        if abs(x1 - x0) < tol:
            break
    return x1


def _grow_bracket(f, lo: float, step: float, max_doublings: int = 60) -> float:
    hi = lo + step
    for _ in range(max_doublings):
        if f(hi) < 0:
            return hi
        hi = lo + 2 * (hi - lo)
    raise NoBoundStateError("could not bracket the bound-state root from above")


# ---------------------------------------------------------------------------
# wavefunction length fitting
# ---------------------------------------------------------------------------

def fit_decay_length(axis_samples: np.ndarray, length_hint: float,
                     n_side: int) -> float:
    """Yukawa decay length from log(r*|psi(r)|) regressed on r.

    Window r in [2, min(length_hint*ln(10), n_side/4)], excluding the
    lattice-scale core and the boundary-contaminated tail; extended to at
    least three points when the hint is very short.
    """
    hi = min(length_hint * np.log(10.0), n_side / 4.0)
    lo = 2
    if hi < lo + 2:
        hi = lo + 2
    hi = min(int(np.floor(hi)), len(axis_samples) - 1)
    r = np.arange(lo, hi + 1)
    vals = np.abs(axis_samples[lo : hi + 1])
    if np.any(vals == 0):
        raise MediatorError("wavefunction vanishes inside the fit window")
    slope, _, _ = line_fit(r.astype(float), np.log(r * vals))
    if slope >= 0:
        raise MediatorError("wavefunction does not decay over the fit window")
    return -1.0 / slope


def _axis_cut(psi_map: np.ndarray, origin=(0, 0, 0)) -> np.ndarray:
    n = psi_map.shape[0]
    idx = (np.arange(n // 2 + 1) + origin[0]) % n
    return psi_map[idx, origin[1] % n, origin[2] % n]


# ---------------------------------------------------------------------------
# Scheme I
# ---------------------------------------------------------------------------

def scheme1_analytic_length(u: float, t_b: float) -> float:
    """L_I/a = [3.176 - 4 pi t_b/U]^(-1), leading order in t_b/U."""
    denom = _LENGTH_CONST - 4.0 * np.pi * t_b / u
    if denom <= 0:
        raise NoBoundStateError(
            f"U/t_b = {u / t_b:.4g} below the binding threshold (~3.957)"
        )
    return 1.0 / denom


def scheme1_single_bound_state(
    params: MediatorParams, j0: Sequence[int] = (0, 0, 0)
) -> BoundStateSolution:
    """Mediator bound state around one fermion: root of U^-1 = sigma(E, 0).

    Returns the exact lattice energy, the wavefunction cut along +x from the
    fermion, the decay length fitted from it, the leading-order analytic
    length, and the Franck-Condon estimate exp(-a/L_I).
    """
    if params.scheme != "I":
        raise MediatorError("scheme I parameters required")
    tab = table_for(params.dispersion())
    t = params.t_b
    edge = 6.0 * t

    def f(e):
        return tab.sigma(e) - 1.0 / params.u

    lo = edge + _EDGE_OFFSET * t
    hi = _grow_bracket(f, edge, max(50.0 * t, 2.0 * params.u))
    energy = _root_decreasing(f, lo, hi, tol=_ROOT_TOL * t)

    norm = tab.g(energy)
    psi_map = tab.sigma_map(energy) / np.sqrt(norm)
    cut = _axis_cut(psi_map, j0)
    l_ana = scheme1_analytic_length(params.u, t)
    l_fit = fit_decay_length(cut, l_ana, params.n_side_m)
    samples = {int(r): float(cut[r]) for r in range(len(cut))}
    return BoundStateSolution(
        energy=energy,
        wavefunction_samples=samples,
        fitted_length=l_fit,
        analytic_length=l_ana,
        franck_condon=float(np.exp(-1.0 / l_ana)),
    )


def scheme1_pair_potential(
    params: MediatorParams, separations: Sequence[int]
) -> EffectivePotential:
    """V_I(d) = E_+(d) - E_B from U^-1 = sigma(E,0) + sigma(E,d).

    The two analytic branches are returned alongside: the short-distance
    expansion t_b*(0.322 a^2/d^2 + 0.724 a^2/(d L_I)) and the Yukawa tail
    (2 a^2 t_b/(d L_I)) exp(-d/L_I).
    """
    if params.scheme != "I":
        raise MediatorError("scheme I parameters required")
    if any(int(d) < 1 for d in separations):
        raise MediatorError("separations must be >= 1 site")
    tab = table_for(params.dispersion())
    t = params.t_b
    edge = 6.0 * t
    e_single = scheme1_single_bound_state(params).energy
    l_ana = scheme1_analytic_length(params.u, t)

    samples, short, long_ = {}, {}, {}
    for d in sorted(int(d) for d in separations):
        r = (d, 0, 0)

        def f(e):
            return tab.sigma(e) + tab.sigma(e, r) - 1.0 / params.u

        lo = edge + _EDGE_OFFSET * t
        hi = _grow_bracket(f, edge, max(50.0 * t, 2.0 * params.u))
        e_pair = _root_decreasing(f, lo, hi, tol=_ROOT_TOL * t)
        samples[d] = e_pair - e_single
        short[d] = t * (_SHORT_C2 / d**2 + _SHORT_C1 / (d * l_ana))
        long_[d] = 2.0 * t / (d * l_ana) * np.exp(-d / l_ana)
    return EffectivePotential(
        samples=samples,
        strength=2.0 * t / l_ana,
        length=l_ana,
        analytic_short=short,
        analytic_long=long_,
    )


def scheme1_antisymmetric_energy(params: MediatorParams, d: int) -> float:
    """Energy of the antisymmetric two-fermion state (when it binds)."""
    tab = table_for(params.dispersion())
    t = params.t_b
    edge = 6.0 * t
    r = (int(d), 0, 0)

    def f(e):
        return tab.sigma(e) - tab.sigma(e, r) - 1.0 / params.u

    lo = edge + _EDGE_OFFSET * t
    hi = _grow_bracket(f, edge, max(50.0 * t, 2.0 * params.u))
    return _root_decreasing(f, lo, hi, tol=_ROOT_TOL * t)


# ---------------------------------------------------------------------------
# exact multi-fermion impurity problem (schemes I and III)
# ---------------------------------------------------------------------------

def _scheme3_hybrid_top(params: MediatorParams, omega_extrema=(-6.0, 6.0)) -> float:
    """Top of the upper hybridized (A,B) band."""
    best = -np.inf
    for w in omega_extrema:
        ww = w * params.j_a
        root = 0.5 * (
            (params.delta + ww)
            + np.sqrt((params.delta - ww) ** 2 + 4.0 * params.g**2)
        )
        best = max(best, root)
    return best


def _scheme3_matrix(params: MediatorParams, tab: GreensTable,
                    config: FermionConfig, e: float) -> np.ndarray:
    """Symmetrized (N_e+1) x (N_e+1) resolvent matrix whose top eigenvalue
    crosses 1 at the dressed bound state."""
    n_e = config.n_e
    nm = params.n_sites_m
    omega = tab._omega
    dk = e - params.delta - params.g**2 / (e - omega)
    if np.any(dk <= 0):
        raise MediatorError("energy not above the hybridized band")
    d0 = dk.flat[0]  # k = 0 entry
    disp = config.displacements()
    b = np.empty((n_e + 1, n_e + 1))
    inv = 1.0 / dk
    for i in range(n_e):
        for j in range(i, n_e):
            r = tuple(disp[i, j])
            val = float(np.mean(tab._cos_kr(r) * inv)) if any(r) else float(np.mean(inv))
            b[i, j] = b[j, i] = val
    b[:n_e, n_e] = b[n_e, :n_e] = 1.0 / (np.sqrt(nm) * d0)
    b[n_e, n_e] = 1.0 / d0
    w = np.sqrt(np.concatenate([np.full(n_e, params.u), [max(params.j_c, 0.0)]]))
    return b * w[:, None] * w[None, :]


def _scheme1_matrix(params: MediatorParams, tab: GreensTable,
                    config: FermionConfig, e: float) -> np.ndarray:
    n_e = config.n_e
    disp = config.displacements()
    s = np.empty((n_e, n_e))
    for i in range(n_e):
        for j in range(i, n_e):
            s[i, j] = s[j, i] = tab.sigma(e, tuple(disp[i, j]))
    return params.u * s


def impurity_bound_state(
    params: MediatorParams, config: FermionConfig
) -> tuple[BoundStateSolution, PopulationReport]:
    """Exact top bound state of the N_e-fermion impurity problem.

    The on-site couplings (and, for scheme III, the rank-1 cavity term)
    reduce the nonlinear eigenproblem to the (N_e+1)-dimensional matrix
    condition mu_max(M(E)) = 1 on the resolvent restricted to the
    configuration sites; the root is the largest solution.  Populations of
    the mediating excitation are reconstructed on the full lattice from the
    root eigenvector, and eta is the population at the first configured site
    over the mean population at the others (callers put the apex first).
    """
    if config.n_e < 2:
        raise MediatorError("impurity problem needs N_e >= 2 fermions")
    if params.scheme == "II":
        raise MediatorError("multi-fermion solver covers schemes I and III")
    tab = table_for(params.dispersion())
    t = params.hopping

    if params.scheme == "I":
        lo = 6.0 * t + _EDGE_OFFSET * t

        def mu(e):
            return float(np.linalg.eigvalsh(_scheme1_matrix(params, tab, config, e))[-1])
    else:
        pcfg = params if params.n_e == config.n_e else MediatorParams(
            scheme="III", u=params.u, n_side_m=params.n_side_m, j_a=params.j_a,
            g=params.g, delta=params.delta, j_c=params.j_c, n_e=config.n_e,
        )
        params = pcfg
        lo = _scheme3_hybrid_top(params) + _EDGE_OFFSET * t

        def mu(e):
            return float(np.linalg.eigvalsh(_scheme3_matrix(params, tab, config, e))[-1])

    def f(e):
        return mu(e) - 1.0

    span = max(50.0 * t, 2.0 * params.u, 2.0 * (params.j_c or 0.0),
               2.0 * abs((params.delta or 0.0) + params.u))
    hi = _grow_bracket(f, lo, span)
    energy = _root_decreasing(f, lo + 0.0, hi, tol=_ROOT_TOL * t)

    n = params.n_side_m
    sites = config.positions
    if params.scheme == "I":
        m = _scheme1_matrix(params, tab, config, energy)
        vals, vecs = np.linalg.eigh(m)
        v = vecs[:, -1]
        kernel = tab.sigma_map(energy)
        psi = np.zeros((n, n, n))
        for w_i, s_i in zip(params.u * v, sites):
            psi += w_i * np.roll(kernel, shift=s_i, axis=(0, 1, 2))
        psi /= np.linalg.norm(psi)
        pops = {s_i: float(psi[s_i[0] % n, s_i[1] % n, s_i[2] % n] ** 2) for s_i in sites}
        w_sites = float(sum(pops.values()))
        cut = np.abs(_axis_cut(psi, sites[0]))
        l_hint = scheme1_analytic_length(params.u, t)
    else:
        m = _scheme3_matrix(params, tab, config, energy)
        vals, vecs = np.linalg.eigh(m)
        y = vecs[:, -1]
        # eigenvector of the symmetrized matrix is W^(1/2)(v, w); source
        # weights U*v_s and J_c*w become sqrt(U)*y_s and sqrt(J_c)*y_w
        omega = tab._omega
        dk = energy - params.delta - params.g**2 / (energy - omega)
        from scipy import fft as _fft

        x = np.zeros((n, n, n))
        for w_i, s_i in zip(np.sqrt(params.u) * y[:-1], sites):
            x[s_i[0] % n, s_i[1] % n, s_i[2] % n] += w_i
        x += np.sqrt(max(params.j_c, 0.0)) * y[-1] / np.sqrt(params.n_sites_m)
        psi_b_k = _fft.fftn(x) / dk
        psi_a_k = params.g * psi_b_k / (energy - omega)
        psi_b = np.real(_fft.ifftn(psi_b_k))
        psi_a = np.real(_fft.ifftn(psi_a_k))
        norm = np.sqrt(np.sum(psi_a**2) + np.sum(psi_b**2))
        psi_a /= norm
        psi_b /= norm
        a_total = float(np.sum(psi_a**2))
        pops = {
            s_i: float(psi_a[s_i[0] % n, s_i[1] % n, s_i[2] % n] ** 2 / a_total)
            for s_i in sites
        }
        w_sites = float(sum(pops.values()))
        psi = psi_a / np.sqrt(a_total)
        cut = np.abs(_axis_cut(psi, sites[0]))
        e1 = params.u + params.delta + params.density(config.n_e) * params.j_c
        l_hint = scheme3_length(e1, params.j_a)

    p_first = pops[sites[0]]
    p_rest = np.mean([pops[s] for s in sites[1:]])
    eta = p_first / p_rest if p_rest > 0 else float("inf")

    try:
        l_fit = fit_decay_length(cut, l_hint, n)
    except MediatorError:
        l_fit = float("nan")
    samples = {int(r): float(cut[r]) for r in range(min(len(cut), n // 2 + 1))}
    sol = BoundStateSolution(
        energy=energy,
        wavefunction_samples=samples,
        fitted_length=l_fit,
        analytic_length=l_hint,
        franck_condon=float(np.exp(-1.0 / l_hint)),
        energy_length=float((max(energy / t - 6.0, 0.0)) ** -0.5)
        if energy / t > 6.0 else None,
    )
    return sol, PopulationReport(eta=eta, w=w_sites, per_site=pops)


# ---------------------------------------------------------------------------
# Scheme II
# ---------------------------------------------------------------------------

def scheme2_bound_length(params: MediatorParams) -> BoundStateSolution:
    """Exact two-band single-impurity bound state with t_b = 0.

    The local b level folds into an a-band self-energy: on-site strength
    W(E) = g^2 [1/(E-Delta-U) - 1/(E-Delta)] at the fermion site plus the
    uniform g^2/(E-Delta) shifting the effective band, so the condition is
    1/W(E) = sigma_a(z, 0) at the shifted energy z = E - g^2/(E-Delta).

    Returns the fitted a-bath decay length, the state-energy length
    a (E/t_a - 6)^(-1/2), and the leading-order L_II^(0) from E0 = U+Delta.
    """
    if params.scheme != "II":
        raise MediatorError("scheme II parameters required")
    t, g, delta, u = params.t_a, params.g, params.delta, params.u
    e0 = u + delta
    if e0 <= 6.0 * t:
        raise MediatorError("U + Delta must exceed the band edge 6 t_a")
    if e0 - g**2 / u <= 6.0 * t:
        raise MediatorError("parameters place the dressed state inside the a band")
    tab = table_for(params.dispersion())

    def f(e):
        z = e - g**2 / (e - delta)
        w_imp = g**2 * (1.0 / (e - delta - u) - 1.0 / (e - delta))
        return w_imp * tab.sigma(z) - 1.0

    lo = e0 + _EDGE_OFFSET * t
    hi = _grow_bracket(f, e0, max(10.0 * t, 0.5 * u))
    energy = _root_decreasing(f, lo, hi, tol=_ROOT_TOL * t)
    z = energy - g**2 / (energy - delta)

    l0 = (e0 / t - 6.0) ** -0.5
    l_energy = (energy / t - 6.0) ** -0.5
    psi_map = tab.sigma_map(z)
    psi_map /= np.linalg.norm(psi_map)
    cut = _axis_cut(psi_map)
    l_fit = fit_decay_length(cut, l0, params.n_side_m)
    samples = {int(r): float(cut[r]) for r in range(len(cut))}
    return BoundStateSolution(
        energy=energy,
        wavefunction_samples=samples,
        fitted_length=l_fit,
        analytic_length=l0,
        franck_condon=float(np.exp(-1.0 / l0)),
        energy_length=l_energy,
    )


def scheme2_strength(params: MediatorParams) -> float:
    """V_II = g^2/(4 pi t_a)."""
    return params.g**2 / (4.0 * np.pi * params.t_a)


def scheme2_pair_potential(
    params: MediatorParams, separations: Sequence[int]
) -> EffectivePotential:
    """Exact two-fermion potential for scheme II (t_b = 0).

    Symmetric sector: 1/W(E) = sigma_a(z,0) + sigma_a(z,d); the potential is
    E_+(d) minus the single-fermion energy.
    """
    if params.scheme != "II":
        raise MediatorError("scheme II parameters required")
    t, g, delta, u = params.t_a, params.g, params.delta, params.u
    single = scheme2_bound_length(params)
    tab = table_for(params.dispersion())
    e0 = u + delta
    v2 = scheme2_strength(params)
    l0 = single.analytic_length
    samples, yuk = {}, {}
    for d in sorted(int(d) for d in separations):
        r = (d, 0, 0)

        def f(e):
            z = e - g**2 / (e - delta)
            w_imp = g**2 * (1.0 / (e - delta - u) - 1.0 / (e - delta))
            return w_imp * (tab.sigma(z) + tab.sigma(z, r)) - 1.0

        lo = e0 + _EDGE_OFFSET * t
        hi = _grow_bracket(f, e0, max(10.0 * t, 0.5 * u))
        e_pair = _root_decreasing(f, lo, hi, tol=_ROOT_TOL * t)
        samples[d] = e_pair - single.energy
        yuk[d] = v2 * np.exp(-d / l0) / d
    return EffectivePotential(
        samples=samples, strength=v2, length=l0, analytic_long=yuk
    )


# ---------------------------------------------------------------------------
# Scheme III perturbative surface
# ---------------------------------------------------------------------------

def scheme3_length(e1: float, j_a: float) -> float:
    """L_III/a = (E1/J_A - 6)^(-1/2).

    Dimensional consistency with L_I and L_II fixes the -1/2 exponent.
    """
    x = e1 / j_a - 6.0
    if x <= 0:
        raise MediatorError("E1 must lie above the A band edge")
    return x**-0.5


def scheme3_strength(params: MediatorParams, n_e: int) -> float:
    """V_III = g^2/(2 pi J_A N_e)."""
    return params.g**2 / (2.0 * np.pi * params.j_a * n_e)


def scheme3_effective_potential(
    params: MediatorParams, config: FermionConfig
) -> EffectivePotential:
    """Perturbative pairwise energy of scheme III.

    E1 = U + Delta + rho_M J_c; E2 = E2_B + V_III sum_{i<j} exp(-d/L)/d,
    with E2_B = E1 + g^2 sigma(E1, 0) on the lattice.
    """
    if params.scheme != "III":
        raise MediatorError("scheme III parameters required")
    if params.j_c >= params.u:
        raise MediatorError("validity window requires J_c < U")
    n_e = config.n_e
    rho = params.density(n_e)
    e1 = params.u + params.delta + rho * params.j_c
    length = scheme3_length(e1, params.j_a)
    v3 = scheme3_strength(params, n_e)
    tab = table_for(params.dispersion())
    e2_single = e1 + params.g**2 * tab.sigma(e1)

    dist = config.pair_distances()
    pair_sum = 0.0
    samples: dict[int, float] = {}
    for i in range(n_e):
        for j in range(i + 1, n_e):
            d = dist[i, j]
            val = v3 * np.exp(-d / length) / d
            pair_sum += val
            samples[int(round(d * 1000))] = float(val)  # keyed by mils of a
    return EffectivePotential(
        samples=samples,
        strength=v3,
        length=length,
        e2_total=e2_single + pair_sum,
        e2_single=e2_single,
    )


# ---------------------------------------------------------------------------
# configuration function G({j}) and the validity report
# ---------------------------------------------------------------------------

def config_function(config: FermionConfig) -> float:
    """G({j}) = (2 pi J_A N_e)^2 * Var[y], y_s = sum_{r != s} a/(4 pi J_A |s-r|).

    J_A cancels; G is pure geometry, zero iff all row sums y_s are equal
    (e.g. two fermions or any equidistant configuration), and bounded by
    N_e/2 - 1.
    """
    dist = config.pair_distances()
    n_e = config.n_e
    with np.errstate(divide="ignore"):
        x = np.where(dist > 0, 1.0 / (4.0 * np.pi * dist), 0.0)
    y = x.sum(axis=1)
    var = float(np.mean(y**2) - np.mean(y) ** 2)
    return (2.0 * np.pi * n_e) ** 2 * var


def _scheme1_potential_estimate(d: float, t_b: float, length: float) -> float:
    if d <= length:
        return t_b * (_SHORT_C2 / d**2 + _SHORT_C1 / (d * length))
    return 2.0 * t_b / (d * length) * np.exp(-d / length)


def validity_report(
    params: MediatorParams,
    config: FermionConfig,
    t_f: float,
    n_side_f: int,
) -> ValidityReport:
    """Numeric left-hand sides of every perturbative inequality of the scheme.

    All conditions are of the form lhs << threshold; ``satisfied`` uses a
    plain lhs < threshold, and callers needing a safety margin can use
    ``ValidityEntry.margin``.
    """
    n_e = config.n_e
    dmax = float(np.max(config.pair_distances()))
    entries: list[ValidityEntry] = []
    g_cfg = config_function(config)

    if params.scheme == "I":
        length = scheme1_analytic_length(params.u, params.t_b)
        fc = np.exp(-1.0 / length)
        v_d = _scheme1_potential_estimate(dmax, params.t_b, length)
        entries.append(ValidityEntry(
            "scale-separation", (t_f / params.t_b) * length**2, 1.0))
        entries.append(ValidityEntry(
            "antisymmetric-gap", (t_f * (1.0 - fc) / (4.0 * v_d)) ** 2, 1.0))
    elif params.scheme == "II":
        length = (max((params.u + params.delta) / params.t_a - 6.0, 1e-300)) ** -0.5
        v2 = scheme2_strength(params)
        v_d = v2 * np.exp(-dmax / length) / dmax
        entries.append(ValidityEntry("band-coupling", (t_f / params.u) ** 2, 1.0))
        entries.append(ValidityEntry(
            "antisymmetric-gap", ((1.0 / length) * t_f / (4.0 * v_d)) ** 2, 1.0))
        entries.append(ValidityEntry(
            "a-population", v2 * length / params.t_a, 1.0))
        entries.append(ValidityEntry(
            "length-consistency", (v2 / params.t_a) * length**2, 1.0))
    else:
        rho = params.density(n_e)
        e1 = params.u + params.delta + rho * params.j_c
        length = scheme3_length(e1, params.j_a)
        v3 = scheme3_strength(params, n_e)
        if params.j_c < params.u:
            eps_cav = rho * (params.j_c / (params.u - params.j_c)) ** 2
        else:
            eps_cav = float("inf")
        entries.append(ValidityEntry("cavity-leakage", eps_cav, 1.0))
        entries.append(ValidityEntry(
            "a-population",
            params.g**2 * length * n_e / (8.0 * np.pi * params.j_a**2), 1.0))
        denom = rho * params.j_c
        eps_aii = (v3 / denom) ** 2 * g_cfg if denom > 0 else (
            0.0 if g_cfg == 0 else float("inf"))
        entries.append(ValidityEntry("antisymmetric-config", eps_aii, 1.0))
        eps_f = (1.0 / (length * n_e)) * (t_f / denom) ** 2 if denom > 0 else float("inf")
        entries.append(ValidityEntry("fermion-hopping", eps_f, 1.0))
        n_f = n_side_f**3
        lhs = (v3 / 2.0 ** (1.0 / 3.0)) * (n_e - 1) ** (2.0 / 3.0) * n_e ** (4.0 / 3.0) \
            / n_f ** (1.0 / 3.0)
        entries.append(ValidityEntry(
            "homogeneous-density", lhs / ((1.0 / length) ** 2 * params.j_a), 1.0))
        entries.append(ValidityEntry("size-window-lower", n_side_f / length, 1.0))
        entries.append(ValidityEntry(
            "size-window-upper", length / params.n_side_m, 1.0))

    return ValidityReport(scheme=params.scheme, entries=entries, g_config=g_cfg)


# ---------------------------------------------------------------------------
# minimal 1D benchmark of the cavity working conditions
# ---------------------------------------------------------------------------

def _dressed_ground(h_f, u_pattern, j_c, n, nc, sigma):
    """Lowest state of the dressed manifold via block-Woodbury shift-invert.

    With the excitation index r outermost, H - sigma is block-diagonal
    (blocks h_f + U_r - sigma) apart from the cavity (J_c/n)(1 1^T x I),
    a rank-nc correction handled exactly by the Woodbury identity; ARPACK
    then runs on the resulting fast (H - sigma)^-1 operator.
    """
    lus = []
    s_acc = np.zeros((nc, nc))
    eye = np.eye(nc)
    for r in range(n):
        a_r = (h_f + sp.diags(u_pattern[r]) - sigma * sp.identity(nc)).tocsc()
        lu = spla.splu(a_r)
        lus.append(lu)
        if j_c > 0:
            s_acc += lu.solve(eye)
    if j_c > 0:
        from scipy.linalg import lu_factor, lu_solve

        cap = lu_factor((n / j_c) * eye + s_acc)

    def op_inv(x):
        y = np.empty_like(x)
        xr = x.reshape(n, nc)
        yr = y.reshape(n, nc)
        for r in range(n):
            yr[r] = lus[r].solve(xr[r])
        if j_c > 0:
            w = lu_solve(cap, yr.sum(axis=0))
            for r in range(n):
                yr[r] -= lus[r].solve(w)
        return y

    linop = spla.LinearOperator((n * nc, n * nc), matvec=op_inv, dtype=float)
    v0 = np.ones(n * nc) / np.sqrt(n * nc)
    nus, vecs = spla.eigsh(linop, k=4, which="LA", v0=v0)
    order = np.argsort(-nus)  # ascending distance above sigma
    return vecs[:, order]


@dataclass
class Minimal1DTable:
    t_f: np.ndarray
    pop_antisymmetric: np.ndarray
    pop_offsite: np.ndarray
    pop_symmetric: np.ndarray
    eps_cav_prediction: float
    rho_m: float


def minimal_1d_model(
    params: MediatorParams,
    v0: float,
    n_sites: int = 50,
    nuclei_sep: int = 8,
    t_f_list: Sequence[float] = (),
) -> Minimal1DTable:
    """Two fermions + one cavity-coupled mediator excitation on a 1D chain.

    Exact diagonalization of the dressed manifold near U: fermions hop with
    -t_f, feel two V0/d nuclear wells ``nuclei_sep`` sites apart and a
    mutual +V0/d repulsion; the excitation pays U on fermion sites and is
    stirred by the rank-one cavity term J_c/N_M.  Returns the populations of
    the antisymmetric on-fermion states (B_j1 - B_j2)/sqrt(2) and of
    off-fermion sites against t_f.
    """
    if params.j_c is None or params.j_c <= 0:
        raise MediatorError("minimal model needs a cavity strength j_c")
    if n_sites < nuclei_sep + 4:
        raise MediatorError("chain too short for the nuclei separation")
    n = int(n_sites)
    configs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    nc = len(configs)
    dim = nc * n
    if dim > 200_000:
        raise MediatorError(f"Hilbert space {dim} over the exact-diag budget")
    cidx = {c: i for i, c in enumerate(configs)}

    # nuclei at half-integer positions symmetric about the chain center
    x1 = (n - 1) / 2.0 - nuclei_sep / 2.0
    x2 = x1 + nuclei_sep
    if abs(x1 - np.floor(x1) - 0.5) > 1e-9:
        x1, x2 = x1 + 0.5, x2 + 0.5
    sites = np.arange(n, dtype=float)
    well = -v0 / np.abs(sites - x1) - v0 / np.abs(sites - x2)

    diag_f = np.array([
        well[i] + well[j] + v0 / abs(i - j) for (i, j) in configs
    ])
    rows, cols = [], []
    for (i, j), a in cidx.items():
        for (pi, pj) in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
            if 0 <= pi < n and 0 <= pj < n and pi != pj:
                b = cidx[(pi, pj) if pi < pj else (pj, pi)]
                rows.append(a)
                cols.append(b)
    hop_f = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(nc, nc)
    )
    # per-config on-site pattern, indexed (r, c): U when the excitation sits
    # on one of the two fermions
    u_pattern = np.zeros((n, nc))
    for (i, j), a in cidx.items():
        u_pattern[i, a] = params.u
        u_pattern[j, a] = params.u

    rho_m = 2.0 / n
    eps_cav = rho_m * (params.j_c / (params.u - params.j_c)) ** 2

    t_f_list = np.asarray(sorted(float(t) for t in t_f_list))
    pop_a = np.empty_like(t_f_list)
    pop_off = np.empty_like(t_f_list)
    pop_s = np.empty_like(t_f_list)
    rho_jc = rho_m * params.j_c
    for it, t_f in enumerate(t_f_list):
        h_f = sp.diags(diag_f) + (-t_f) * hop_f
        e_f_min = float(spla.eigsh(
            h_f, k=1, which="SA", v0=np.ones(nc) / np.sqrt(nc))[0][0]
        ) if t_f > 0 else float(diag_f.min())
        f_width = float(diag_f.max() - diag_f.min()) + 8.0 * t_f
        if rho_jc <= f_width:
            raise MediatorError(
                "cavity gap rho_M*J_c must exceed the fermionic bandwidth "
                f"({rho_jc:.3g} <= {f_width:.3g}) to isolate the symmetric branch"
            )
        # the symmetric dressed branch sits rho_M*J_c above the antisymmetric
        # one; aim just below its bottom
        sigma = params.u + rho_jc + e_f_min - min(0.5, rho_jc / 4.0)
        cands = _dressed_ground(h_f, u_pattern, params.j_c, n, nc, sigma)
        best = None
        for col in range(cands.shape[1]):
            psi = cands[:, col].reshape(n, nc).T  # (config, site)
            a_sum = off_sum = s_sum = 0.0
            for (i, j), a in cidx.items():
                amp_s = (psi[a, i] + psi[a, j]) / np.sqrt(2.0)
                amp_a = (psi[a, i] - psi[a, j]) / np.sqrt(2.0)
                s_sum += amp_s**2
                a_sum += amp_a**2
                off_sum += psi[a].dot(psi[a]) - psi[a, i] ** 2 - psi[a, j] ** 2
            if best is None or s_sum > best[0]:
                best = (s_sum, a_sum, off_sum)
        pop_s[it], pop_a[it], pop_off[it] = best
    return Minimal1DTable(
        t_f=t_f_list,
        pop_antisymmetric=pop_a,
        pop_offsite=pop_off,
        pop_symmetric=pop_s,
        eps_cav_prediction=eps_cav,
        rho_m=rho_m,
    )
