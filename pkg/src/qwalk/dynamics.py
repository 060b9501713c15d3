"""Time evolution and the ballistic weak limit.

evolve applies the banded walk exactly on a window that grows by the
bandwidth per step, so no truncation error enters.  The rescaled position
x/t converges weakly; limit_law computes the limit measure from the band
data: each band contributes its group velocity Re(lambda' / (i lambda))
distributed according to the overlap of the initial state with the band's
eigenvector section.  Constant bands (and bands of constant velocity)
contribute atoms.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .decompose import Decomposition
from .spectral import BandSet
from .walkspec import WalkSpec

__all__ = [
    "State",
    "DistributionSnapshot",
    "LimitLaw",
    "MemoryCapExceeded",
    "basis_state",
    "uniform_coin_state",
    "parse_state",
    "serialize_state",
    "adjoint_walk",
    "evolve",
    "position_distribution",
    "empirical_moment",
    "to_band_coordinates",
    "limit_law",
    "kolmogorov_distance",
    "ballistic_bound_check",
    "write_distribution_csv",
]

MEM_CAP_ENV = "QWALK_MEM_CAP_MB"
DEFAULT_MEM_CAP_MB = 2048
ATOM_VELOCITY_TOL = 1e-9
HISTOGRAM_BINS = 401


class MemoryCapExceeded(RuntimeError):
    """Evolution window would outgrow the configured memory cap."""


@dataclass(frozen=True)
class State:
    """Finitely supported vector in ell_2(Z) tensor C^n.

    amplitudes[i] is the internal vector at site x_min + i.
    """

    x_min: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 2 or amps.shape[0] == 0:
            raise ValueError("amplitudes must be a non-empty (sites, n) array")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def sites(self) -> np.ndarray:
        return self.x_min + np.arange(self.amplitudes.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DistributionSnapshot:
    """Position distribution after t steps; masses sum to the state norm."""

    t: int
    sites: np.ndarray
    masses: np.ndarray

    def total_mass(self) -> float:
        return float(self.masses.sum())


def basis_state(n: int, component: int, site: int = 0) -> State:
    vec = np.zeros((1, n), dtype=complex)
    vec[0, component] = 1.0
    return State(x_min=site, amplitudes=vec)


def uniform_coin_state(n: int, site: int = 0) -> State:
    vec = np.full((1, n), 1.0 / np.sqrt(n), dtype=complex)
    return State(x_min=site, amplitudes=vec)


def parse_state(text: str) -> State:
    """Read {"entries": [{"site": x, "vector": [[re, im], ...]}, ...]}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError("state is not valid JSON: %s" % exc) from exc
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ValueError("state document needs an 'entries' list")
    entries = doc["entries"]
    if not isinstance(entries, list) or not entries:
        raise ValueError("state needs at least one entry")
    parsed = []
    n = None
    for ent in entries:
        if not isinstance(ent, dict) or "site" not in ent or "vector" not in ent:
            raise ValueError("each entry needs 'site' and 'vector'")
        site = ent["site"]
        if not isinstance(site, int) or isinstance(site, bool):
            raise ValueError("entry site must be an integer")
        vec = ent["vector"]
        if not isinstance(vec, list) or not vec:
            raise ValueError("entry vector must be a non-empty list")
        row = []
        for cell in vec:
            if (
                not isinstance(cell, list)
                or len(cell) != 2
                or not all(isinstance(u, (int, float)) for u in cell)
            ):
                raise ValueError("vector components must be [re, im] pairs")
            row.append(complex(cell[0], cell[1]))
        if n is None:
            n = len(row)
        elif len(row) != n:
            raise ValueError("entry vectors must share one length")
        parsed.append((site, row))
    sites = [s for s, _ in parsed]
    if len(set(sites)) != len(sites):
        raise ValueError("duplicate site in state entries")
    parsed.sort()
    x_min, x_max = parsed[0][0], parsed[-1][0]
    amps = np.zeros((x_max - x_min + 1, n), dtype=complex)
    for site, row in parsed:
        amps[site - x_min] = row
    return State(x_min=x_min, amplitudes=amps)


def serialize_state(state: State) -> str:
    entries = []
    for i, x in enumerate(state.sites):
        row = state.amplitudes[i]
        if np.all(row == 0):
            continue
        entries.append(
            {"site": int(x), "vector": [[z.real, z.imag] for z in row]}
        )
    return json.dumps({"entries": entries}, indent=2)


def adjoint_walk(spec: WalkSpec) -> WalkSpec:
    """The inverse walk U^*; term at shift j becomes A_{-j}^* at -j."""
    return WalkSpec(
        n=spec.n,
        terms={-j: a.conj().T for j, a in spec.terms.items()},
    )


def _mem_cap_bytes(mem_cap_mb) -> int:
    if mem_cap_mb is None:
        mem_cap_mb = int(os.environ.get(MEM_CAP_ENV, DEFAULT_MEM_CAP_MB))
    return int(mem_cap_mb) * 1024 * 1024


def evolve(spec: WalkSpec, state: State, steps: int, mem_cap_mb=None) -> State:
    """Apply the walk exactly for the given number of steps.

    Negative steps use the adjoint.  The support window grows by the
    bandwidth per step (no wrap-around, no truncation); the projected peak
    allocation is checked against QWALK_MEM_CAP_MB up front.
    """
    if state.n != spec.n:
        raise ValueError(
            "state has %d components per site, walk needs %d" % (state.n, spec.n)
        )
    if steps < 0:
        return evolve(adjoint_walk(spec), state, -steps, mem_cap_mb)
    b = spec.bandwidth
    final_sites = state.amplitudes.shape[0] + 2 * b * steps
    peak = 2 * final_sites * spec.n * 16
    cap = _mem_cap_bytes(mem_cap_mb)
    if peak > cap:
        raise MemoryCapExceeded(
            "evolution window needs about %d MB, cap is %d MB"
            % (peak // (1024 * 1024) + 1, cap // (1024 * 1024))
        )
    amps = np.asarray(state.amplitudes)
    x_min = state.x_min
    for _ in range(steps):
        sites = amps.shape[0]
        out = np.zeros((sites + 2 * b, spec.n), dtype=complex)
        for j, mat in spec.terms.items():
            lo = b + j
            out[lo : lo + sites] += amps @ mat.T
        amps = out
        x_min -= b
    return State(x_min=x_min, amplitudes=amps)


def position_distribution(state: State, t: int = 0) -> DistributionSnapshot:
    masses = np.einsum("ij,ij->i", state.amplitudes, state.amplitudes.conj()).real
    return DistributionSnapshot(t=t, sites=state.sites, masses=masses)


def empirical_moment(snapshot: DistributionSnapshot, order: int) -> float:
    """Moment of the rescaled position x/t under the snapshot."""
    if snapshot.t <= 0:
        raise ValueError("snapshot needs a positive time for rescaled moments")
    v = snapshot.sites / snapshot.t
    return float((snapshot.masses * v**order).sum())


def _state_fourier(state: State, ks: np.ndarray) -> np.ndarray:
    """psi_hat(k) = sum_x e^{ikx} psi(x) on the given grid, shape (G, n)."""
    phases = np.exp(1j * np.outer(ks, state.sites))
    return phases @ state.amplitudes


def to_band_coordinates(band_set: BandSet, state: State) -> list:
    """Overlaps of the state with every band section on the cover grid.

    Returns one (multiplicity, degree * G) array per band; entry
    [c, s G + g] is <v_c(k_g + 2 pi s), psi_hat(k_g)>.  The squared
    magnitudes divided by G sum to the squared state norm across all
    bands (the sections form a complete frame over each fiber).
    """
    G = band_set.grid_size
    ks = 2.0 * np.pi * np.arange(G) / G
    psi_hat = _state_fourier(state, ks)
    out = []
    for band in band_set.bands:
        coords = np.empty((band.multiplicity, band.degree * G), dtype=complex)
        for c in range(band.multiplicity):
            for s in range(band.degree):
                seg = slice(s * G, (s + 1) * G)
                vecs = band.eigvec_samples[c][seg]
                coords[c, seg] = np.einsum("gi,gi->g", vecs.conj(), psi_hat)
        out.append(coords)
    return out


@dataclass(frozen=True)
class LimitLaw:
    """Weak limit of x/t: atoms plus a weighted velocity sample cloud.

    The cloud (velocities, weights) is the quadrature discretization of
    the continuous part; bin_edges/bin_masses is its fixed 401-bin
    histogram over [-vmax, vmax].
    """

    atoms: tuple
    velocities: np.ndarray
    weights: np.ndarray
    bin_edges: np.ndarray
    bin_masses: np.ndarray
    vmax: float

    def total_mass(self) -> float:
        return float(self.weights.sum() + sum(m for _, m in self.atoms))

    def moment(self, order: int) -> float:
        cont = float((self.weights * self.velocities**order).sum())
        return cont + sum(m * v**order for v, m in self.atoms)


def limit_law(dec: Decomposition, state: State, bins: int = HISTOGRAM_BINS) -> LimitLaw:
    """Limit distribution of x/t for the walk started in the given state.

    Band velocities live inside [-L, L], L the commutator norm bound; the
    histogram range is padded slightly beyond it.
    """
    band_set = dec.band_set
    G = band_set.grid_size
    if state.amplitudes.shape[0] > G:
        raise ValueError(
            "state support (%d sites) exceeds the sampling grid (%d); "
            "the grid Fourier transform would alias" % (state.amplitudes.shape[0], G)
        )
    norm2 = state.norm() ** 2
    coords = to_band_coordinates(band_set, state)
    atoms = []
    vel_parts = []
    w_parts = []
    vmax = dec.commutator_bound + 0.05
    for band, co in zip(band_set.bands, coords):
        w = (np.abs(co) ** 2).sum(axis=0) / G
        mass = float(w.sum())
        if band.is_constant:
            if mass > 0:
                atoms.append((0.0, mass))
            continue
        length = band.samples.size
        freqs = band.fourier_freqs
        dsamples = np.fft.ifft(
            band.fourier * (1j * freqs / band.degree) * length
        )
        vel = (dsamples / (1j * band.samples)).real
        if np.max(np.abs(vel)) > dec.commutator_bound + 1e-6:
            raise RuntimeError(
                "internal error: band velocity exceeds the commutator bound"
            )
        if np.max(np.abs(vel - vel.mean())) < ATOM_VELOCITY_TOL:
            if mass > 0:
                atoms.append((float(vel.mean()), mass))
            continue
        vel_parts.append(vel)
        w_parts.append(w)
    velocities = np.concatenate(vel_parts) if vel_parts else np.empty(0)
    weights = np.concatenate(w_parts) if w_parts else np.empty(0)
    total = float(weights.sum() + sum(m for _, m in atoms))
    if abs(total - norm2) > 1e-8:
        raise RuntimeError(
            "internal error: limit law mass %.12f, state norm^2 %.12f"
            % (total, norm2)
        )
    # merge coincident atoms (several constant bands share velocity 0)
    merged: dict[float, float] = {}
    for v, m in atoms:
        key = round(v, 12)
        merged[key] = merged.get(key, 0.0) + m
    atom_tuple = tuple(sorted(merged.items()))
    bin_masses, bin_edges = np.histogram(
        velocities, bins=bins, range=(-vmax, vmax), weights=weights
    )
    return LimitLaw(
        atoms=atom_tuple,
        velocities=velocities,
        weights=weights,
        bin_edges=bin_edges,
        bin_masses=bin_masses,
        vmax=vmax,
    )


def kolmogorov_distance(
    law: LimitLaw, snapshot: DistributionSnapshot, atom_window: float | None = None
) -> float:
    """sup_x |F_law(x) - F_snapshot(x)| over rescaled positions x/t.

    An atom of the law is a jump the snapshot can only approximate by mass
    spread over nearby sites (the localized component keeps a fixed
    physical width, which shrinks like 1/t in x/t but never to a point).
    Snapshot mass within atom_window of an atom is therefore attributed
    to the atom and the jumps compared cumulatively; the default window
    is one histogram bin, the law's own resolution.
    """
    if snapshot.t <= 0:
        raise ValueError("snapshot needs a positive time")
    if atom_window is None:
        atom_window = float(law.bin_edges[1] - law.bin_edges[0])
    xs1 = np.concatenate([law.velocities, [v for v, _ in law.atoms]])
    ws1 = np.concatenate([law.weights, [m for _, m in law.atoms]])
    o1 = np.argsort(xs1, kind="stable")
    xs1, cum1 = xs1[o1], np.cumsum(ws1[o1])
    xs2 = np.asarray(snapshot.sites / snapshot.t, dtype=float)
    ws2 = np.array(snapshot.masses, dtype=float)
    for v, _ in law.atoms:
        near = np.abs(xs2 - v) <= atom_window
        moved = float(ws2[near].sum())
        if moved > 0.0:
            ws2 = np.concatenate([ws2[~near], [moved]])
            xs2 = np.concatenate([xs2[~near], [v]])
    o2 = np.argsort(xs2, kind="stable")
    xs2, cum2 = xs2[o2], np.cumsum(ws2[o2])
    grid = np.union1d(xs1, xs2)
    idx1 = np.searchsorted(xs1, grid, side="right")
    idx2 = np.searchsorted(xs2, grid, side="right")
    f1 = np.where(idx1 > 0, cum1[np.maximum(idx1 - 1, 0)], 0.0)
    f2 = np.where(idx2 > 0, cum2[np.maximum(idx2 - 1, 0)], 0.0)
    return float(np.max(np.abs(f1 - f2)))


@dataclass(frozen=True)
class BallisticReport:
    """Mass leaking outside the cone |x - x0| <= speed * t + width0."""

    valid: bool
    speed: float
    checkpoints: tuple
    outside_mass: tuple
    passed: bool


def ballistic_bound_check(
    spec: WalkSpec,
    state: State,
    speed: float,
    t_max: int,
    mem_cap_mb=None,
) -> BallisticReport:
    """Evolve and measure the mass escaping the ballistic cone.

    valid is False when the requested cone is slower than the commutator
    norm bound, in which case escape is not forbidden and the check
    carries no weight.  passed requires the final outside mass < 1e-3.
    """
    from .walkspec import commutator_norm

    bound = commutator_norm(spec)
    valid = speed > bound
    width0 = 0.5 * (state.amplitudes.shape[0] - 1) + 1.0
    center = state.x_min + 0.5 * (state.amplitudes.shape[0] - 1)
    checkpoints = sorted({max(t_max // 4, 1), max(t_max // 2, 1), t_max})
    cur = state
    cur_t = 0
    outside = []
    for t in checkpoints:
        cur = evolve(spec, cur, t - cur_t, mem_cap_mb)
        cur_t = t
        snap = position_distribution(cur, t)
        radius = speed * t + width0
        mask = np.abs(snap.sites - center) > radius
        outside.append(float(snap.masses[mask].sum()))
    return BallisticReport(
        valid=valid,
        speed=float(speed),
        checkpoints=tuple(checkpoints),
        outside_mass=tuple(outside),
        passed=bool(valid and outside[-1] < 1e-3),
    )


def write_distribution_csv(snapshot: DistributionSnapshot, fileobj) -> None:
    """Rows t,x,x_over_t,mass for every occupied site; zero rows are skipped."""
    fileobj.write("t,x,x_over_t,mass\n")
    t = snapshot.t
    for x, m in zip(snapshot.sites, snapshot.masses):
        if m == 0.0:
            continue
        ratio = x / t if t > 0 else 0.0
        fileobj.write("%d,%d,%.17g,%.17g\n" % (t, x, ratio, m))
