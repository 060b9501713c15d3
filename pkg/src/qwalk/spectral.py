"""Band structure of the walk symbol on the torus.

Eigenvalues of U_hat(k) are tracked around k in [0, 2pi) into continuous
sheets.  The permutation the sheets undergo at the seam k = 2pi groups them
into cycles; each cycle is one analytic band living on the covering torus
T_{2pi d}, d the cycle length.  Cycles whose concatenated values are
2pi d'-periodic for a divisor d' < d are folded (they weave numerically
identical copies), and bands that coincide pointwise are merged into one
band with a multiplicity.

Tracking starts at the grid point with the best-separated spectrum and
sweeps both ways, matching eigenvalues to linearly extrapolated sheet
values with an optimal assignment.  Near-degeneracies where the prediction
residual is comparable to the local gap trigger local grid refinement (up
to 4 halvings, quadratic extrapolation); if the assignment still cannot be
trusted an UnresolvedCrossing is raised with the offending k-interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur
from scipy.optimize import linear_sum_assignment
from scipy.signal import resample

from .walkspec import WalkSpec, symbol_on_grid

__all__ = [
    "Band",
    "BandSet",
    "UnresolvedCrossing",
    "NonIntegerWinding",
    "ConstantBand",
    "sample_bands",
    "monodromy",
    "minimal_period",
    "winding_number",
    "det_winding",
    "fourier_decay",
    "write_band_csv",
]

MERGE_TOL = 1e-9       # values closer than this are numerically one point
CONST_TOL = 1e-9       # constant-band detection threshold
COEF_TOL = 1e-9        # Fourier support floor for period detection
WINDING_TOL = 1e-6     # |raw winding - integer| must stay below this
AMBIG_FACTOR = 0.2     # prediction residual vs gap ratio that triggers refinement
MAX_HALVINGS = 4


class UnresolvedCrossing(RuntimeError):
    """Two bands could not be disambiguated at a near-degeneracy."""

    def __init__(self, k_lo: float, k_hi: float):
        self.k_lo = float(k_lo)
        self.k_hi = float(k_hi)
        super().__init__(
            "band assignment ambiguous on k in [%.9f, %.9f] after %d refinements"
            % (k_lo, k_hi, MAX_HALVINGS)
        )


class NonIntegerWinding(RuntimeError):
    """Argument unwrapping did not close to an integer number of turns."""


class ConstantBand(ValueError):
    """Minimal period requested for a constant band (undefined)."""


@dataclass(frozen=True)
class Band:
    """One analytic eigenvalue branch on its covering torus T_{2pi degree}.

    samples holds lambda on the uniform covering grid (length
    degree * grid_size); eigvec_samples holds one orthonormal section per
    coincident copy, shape (multiplicity, len(samples), n).  fourier are
    the coefficients of lambda in the basis e^{i ell k / degree}, numpy FFT
    ordering.
    """

    degree: int
    samples: np.ndarray
    eigvec_samples: np.ndarray
    fourier: np.ndarray
    multiplicity: int
    winding: int
    min_period: int | None
    is_constant: bool
    grid_size: int

    def __post_init__(self):
        for name in ("samples", "eigvec_samples", "fourier"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def kgrid(self) -> np.ndarray:
        """Covering-torus sample points in [0, 2pi*degree)."""
        length = self.samples.size
        return 2.0 * np.pi * self.degree * np.arange(length) / length

    @property
    def fourier_freqs(self) -> np.ndarray:
        """Integer frequency index ell per fourier entry (FFT order)."""
        length = self.fourier.size
        return np.rint(np.fft.fftfreq(length) * length).astype(int)

    def value_at(self, ktilde) -> np.ndarray:
        """Evaluate lambda anywhere on the cover via its Fourier series."""
        ktilde = np.asarray(ktilde, dtype=float)
        phases = np.exp(
            1j * np.multiply.outer(ktilde, self.fourier_freqs) / self.degree
        )
        return phases @ self.fourier

    def derivative_at(self, ktilde) -> np.ndarray:
        """d lambda / d ktilde from the Fourier series (spectral accuracy)."""
        ktilde = np.asarray(ktilde, dtype=float)
        freqs = self.fourier_freqs
        phases = np.exp(1j * np.multiply.outer(ktilde, freqs) / self.degree)
        return phases @ (1j * freqs / self.degree * self.fourier)


@dataclass(frozen=True)
class BandSet:
    """All bands of one walk, canonically ordered; sheet count equals n."""

    bands: tuple
    n: int
    grid_size: int

    def __post_init__(self):
        total = sum(b.degree * b.multiplicity for b in self.bands)
        if total != self.n:
            raise RuntimeError(
                "internal error: sheet bookkeeping %d does not match n=%d"
                % (total, self.n)
            )

    def sheet_values_at(self, k: float) -> np.ndarray:
        """Multiset (length n) of all band values over the fiber at base k."""
        out = []
        for band in self.bands:
            for s in range(band.degree):
                val = band.value_at(k + 2.0 * np.pi * s)
                out.extend([val] * band.multiplicity)
        return np.asarray(out, dtype=complex)


def _validate_grid(grid_size: int) -> None:
    if grid_size < 64 or grid_size & (grid_size - 1) != 0:
        raise ValueError("grid_size must be a power of two and at least 64")


def _eig_grid(spec: WalkSpec, ks: np.ndarray):
    # Schur of a normal matrix gives eigenvalues plus an orthonormal frame,
    # which plain eig does not guarantee inside degenerate clusters.
    mats = symbol_on_grid(spec, ks)
    vals = np.empty((ks.size, spec.n), dtype=complex)
    vecs = np.empty((ks.size, spec.n, spec.n), dtype=complex)
    for g in range(ks.size):
        t, z = schur(mats[g], output="complex")
        vals[g] = np.diagonal(t)
        vecs[g] = z
    return vals, vecs


def _eig_single(spec: WalkSpec, k: float):
    twopi = 2.0 * np.pi
    vals, vecs = _eig_grid(spec, np.array([k % twopi]))
    return vals[0], vecs[0]


def _clusters(vals: np.ndarray, tol: float):
    """Indices grouped by chained closeness on the unit circle."""
    order = np.argsort(np.angle(vals), kind="stable")
    groups = [[int(order[0])]]
    for i in order[1:]:
        if abs(vals[i] - vals[groups[-1][-1]]) < tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    if len(groups) > 1 and abs(vals[groups[0][0]] - vals[groups[-1][-1]]) < tol:
        groups[0] = groups.pop() + groups[0]
    return groups


def _match_step(pred, prev_frame, w, frame):
    """Assign candidate eigenvalues w to sheets; None when untrustworthy."""
    n = len(w)
    dist = np.abs(pred[:, None] - w[None, :])
    overlap = np.abs(prev_frame.conj().T @ frame)
    perm = linear_sum_assignment(dist + 1e-6 * (1.0 - overlap))[1]
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(w[perm[i]] - w[perm[j]])
            if gap <= MERGE_TOL:
                continue  # numerically one point, any assignment works
            resid = max(dist[i, perm[i]], dist[j, perm[j]])
            if resid > AMBIG_FACTOR * gap:
                return None
    return perm


def _align_frame(prev, cur, vals):
    """Phase-fix sections, rotating degenerate clusters as a block."""
    cur = cur.copy()
    for idx in _clusters(vals, MERGE_TOL):
        if len(idx) == 1:
            s = idx[0]
            z = np.vdot(prev[:, s], cur[:, s])
            if abs(z) > 1e-12:
                cur[:, s] *= np.conj(z) / abs(z)
        else:
            b, a = cur[:, idx], prev[:, idx]
            u, _, vh = np.linalg.svd(b.conj().T @ a)
            cur[:, idx] = b @ (u @ vh)
    return cur


def _chain_match(spec, k_start, k_end, start_vals, start_frame, end_vals,
                 end_frame, slope=None):
    """Re-track [k_start, k_end] on refined subgrids.

    `slope` is an incoming dlambda/dk estimate per sheet; seeding the chain
    with it avoids a zeroth-order first step, which cannot separate sheets
    whose drift over one substep exceeds their gap.  Returns the
    sheet -> column permutation of (end_vals, end_frame), or None if every
    refinement level stays ambiguous.
    """
    for level in range(1, MAX_HALVINGS + 1):
        steps = 2 ** (level + 1)
        sub = np.linspace(k_start, k_end, steps + 1)
        cur_vals, cur_frame = start_vals, start_frame
        hist = [cur_vals]
        if slope is not None:
            hist.insert(0, start_vals - slope * (sub[1] - sub[0]))
        perm = None
        ok = True
        for t in range(1, steps + 1):
            if t == steps:
                w, frame = end_vals, end_frame
            else:
                w, frame = _eig_single(spec, sub[t])
            if len(hist) >= 3:
                pred = 3 * hist[-1] - 3 * hist[-2] + hist[-3]
            elif len(hist) == 2:
                pred = 2 * hist[-1] - hist[-2]
            else:
                pred = hist[-1]
            perm = _match_step(pred, cur_frame, w, frame)
            if perm is None:
                ok = False
                break
            cur_vals = w[perm]
            cur_frame = frame[:, perm]
            hist.append(cur_vals)
        if ok:
            return perm
    return None


def _neighborhood_min(score: np.ndarray) -> np.ndarray:
    return np.minimum(score, np.minimum(np.roll(score, 1), np.roll(score, -1)))


def _best_start(vals: np.ndarray) -> int:
    """Grid point whose spectrum is best separated.

    Starting inside a degeneracy leaves the sheet labels there to chance, so
    prefer a fiber where every pair is far apart.  Walks with exact copies
    (amplified blocks) are degenerate everywhere; for those, score with the
    copies masked out.  Scores are smoothed by a neighborhood minimum: a
    band touch makes the masked gap tiny next to the touch even though the
    touching pair itself falls under the mask at the touch fiber.
    """
    n = vals.shape[1]
    if n == 1:
        return 0
    dist = np.abs(vals[:, :, None] - vals[:, None, :])
    iu = np.triu_indices(n, k=1)
    gaps = dist[:, iu[0], iu[1]]
    score = _neighborhood_min(gaps.min(axis=1))
    best = int(np.argmax(score))
    if score[best] > 100.0 * MERGE_TOL:
        return best
    masked = np.where(gaps > MERGE_TOL, gaps, np.inf)
    score = _neighborhood_min(masked.min(axis=1))
    if np.all(np.isinf(score)):
        return 0
    return int(np.argmax(np.where(np.isinf(score), -1.0, score)))


def _track(spec: WalkSpec, ks: np.ndarray, vals: np.ndarray, vecs: np.ndarray):
    G, n = vals.shape
    tv = np.empty_like(vals)
    tw = np.empty_like(vecs)
    g0 = _best_start(vals)
    tv[g0] = vals[g0]
    tw[g0] = vecs[g0]

    def sweep(seq):
        last2, last = None, g0
        for g in seq:
            pred = tv[last] if last2 is None else 2 * tv[last] - tv[last2]
            perm = _match_step(pred, tw[last], vals[g], vecs[g])
            if perm is None:
                anchor = last2 if last2 is not None else last
                slope = None
                if last2 is not None:
                    slope = (tv[last] - tv[last2]) / (ks[last] - ks[last2])
                perm = _chain_match(
                    spec, ks[anchor], ks[g], tv[anchor], tw[anchor],
                    vals[g], vecs[g], slope=slope,
                )
                if perm is None:
                    lo, hi = sorted((ks[last], ks[g]))
                    raise UnresolvedCrossing(lo, hi)
            tv[g] = vals[g][perm]
            tw[g] = _align_frame(tw[last], vecs[g][:, perm], tv[g])
            last2, last = last, g

    sweep(range(g0 + 1, G))
    sweep(range(g0 - 1, -1, -1))
    # the start frame of a degenerate cluster is an arbitrary basis; rotate
    # it toward its neighbour so the section is continuous there too
    for idx in _clusters(tv[g0], MERGE_TOL):
        if len(idx) > 1 and G > 1:
            nb = g0 + 1 if g0 + 1 < G else g0 - 1
            b, a = tw[g0][:, idx], tw[nb][:, idx]
            u, _, vh = np.linalg.svd(b.conj().T @ a)
            tw[g0][:, idx] = b @ (u @ vh)
    return tv, tw


def _seam_permutation(spec, ks, tv, tw):
    G, n = tv.shape
    p0 = 3 * tv[G - 1] - 3 * tv[G - 2] + tv[G - 3]
    p1 = 6 * tv[G - 1] - 8 * tv[G - 2] + 3 * tv[G - 3]
    cost = (
        np.abs(p0[:, None] - tv[0][None, :])
        + np.abs(p1[:, None] - tv[1][None, :])
        + 1e-6 * (1.0 - np.abs(tw[G - 1].conj().T @ tw[0]))
    )
    sigma = linear_sum_assignment(cost)[1]
    ambiguous = False
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(tv[1][sigma[i]] - tv[1][sigma[j]])
            if gap <= MERGE_TOL:
                continue
            resid = max(
                abs(p1[i] - tv[1][sigma[i]]), abs(p1[j] - tv[1][sigma[j]])
            )
            if resid > AMBIG_FACTOR * gap:
                ambiguous = True
    if not ambiguous:
        return sigma
    # carry the sheets across the seam on a refined chain ending at k = h,
    # then identify them with the tracked sheets there
    h = 2.0 * np.pi / G
    slope = (tv[G - 3] - tv[G - 4]) / h
    perm = _chain_match(
        spec, ks[G - 3], 2.0 * np.pi + h, tv[G - 3], tw[G - 3], tv[1], tw[1],
        slope=slope,
    )
    if perm is None:
        raise UnresolvedCrossing(ks[G - 1], 2.0 * np.pi)
    return perm


def _divisors(d: int):
    return [k for k in range(1, d + 1) if d % k == 0]


def _winding_from_samples(samples: np.ndarray, retry: bool = True) -> int:
    inc = np.angle(np.roll(samples, -1) / samples)
    total = float(inc.sum() / (2.0 * np.pi))
    w = round(total)
    if abs(total - w) <= WINDING_TOL:
        return int(w)
    if retry:
        # one spectral upsampling pass before giving up; the samples define
        # a trigonometric polynomial, so resampling is faithful
        up = resample(samples, 2 * samples.size)
        return _winding_from_samples(up, retry=False)
    raise NonIntegerWinding(
        "argument sum %.3e turns is not an integer within %.0e" % (total, WINDING_TOL)
    )


def _finalize_band(samples, sections, degree, grid_size) -> Band:
    length = samples.size
    fourier = np.fft.fft(samples) / length
    is_constant = bool(np.max(np.abs(samples - samples[0])) < CONST_TOL)
    winding = 0 if is_constant else _winding_from_samples(samples)
    min_period = None
    if not is_constant:
        freqs = np.rint(np.fft.fftfreq(length) * length).astype(int)
        mags = np.abs(fourier)
        # a finite grid aliases the high-frequency part of an analytic band
        # into every bin; read that floor off the top bins so leakage there
        # cannot poison the support gcd or the periodicity check
        cut = length // 2 - max(4, length // 8)
        alias_floor = float(mags[np.abs(freqs) >= cut].max())
        thresh = max(COEF_TOL, 20.0 * alias_floor)
        support = freqs[(mags > thresh) & (freqs != 0)]
        m = int(np.gcd.reduce(np.abs(support))) if support.size else 1
        tol = max(1e-8, 100.0 * alias_floor)
        for cand in sorted(_divisors(m), reverse=True):
            shifted = (np.exp(2j * np.pi * freqs / cand) * fourier * length)
            shifted = np.fft.ifft(shifted)
            if np.max(np.abs(shifted - samples)) <= tol:
                min_period = cand
                break
        if min_period is None:
            min_period = 1
    secs = np.array(sections)
    # gauge: largest component of each section real positive at ktilde = 0
    for c in range(secs.shape[0]):
        v0 = secs[c, 0]
        comp = int(np.argmax(np.abs(v0)))
        ph = v0[comp]
        if abs(ph) > 1e-12:
            secs[c] *= np.conj(ph) / abs(ph)
    return Band(
        degree=degree,
        samples=samples,
        eigvec_samples=secs,
        fourier=fourier,
        multiplicity=secs.shape[0],
        winding=winding,
        min_period=min_period,
        is_constant=is_constant,
        grid_size=grid_size,
    )


def _assemble_bands(tv, tw, sigma, grid_size):
    G, n = tv.shape
    seen = set()
    raw = []  # (degree, samples, [section copies])
    for s0 in range(n):
        if s0 in seen:
            continue
        cycle = [s0]
        seen.add(s0)
        nxt = int(sigma[s0])
        while nxt != s0:
            cycle.append(nxt)
            seen.add(nxt)
            nxt = int(sigma[nxt])
        samples = np.concatenate([tv[:, s] for s in cycle])
        secs = [tw[:, :, s].copy() for s in cycle]
        # phase-align each sheet's section to the end of the previous one
        for i in range(1, len(secs)):
            z = np.vdot(secs[i - 1][-1], secs[i][0])
            if abs(z) > 1e-6:
                secs[i] *= np.conj(z) / abs(z)
        section = np.concatenate(secs, axis=0)
        d = len(cycle)
        # fold: a cycle weaving identical copies is 2pi d'-periodic
        for dp in _divisors(d):
            if dp == d or np.max(
                np.abs(samples - np.roll(samples, dp * G))
            ) < MERGE_TOL:
                copies = [
                    section[c * dp * G : (c + 1) * dp * G] for c in range(d // dp)
                ]
                raw.append([dp, samples[: dp * G], copies])
                break
    # merge bands that coincide pointwise (up to a deck shift of the cover)
    merged = []
    for d, samples, copies in raw:
        placed = False
        for entry in merged:
            if entry[0] != d:
                continue
            for r in range(d):
                rolled = np.roll(samples, r * G)
                if np.max(np.abs(entry[1] - rolled)) < MERGE_TOL:
                    entry[2].extend(np.roll(c, r * G, axis=0) for c in copies)
                    placed = True
                    break
            if placed:
                break
        if not placed:
            merged.append([d, samples, list(copies)])
    bands = [
        _finalize_band(samples, copies, d, grid_size) for d, samples, copies in merged
    ]
    return sorted(bands, key=_band_sort_key)


def _band_sort_key(band: Band):
    length = band.samples.size
    mid = band.samples[length // 2]
    return (
        not band.is_constant,
        band.degree,
        band.multiplicity,
        round(band.samples[0].real, 6),
        round(band.samples[0].imag, 6),
        band.winding,
        round(mid.real, 6),
        round(mid.imag, 6),
    )


def sample_bands(spec: WalkSpec, grid_size: int = 2048) -> BandSet:
    """Extract all analytic eigenvalue bands of the walk symbol.

    Parameters
    ----------
    spec : WalkSpec
    grid_size : int
        Samples per 2pi of the base torus; power of two, at least 64.

    Returns
    -------
    BandSet
        Bands with covering degrees, multiplicities, windings, minimal
        periods and continuously matched orthonormal eigenvector sections.

    Raises
    ------
    UnresolvedCrossing
        If two bands stay indistinguishable at a near-degeneracy after the
        maximum local refinement.
    """
    _validate_grid(grid_size)
    ks = 2.0 * np.pi * np.arange(grid_size) / grid_size
    vals, vecs = _eig_grid(spec, ks)
    tv, tw = _track(spec, ks, vals, vecs)
    sigma = _seam_permutation(spec, ks, tv, tw)
    bands = _assemble_bands(tv, tw, sigma, grid_size)
    return BandSet(bands=tuple(bands), n=spec.n, grid_size=grid_size)


def monodromy(spec: WalkSpec, grid_size: int = 2048) -> tuple:
    """Cycle type of the sheet permutation at k: 0 -> 2pi, ascending.

    Cycle lengths are the covering degrees; a band of multiplicity mu
    contributes mu cycles of its degree.
    """
    bs = sample_bands(spec, grid_size)
    lengths = []
    for band in bs.bands:
        lengths.extend([band.degree] * band.multiplicity)
    return tuple(sorted(lengths))


def minimal_period(band: Band) -> int:
    """Largest m with lambda(k + 2pi d / m) = lambda(k); period 2pi d / m."""
    if band.is_constant:
        raise ConstantBand("constant bands have every period")
    return band.min_period


def winding_number(band: Band) -> int:
    """Integer degree of lambda as a loop on its covering torus."""
    return band.winding


def det_winding(spec: WalkSpec, grid_size: int = 2048, band_set: BandSet | None = None) -> int:
    """Winding number of k -> det U_hat(k) on the base torus.

    Cross-checked against the sum of band windings weighted by
    multiplicity, which it must equal exactly.
    """
    _validate_grid(grid_size)
    ks = 2.0 * np.pi * np.arange(grid_size) / grid_size
    dets = np.linalg.det(symbol_on_grid(spec, ks))
    try:
        w = _winding_from_samples(dets)
    except NonIntegerWinding:
        ks2 = 2.0 * np.pi * np.arange(2 * grid_size) / (2 * grid_size)
        w = _winding_from_samples(np.linalg.det(symbol_on_grid(spec, ks2)))
    if band_set is None:
        band_set = sample_bands(spec, grid_size)
    sheet_sum = sum(b.multiplicity * b.winding for b in band_set.bands)
    if sheet_sum != w:
        raise RuntimeError(
            "internal error: det winding %d != sum of band windings %d"
            % (w, sheet_sum)
        )
    return w


def fourier_decay(band: Band):
    """Fit |c_ell| <= C rho^|ell| witnessing analyticity; returns (C, rho).

    The fit is a least-squares line through log|c_ell| over the supported
    frequencies, with C inflated so the bound holds at every coefficient.
    """
    coefs = np.abs(band.fourier)
    ells = np.abs(band.fourier_freqs)
    mask = coefs > 1e-13
    if mask.sum() <= 2:
        rho = 0.5
    else:
        slope, _ = np.polyfit(ells[mask], np.log(coefs[mask]), 1)
        rho = float(np.exp(min(slope, -1e-12)))
    c = float(np.max(coefs / np.maximum(rho ** ells.astype(float), 1e-300)))
    return c, rho


def write_band_csv(band_set: BandSet, fileobj) -> None:
    """Dump k, Re lambda, Im lambda per sheet as CSV (base-torus rows)."""
    G = band_set.grid_size
    ks = 2.0 * np.pi * np.arange(G) / G
    headers = ["k"]
    columns = []
    for bi, band in enumerate(band_set.bands):
        for c in range(band.multiplicity):
            for s in range(band.degree):
                headers.append("band%d_copy%d_sheet%d_re" % (bi, c, s))
                headers.append("band%d_copy%d_sheet%d_im" % (bi, c, s))
                columns.append(band.samples[s * G : (s + 1) * G])
    fileobj.write(",".join(headers) + "\n")
    for g in range(G):
        row = ["%.17g" % ks[g]]
        for col in columns:
            row.append("%.17g" % col[g].real)
            row.append("%.17g" % col[g].imag)
        fileobj.write(",".join(row) + "\n")
