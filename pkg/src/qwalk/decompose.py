"""Decomposition of a walk into constants and prime model walks.

Every band contributes one summand.  A constant band with value alpha and
multiplicity nu contributes alpha * identity on nu internal levels.  A
non-constant band of covering degree d, minimal period 2 pi d / m and
multiplicity mu contributes the prime model walk of rate m/d (reduced to
p/q) with multiplicity mu * m: the q-dimensional walk whose single band is
the same analytic function on T_{2 pi q}.  Rates, multiplicities and
windings classify the walk up to the natural equivalence, and assemble()
renders the canonical representative back as a banded walk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spectral import Band, BandSet, _finalize_band, sample_bands
from .walkspec import (
    UnitarityError,
    WalkSpec,
    amplify,
    commutator_norm,
    direct_sum,
)

__all__ = [
    "ConstantSummand",
    "PrimeModelWalk",
    "Decomposition",
    "decompose",
    "cover_walk",
    "assemble",
    "decomposition_to_json",
]

COEF_KEEP = 1e-14  # smallest Fourier coefficient rendered into a walk term


@dataclass(frozen=True)
class ConstantSummand:
    """alpha times the identity on ell_2(Z) tensor C^multiplicity."""

    alpha: complex
    multiplicity: int


@dataclass(frozen=True)
class PrimeModelWalk:
    """One prime summand: rate p/q, counted with multiplicity.

    band is the prime's own band on T_{2 pi q} (degree q, minimal period
    2 pi q / p, multiplicity 1) carrying the canonical eigenvector section.
    """

    rate: Fraction
    multiplicity: int
    winding: int
    band: Band


@dataclass(frozen=True)
class Decomposition:
    constants: tuple
    primes: tuple
    band_set: BandSet
    commutator_bound: float
    homogeneity_broken: bool

    @property
    def n(self) -> int:
        return self.band_set.n


def _prime_band(band: Band, q: int) -> Band:
    """Restrict a band to one fundamental loop of its prime's cover."""
    G = band.grid_size
    length = q * G
    samples = np.array(band.samples[:length])
    theta = 2.0 * np.pi * q * np.arange(length) / length
    section = np.exp(-1j * np.outer(theta, np.arange(q)) / q) / math.sqrt(q)
    return _finalize_band(samples, [section], q, G)


def decompose(spec: WalkSpec, grid_size: int = 2048) -> Decomposition:
    """Split the walk into constant and prime model summands.

    Raises UnresolvedCrossing if the band structure cannot be resolved at
    this grid size.
    """
    band_set = sample_bands(spec, grid_size)
    constants = []
    primes = []
    broken = False
    for band in band_set.bands:
        if band.is_constant:
            constants.append(
                ConstantSummand(
                    alpha=complex(band.samples.mean()),
                    multiplicity=band.multiplicity,
                )
            )
            continue
        m = band.min_period
        if m > 1:
            broken = True
        g = math.gcd(m, band.degree)
        q = band.degree // g
        prime = _prime_band(band, q)
        if prime.min_period != m // g or prime.winding * g != band.winding:
            raise RuntimeError(
                "internal error: prime band of rate %d/%d is inconsistent"
                % (m, band.degree)
            )
        primes.append(
            PrimeModelWalk(
                rate=Fraction(m, band.degree),
                multiplicity=band.multiplicity * m,
                winding=prime.winding,
                band=prime,
            )
        )
    total = sum(Fraction(c.multiplicity) for c in constants) + sum(
        Fraction(p.multiplicity) / p.rate for p in primes
    )
    if total != spec.n:
        raise RuntimeError(
            "internal error: summand dimensions %s do not add up to n=%d"
            % (total, spec.n)
        )
    return Decomposition(
        constants=tuple(constants),
        primes=tuple(primes),
        band_set=band_set,
        commutator_bound=commutator_norm(spec),
        homogeneity_broken=broken,
    )


def cover_walk(band: Band, coef_keep: float = COEF_KEEP) -> WalkSpec:
    """Render the d-dimensional walk whose only band is the given one.

    The walk acts on ell_2(Z) tensor C^d; entry (s', s) of coefficient A_j
    is the band's Fourier coefficient at frequency d j + s' - s.  If the
    truncation at coef_keep leaves the coefficients measurably non-unitary
    the threshold is lowered and the rendering retried.
    """
    d = band.degree
    freqs = band.fourier_freqs
    coefs = np.asarray(band.fourier)
    while True:
        terms: dict[int, np.ndarray] = {}
        for ell, c in zip(freqs, coefs):
            if abs(c) <= coef_keep:
                continue
            for sp in range(d):
                s = (sp - ell) % d
                j = (int(ell) - sp + s) // d
                terms.setdefault(j, np.zeros((d, d), dtype=complex))[sp, s] = c
        try:
            return WalkSpec(n=d, terms=terms)
        except UnitarityError:
            if coef_keep < 1e-18:
                raise
            coef_keep *= 1e-2


def assemble(dec: Decomposition) -> WalkSpec:
    """Canonical banded walk realizing the decomposition.

    Constants become alpha * I blocks; a prime of rate p/q and multiplicity
    M becomes M/p copies of the q-dimensional cover walk of its band (one
    such walk already carries prime multiplicity p).
    """
    blocks = []
    for cs in dec.constants:
        blocks.append(
            WalkSpec(
                n=cs.multiplicity,
                terms={0: cs.alpha * np.eye(cs.multiplicity)},
            )
        )
    for pm in dec.primes:
        copies, rem = divmod(pm.multiplicity, pm.rate.numerator)
        if rem:
            raise ValueError(
                "prime multiplicity %d is not a multiple of the rate numerator %d"
                % (pm.multiplicity, pm.rate.numerator)
            )
        blocks.append(amplify(cover_walk(pm.band), copies))
    if not blocks:
        raise ValueError("empty decomposition")
    out = blocks[0]
    for blk in blocks[1:]:
        out = direct_sum(out, blk)
    return out


def decomposition_to_json(dec: Decomposition) -> str:
    """Serialize the classification data (bands themselves are omitted)."""
    doc = {
        "n": dec.n,
        "constants": [
            {"alpha": [c.alpha.real, c.alpha.imag], "mult": c.multiplicity}
            for c in dec.constants
        ],
        "primes": [
            {
                "rate": {"num": p.rate.numerator, "den": p.rate.denominator},
                "mult": p.multiplicity,
                "winding": p.winding,
            }
            for p in dec.primes
        ],
        "homogeneity_broken": dec.homogeneity_broken,
        "commutator_bound": dec.commutator_bound,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
