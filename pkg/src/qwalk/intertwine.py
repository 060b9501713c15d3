"""Intertwiners between summands and the commutant of a walk.

Two prime model walks of the same rate intertwine iff their bands differ
by a torus translation: lambda_2(x) = lambda_1(x + c) on T_2pi in
normalized coordinates.  On Fourier coefficients that reads
c2[l] = c1[l] exp(i l c), which is how the translation is found: a phase
correlation locates c, a bounded polish sharpens it, and the coefficient
residual decides.  Because a prime band's normalized support has gcd 1,
the translation is unique mod 2 pi and the intertwiner space is singly
generated over the torus function algebra.

Between constant summands the only question is whether the constants
agree; then every matrix on the multiplicity space intertwines
(band_algebra).  Across kinds, or on any mismatch, the space is zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .decompose import ConstantSummand, Decomposition, PrimeModelWalk
from .spectral import Band

__all__ = [
    "TranslationMatch",
    "IntertwinerSpace",
    "ConstantClass",
    "PrimeClass",
    "CommutantReport",
    "find_translation",
    "intertwiner_space",
    "build_intertwiner",
    "model_walk_matrix",
    "intertwiner_residual",
    "commutant_report",
    "commutant_report_to_json",
    "write_intertwiner_csv",
]

RESIDUAL_TOL = 1e-7    # max coefficient mismatch for an accepted translation
CONST_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class TranslationMatch:
    """Torus translation intertwining two prime bands.

    alpha is the physical translation in [0, 2 pi / rate); residual is the
    worst normalized-coefficient mismatch it leaves.
    """

    alpha: float
    residual: float


@dataclass(frozen=True)
class IntertwinerSpace:
    """Classification of Hom(summand1, summand2).

    kind "zero": only the zero operator.
    kind "model_translation": generated by one modulated translation
    (generator_count counts the copy-pair blocks, each carrying one).
    kind "band_algebra": equal constants; every multiplicity-space matrix,
    generator_count = mult1 * mult2.
    """

    kind: str
    generator_count: int
    match: TranslationMatch | None = None


def _normalized_coefficients(band: Band) -> dict[int, complex]:
    """Fourier coefficients of the band in normalized coordinates.

    For a prime band (minimal period 2 pi q / p) the support lies on
    multiples of p; dividing frequencies by p gives the coefficients of
    lambda as a function on T_2pi with coprime support.
    """
    p = band.min_period
    out: dict[int, complex] = {}
    for ell, c in zip(band.fourier_freqs, band.fourier):
        if abs(c) <= 1e-13:
            continue
        if ell % p:
            # leakage from tracking noise; a real coefficient here would
            # contradict the stored minimal period
            continue
        out[int(ell) // p] = complex(c)
    return out


def find_translation(
    band1: Band, band2: Band, rate: Fraction | None = None
) -> TranslationMatch | None:
    """Find c with lambda_2(x) = lambda_1(x + c), reported physically.

    Returns None when no translation aligns the bands within
    RESIDUAL_TOL.  The search correlates the Fourier phases and polishes
    the best candidate, so the answer is accurate to rounding when it
    exists.
    """
    if band1.degree != band2.degree or band1.min_period != band2.min_period:
        return None
    if rate is None:
        rate = Fraction(band1.min_period, band1.degree)
    c1 = _normalized_coefficients(band1)
    c2 = _normalized_coefficients(band2)
    support = sorted(set(c1) | set(c2))
    if not support:
        return None
    for ell in support:
        if abs(abs(c1.get(ell, 0.0)) - abs(c2.get(ell, 0.0))) > RESIDUAL_TOL:
            return None  # moduli are translation invariants
    weights = {
        ell: c2[ell] * np.conj(c1[ell])
        for ell in support
        if ell in c1 and ell in c2
    }
    if not weights:
        return None

    span = max(max(abs(ell) for ell in weights), 1)
    pad = 1 << max(10, (span * 8).bit_length())
    buf = np.zeros(pad, dtype=complex)
    for ell, w in weights.items():
        buf[ell % pad] += w
    corr = np.fft.fft(buf).real
    c = int(np.argmax(corr)) * 2.0 * np.pi / pad
    # Newton polish by weighted phase regression; the correlation value
    # itself is too flat near its maximum to locate c beyond sqrt(eps).
    # The bin is within pi / (4 max|ell|) of the optimum, so no phase wraps.
    for _ in range(3):
        num = den = 0.0
        for ell, w in weights.items():
            if ell == 0:
                continue
            num += abs(w) * ell * np.angle(w * np.exp(-1j * ell * c))
            den += abs(w) * ell * ell
        if den == 0.0:
            break
        c += num / den
    c %= 2.0 * np.pi
    if 2.0 * np.pi - c < 1e-12:
        c = 0.0  # rounding wrapped an identity translation to a full turn
    residual = max(
        abs(c2.get(ell, 0.0) - c1.get(ell, 0.0) * np.exp(1j * ell * c))
        for ell in support
    )
    if residual > RESIDUAL_TOL:
        return None
    return TranslationMatch(alpha=c / float(rate), residual=float(residual))


def intertwiner_space(a, b) -> IntertwinerSpace:
    """Classify the intertwiners from summand a to summand b."""
    if isinstance(a, ConstantSummand) and isinstance(b, ConstantSummand):
        if abs(a.alpha - b.alpha) <= CONST_MATCH_TOL:
            return IntertwinerSpace(
                kind="band_algebra",
                generator_count=a.multiplicity * b.multiplicity,
            )
        return IntertwinerSpace(kind="zero", generator_count=0)
    if isinstance(a, ConstantSummand) or isinstance(b, ConstantSummand):
        return IntertwinerSpace(kind="zero", generator_count=0)
    if a.rate != b.rate:
        return IntertwinerSpace(kind="zero", generator_count=0)
    match = find_translation(a.band, b.band, rate=a.rate)
    if match is None:
        return IntertwinerSpace(kind="zero", generator_count=0)
    p = a.rate.numerator
    blocks = (a.multiplicity // p) * (b.multiplicity // p)
    return IntertwinerSpace(
        kind="model_translation", generator_count=blocks, match=match
    )


def build_intertwiner(
    match: TranslationMatch,
    rate: Fraction,
    window: int,
    rho: dict[int, complex] | None = None,
) -> np.ndarray:
    """Dense window of the modulated translation intertwiner.

    Positions run over j - window//2.  The generator is the diagonal
    modulation exp(i j alpha rate); composing with any banded torus
    function rho (given by its Fourier coefficients, default 1) stays an
    intertwiner, so V[i, j] = rho_hat[i - j] exp(i c j), c = alpha * rate.
    """
    c = match.alpha * float(rate)
    positions = np.arange(window) - window // 2
    rho_hat = {0: 1.0 + 0.0j} if rho is None else rho
    v = np.zeros((window, window), dtype=complex)
    for off, coef in rho_hat.items():
        if abs(off) >= window:
            continue
        v += coef * np.eye(window, k=-int(off))
    v *= np.exp(1j * c * positions)[None, :]
    return v


def model_walk_matrix(band: Band, window: int) -> np.ndarray:
    """Dense window of the prime model walk in normalized coordinates.

    The walk is multiplication by the band on the torus; its position
    matrix is the Toeplitz array of the normalized Fourier coefficients.
    """
    coefs = _normalized_coefficients(band)
    u = np.zeros((window, window), dtype=complex)
    for ell, c in coefs.items():
        if abs(ell) >= window:
            continue
        u += c * np.eye(window, k=-ell)
    return u


def intertwiner_residual(u1, u2, v, margin: int) -> float:
    """Spectral norm of V U1 - U2 V away from the window edges."""
    r = v @ u1 - u2 @ v
    if margin > 0:
        r = r[margin:-margin, margin:-margin]
    if r.size == 0:
        return 0.0
    return float(np.linalg.norm(r, 2))


@dataclass(frozen=True)
class ConstantClass:
    alpha: complex
    size: int


@dataclass(frozen=True)
class PrimeClass:
    """Equivalence class of prime summands under translation.

    alphas holds each member's translation relative to the first member.
    size is the total multiplicity; the commutant factor is the torus
    function algebra tensor the (size / numerator)-dimensional matrices.
    """

    rate: Fraction
    size: int
    alphas: tuple


@dataclass(frozen=True)
class CommutantReport:
    constant_classes: tuple
    prime_classes: tuple

    @property
    def factor_count(self) -> int:
        return len(self.constant_classes) + len(self.prime_classes)


def commutant_report(dec: Decomposition) -> CommutantReport:
    """Group summands into equivalence classes; classes index the factors
    of the commutant of the walk (joint with all its intertwiners)."""
    cclasses = []
    taken = [False] * len(dec.constants)
    for i, ci in enumerate(dec.constants):
        if taken[i]:
            continue
        size = ci.multiplicity
        for j in range(i + 1, len(dec.constants)):
            if not taken[j] and abs(ci.alpha - dec.constants[j].alpha) <= CONST_MATCH_TOL:
                size += dec.constants[j].multiplicity
                taken[j] = True
        cclasses.append(ConstantClass(alpha=ci.alpha, size=size))
    pclasses = []
    taken = [False] * len(dec.primes)
    for i, pi in enumerate(dec.primes):
        if taken[i]:
            continue
        size = pi.multiplicity
        alphas = [0.0]
        for j in range(i + 1, len(dec.primes)):
            pj = dec.primes[j]
            if taken[j] or pi.rate != pj.rate:
                continue
            match = find_translation(pi.band, pj.band, rate=pi.rate)
            if match is not None:
                size += pj.multiplicity
                alphas.append(match.alpha)
                taken[j] = True
        pclasses.append(
            PrimeClass(rate=pi.rate, size=size, alphas=tuple(alphas))
        )
    return CommutantReport(
        constant_classes=tuple(cclasses), prime_classes=tuple(pclasses)
    )


def commutant_report_to_json(report: CommutantReport) -> str:
    doc = {
        "constants": [
            {"alpha": [c.alpha.real, c.alpha.imag], "size": c.size}
            for c in report.constant_classes
        ],
        "primes": [
            {
                "rate": {"num": p.rate.numerator, "den": p.rate.denominator},
                "size": p.size,
                "alphas": list(p.alphas),
            }
            for p in report.prime_classes
        ],
        "factor_count": report.factor_count,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def write_intertwiner_csv(v: np.ndarray, fileobj, tol: float = 1e-12) -> None:
    """Sparse triplet dump row,col,re,im of the window matrix."""
    fileobj.write("row,col,re,im\n")
    rows, cols = np.nonzero(np.abs(v) > tol)
    for i, j in zip(rows, cols):
        fileobj.write(
            "%d,%d,%.17g,%.17g\n" % (i, j, v[i, j].real, v[i, j].imag)
        )
