"""Decompose walks into constants plus prime model walks and rebuild them.

The structure theorem splits every homogeneous walk, up to a uniform
unitary, into constant summands alpha I and prime model walks M[lambda]
of rational rate m/d.  The rational bookkeeping sum mult + mult / rate
recovers n exactly.
"""

from fractions import Fraction

import numpy as np

from qwalk import assemble, cover_walk, decompose
from qwalk.fixtures import coined, cube_root, grover3, grover4

for name, spec in [
    ("coined(0.5)", coined(0.5)),
    ("grover3", grover3()),
    ("grover4", grover4()),
    ("cube_root", cube_root()),
]:
    dec = decompose(spec, 2048)
    print("== %s ==" % name)
    for c in dec.constants:
        print("  constant  alpha = %.4f%+.4fi  mult %d" % (c.alpha.real, c.alpha.imag, c.multiplicity))
    for p in dec.primes:
        print(
            "  prime     rate %s  mult %d  winding %+d"
            % (p.rate, p.multiplicity, p.winding)
        )
    total = sum((Fraction(c.multiplicity) for c in dec.constants), Fraction(0))
    total += sum((p.multiplicity / p.rate for p in dec.primes), Fraction(0))
    print("  bookkeeping: %s == n = %d" % (total, spec.n))
    print("  homogeneity broken:", dec.homogeneity_broken)
    print()

# a prime of rate m/d lives on a d-sheeted cover; cover_walk builds the
# d-dimensional banded unitary whose band is exactly that prime band
dec = decompose(cube_root(), 2048)
prime = dec.primes[0]
cover = cover_walk(prime.band)
print("cube_root prime: rate %s -> cover walk with n = %d" % (prime.rate, cover.n))

# assemble() composes the summands back into one walk; its bands must
# agree with the original up to the uniform change of basis
spec = grover4()
dec = decompose(spec, 2048)
rebuilt = assemble(dec)
dec2 = decompose(rebuilt, 2048)
sig = lambda d: sorted((p.rate, p.multiplicity, p.winding) for p in d.primes)
print("grover4 assemble round trip:", "ok" if sig(dec) == sig(dec2) else "MISMATCH")
