"""Which walks are one-step snapshots of a continuous-time evolution?

U is realizable as exp(i H) with H a banded self-adjoint generator
exactly when every band winding vanishes.  A single winding obstructs
it: no continuous branch of log U exists.
"""

import numpy as np

from qwalk import (
    det_winding,
    generator_coefficients,
    is_ct_realizable,
    witness_step,
)
from qwalk.fixtures import (
    coined,
    constant,
    det_winding_walk,
    free,
    grover3,
    grover4,
)

for name, spec in [
    ("free", free()),
    ("constant(2)", constant(2)),
    ("coined(0.5)", coined(0.5)),
    ("grover3", grover3()),
    ("grover4", grover4()),
    ("det_winding(0.6,0.8)", det_winding_walk(0.6, 0.8)),
]:
    verdict = is_ct_realizable(spec, 512)
    winds = [b.winding for b in verdict.band_set.bands]
    print(
        "%-21s det winding %+d  band windings %-12s  realizable: %s"
        % (name, verdict.det_winding, winds, verdict.realizable)
    )

# for a realizable walk the witness phases h(k) give a one-parameter
# group W(t) = exp(i t h) with W(1) = U on each band
print()
verdict = is_ct_realizable(grover3(), 512)
t, s = 0.4, 1.7
w = witness_step(verdict, t)
v = witness_step(verdict, s)
both = witness_step(verdict, t + s)
err = max(np.max(np.abs(a * b - c)) for a, b, c in zip(w, v, both))
print("grover3 witness group law residual at (t, s) = (%.1f, %.1f): %.2e" % (t, s, err))

coeffs = generator_coefficients(verdict, max_shift=4)
print("generator coefficients |H_j| by shift:")
for j in sorted(coeffs):
    print("  j = %+d  norm %.3e" % (j, np.linalg.norm(coeffs[j])))

# hermitian and decaying: the generator is itself banded to high accuracy
h1, h1m = coeffs[1], coeffs[-1]
print("H_{-1} == H_1^*:", np.allclose(h1m, h1.conj().T, atol=1e-10))
