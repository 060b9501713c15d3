"""Ballistic scaling: evolve walks and compare x/t against the limit law.

The rescaled position x/t converges weakly to the push-forward of the
momentum-space weights under the group velocity of each band, plus atoms
for flat (constant) bands.  Localization shows up as an atom at zero.
"""

import numpy as np

from qwalk import (
    basis_state,
    decompose,
    evolve,
    kolmogorov_distance,
    limit_law,
    position_distribution,
    empirical_moment,
    uniform_coin_state,
)
from qwalk.fixtures import coined, grover3, grover4

T = 400

for name, spec, state in [
    ("coined(0.5)", coined(0.5), uniform_coin_state(2)),
    ("grover4", grover4(), uniform_coin_state(4)),
]:
    dec = decompose(spec, 2048)
    law = limit_law(dec, state)
    snap = position_distribution(evolve(spec, state, T), T)
    print("== %s, t = %d ==" % (name, T))
    for order in (1, 2, 3, 4):
        print(
            "  moment m%d: empirical %+.5f  limit %+.5f"
            % (order, empirical_moment(snap, order), law.moment(order))
        )
    print("  Kolmogorov distance to the limit law: %.5f" % kolmogorov_distance(law, snap))
    print("  max group speed (commutator bound): %.4f" % dec.commutator_bound)
    print()

# grover3 localizes: its flat band puts an atom of the limit law at 0,
# visible as mass that never leaves a neighborhood of the origin
spec = grover3()
state = basis_state(3, 1)
dec = decompose(spec, 2048)
law = limit_law(dec, state)
atom_mass = sum(m for v, m in law.atoms if v == 0.0)
snap = position_distribution(evolve(spec, state, T), T)
central = np.abs(snap.sites / snap.t) < 0.02
print("== grover3 localization, t = %d ==" % T)
print("  limit-law atom at 0:      %.5f" % atom_mass)
print("  simulated mass |x/t|<2%%:  %.5f" % float(snap.masses[central].sum()))

# histogram agreement of the continuous part
centers = 0.5 * (law.bin_edges[:-1] + law.bin_edges[1:])
width = law.bin_edges[1] - law.bin_edges[0]
v = snap.sites / snap.t
emp = np.array(
    [
        snap.masses[(v >= lo) & (v < lo + width)].sum()
        for lo in law.bin_edges[:-1]
    ]
)
keep = np.abs(centers) > 0.02
print("  continuum histogram max bin error: %.2e" % np.max(np.abs(emp - law.bin_masses)[keep]))
