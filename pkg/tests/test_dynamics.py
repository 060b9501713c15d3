import io

import numpy as np
import pytest

from qwalk import (
    DistributionSnapshot,
    MemoryCapExceeded,
    State,
    ballistic_bound_check,
    basis_state,
    decompose,
    empirical_moment,
    evolve,
    kolmogorov_distance,
    limit_law,
    parse_state,
    position_distribution,
    serialize_state,
    to_band_coordinates,
    uniform_coin_state,
    write_distribution_csv,
)
from qwalk.dynamics import MEM_CAP_ENV
from qwalk.fixtures import constant, coined, free, grover3, grover4


def occupied(state, tol=1e-12):
    """Site -> vector dict over rows carrying mass, window independent."""
    out = {}
    for i, x in enumerate(state.sites):
        row = state.amplitudes[i]
        if np.abs(row).max() > tol:
            out[int(x)] = row
    return out


def test_parse_state_rejects_malformed():
    bad = [
        "not json",
        "{}",
        '{"entries": []}',
        '{"entries": [{"site": 0.5, "vector": [[1, 0]]}]}',
        '{"entries": [{"site": 0, "vector": [[1]]}]}',
        '{"entries": [{"site": 0, "vector": [[1, 0]]},'
        ' {"site": 1, "vector": [[1, 0], [0, 0]]}]}',
        '{"entries": [{"site": 0, "vector": [[1, 0]]},'
        ' {"site": 0, "vector": [[0, 1]]}]}',
    ]
    for text in bad:
        with pytest.raises(ValueError):
            parse_state(text)


def test_state_constructors():
    st = basis_state(4, 2, site=-3)
    assert st.n == 4
    assert st.norm() == pytest.approx(1.0)
    assert occupied(st).keys() == {-3}
    np.testing.assert_allclose(occupied(st)[-3], np.eye(4)[2])

    u = uniform_coin_state(3)
    assert u.norm() == pytest.approx(1.0)
    assert np.allclose(u.amplitudes, 1.0 / np.sqrt(3))

    with pytest.raises(ValueError):
        State(x_min=0, amplitudes=np.zeros((0, 2)))
    with pytest.raises(ValueError):
        State(x_min=0, amplitudes=np.zeros(3))


def test_serialize_parse_round_trip():
    rng = np.random.default_rng(5)
    amps = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
    amps[2] = 0.0  # interior gap must survive the trip
    st = State(x_min=-1, amplitudes=amps)
    st2 = parse_state(serialize_state(st))
    assert st2.x_min == st.x_min
    np.testing.assert_allclose(st2.amplitudes, st.amplitudes, atol=1e-15)


def test_free_walk_is_ballistic():
    st = evolve(free(), basis_state(1, 0), 10)
    assert occupied(st).keys() == {10}
    snap = position_distribution(st, 10)
    assert snap.total_mass() == pytest.approx(1.0)
    assert empirical_moment(snap, 1) == pytest.approx(1.0)
    assert empirical_moment(snap, 4) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        empirical_moment(position_distribution(st, 0), 1)


def test_constant_walk_stays_put():
    spec = constant(2, 0.3)
    st0 = uniform_coin_state(2)
    st = evolve(spec, st0, 50)
    assert occupied(st).keys() == {0}
    np.testing.assert_allclose(
        st.amplitudes, np.exp(15j) * st0.amplitudes, atol=1e-12
    )


def test_adjoint_round_trip():
    rng = np.random.default_rng(11)
    amps = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    amps /= np.linalg.norm(amps)
    st = State(x_min=-1, amplitudes=amps)
    back = evolve(grover4(), evolve(grover4(), st, 5), -5)
    got = occupied(back)
    assert got.keys() == {-1, 0, 1}
    for x, row in occupied(st).items():
        np.testing.assert_allclose(got[x], row, atol=1e-12)


def test_norm_preserved_under_evolution():
    st = evolve(grover3(), uniform_coin_state(3), 200)
    assert abs(st.norm() - 1.0) < 1e-10


def test_memory_cap_param_and_env(monkeypatch):
    st = basis_state(4, 0)
    with pytest.raises(MemoryCapExceeded):
        evolve(grover4(), st, 5000, mem_cap_mb=1)
    monkeypatch.setenv(MEM_CAP_ENV, "1")
    with pytest.raises(MemoryCapExceeded):
        evolve(grover4(), st, 5000)
    # explicit argument wins over the environment
    with pytest.raises(MemoryCapExceeded):
        evolve(grover4(), st, 5000, mem_cap_mb=1)
    monkeypatch.setenv(MEM_CAP_ENV, "4096")
    evolve(grover4(), st, 3)


def test_limit_law_rejects_wide_state():
    dec = decompose(grover3(), 256)
    amps = np.zeros((300, 3), dtype=complex)
    amps[0, 0] = 1.0
    with pytest.raises(ValueError, match="support"):
        limit_law(dec, State(x_min=0, amplitudes=amps))


def test_free_walk_law_is_atom_at_one():
    law = limit_law(decompose(free(), 128), basis_state(1, 0))
    assert law.atoms == ((1.0, pytest.approx(1.0)),)
    assert law.weights.size == 0
    assert law.bin_masses.sum() == pytest.approx(0.0)
    assert law.moment(1) == pytest.approx(1.0)
    assert law.moment(2) == pytest.approx(1.0)


def test_constant_walk_law_is_atom_at_zero():
    law = limit_law(decompose(constant(2, 0.7), 128), uniform_coin_state(2))
    assert law.atoms == ((0.0, pytest.approx(1.0)),)
    assert law.total_mass() == pytest.approx(1.0)


def test_law_mass_matches_state_norm(grover4_dec):
    st = uniform_coin_state(4)
    assert limit_law(grover4_dec, st).total_mass() == pytest.approx(1.0)
    half = State(x_min=0, amplitudes=0.5 * st.amplitudes)
    assert limit_law(grover4_dec, half).total_mass() == pytest.approx(0.25)


def test_band_coordinates_are_complete(grover3_dec):
    st = basis_state(3, 1)
    coords = to_band_coordinates(grover3_dec.band_set, st)
    g = grover3_dec.band_set.grid_size
    total = sum(float((np.abs(co) ** 2).sum()) / g for co in coords)
    assert total == pytest.approx(st.norm() ** 2, abs=1e-10)


def test_kolmogorov_collapses_atom_mass():
    dec = decompose(constant(1), 128)
    st = basis_state(1, 0)
    law = limit_law(dec, st)
    snap = position_distribution(evolve(constant(1), st, 10), 10)
    assert kolmogorov_distance(law, snap) == pytest.approx(0.0)
    shifted = DistributionSnapshot(
        t=10, sites=np.array([1]), masses=np.array([1.0])
    )
    assert kolmogorov_distance(law, shifted) == pytest.approx(1.0)
    assert kolmogorov_distance(law, shifted, atom_window=0.2) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        kolmogorov_distance(law, position_distribution(st, 0))


def test_ballistic_cone_free_walk():
    st = basis_state(1, 0)
    rep = ballistic_bound_check(free(), st, 1.5, 40)
    assert rep.valid and rep.passed
    assert rep.checkpoints == (10, 20, 40)
    assert max(rep.outside_mass) < 1e-12

    slow = ballistic_bound_check(free(), st, 0.5, 40)
    assert not slow.valid and not slow.passed


def test_coined_walk_spreads_inside_cone():
    # the operator-norm bound for a +-1 shift walk is 1 whatever the coin
    spec = coined(0.5)
    rep = ballistic_bound_check(spec, uniform_coin_state(2), 1.2, 100)
    assert rep.valid and rep.passed
    assert rep.outside_mass[-1] < 1e-3


def test_distribution_csv_skips_zero_rows():
    st = evolve(free(), basis_state(1, 0), 10)
    buf = io.StringIO()
    write_distribution_csv(position_distribution(st, 10), buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "t,x,x_over_t,mass"
    assert lines[1:] == ["10,10,1,1"]
