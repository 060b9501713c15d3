"""Command line front end.

Subcommands: analyze, decompose, realizable, intertwine, simulate.  Walks
are given either as a JSON file path or a fixture expression such as
"grover4" or "coined(0.5)".  Reports are deterministic: the same inputs
and flags produce byte-identical output.

Exit codes: 0 success, 2 invalid input, 3 unresolved band crossing.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

from . import __version__
from .decompose import decompose, decomposition_to_json
from .dynamics import (
    MemoryCapExceeded,
    basis_state,
    empirical_moment,
    evolve,
    kolmogorov_distance,
    limit_law,
    parse_state,
    position_distribution,
    uniform_coin_state,
    write_distribution_csv,
)
from .fixtures import build_fixture, fixture_names
from .intertwine import (
    build_intertwiner,
    commutant_report,
    intertwiner_space,
    write_intertwiner_csv,
)
from .realize import is_ct_realizable, write_witness_csv
from .spectral import UnresolvedCrossing, write_band_csv
from .walkspec import (
    UnitarityError,
    WalkSpec,
    WalkSpecError,
    parse_walk_spec,
    spec_digest,
)

SCHEMA_VERSION = 1


def _load_walk(token: str) -> WalkSpec:
    if os.path.exists(token):
        with open(token, "r", encoding="utf-8") as fh:
            return parse_walk_spec(fh.read())
    if token.endswith(".json"):
        raise ValueError("walk file not found: %s" % token)
    return build_fixture(token)


def _emit(text: str, out_path) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _report_header(command: str, spec: WalkSpec, args) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "qwalk",
        "version": __version__,
        "command": command,
        "grid": args.grid,
        "spec_digest": spec_digest(spec),
        "n": spec.n,
    }


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def _band_summaries(band_set) -> list:
    out = []
    for band in band_set.bands:
        v0 = band.samples[0]
        out.append(
            {
                "degree": band.degree,
                "multiplicity": band.multiplicity,
                "winding": band.winding,
                "min_period_m": band.min_period,
                "constant": band.is_constant,
                "value_at_0": [v0.real, v0.imag],
            }
        )
    return out


def _cmd_analyze(args) -> int:
    spec = _load_walk(args.spec)
    dec = decompose(spec, args.grid)
    band_set = dec.band_set
    if args.format == "csv":
        buf = io.StringIO()
        write_band_csv(band_set, buf)
        _emit(buf.getvalue(), args.out)
        return 0
    lengths = []
    for band in band_set.bands:
        lengths.extend([band.degree] * band.multiplicity)
    verdict = is_ct_realizable(spec, args.grid)
    doc = _report_header("analyze", spec, args)
    doc.update(
        {
            "bandwidth": spec.bandwidth,
            "commutator_bound": dec.commutator_bound,
            "monodromy": sorted(lengths),
            "bands": _band_summaries(band_set),
            "decomposition": json.loads(decomposition_to_json(dec)),
            "det_winding": verdict.det_winding,
            "realizable": verdict.realizable,
            "homogeneity_broken": dec.homogeneity_broken,
        }
    )
    _emit(_dump(doc), args.out)
    return 0


def _cmd_decompose(args) -> int:
    spec = _load_walk(args.spec)
    if args.format == "csv":
        raise ValueError(
            "decompose has no csv form; use 'analyze --format csv' for bands"
        )
    dec = decompose(spec, args.grid)
    doc = _report_header("decompose", spec, args)
    doc.update(json.loads(decomposition_to_json(dec)))
    _emit(_dump(doc), args.out)
    return 0


def _cmd_realizable(args) -> int:
    spec = _load_walk(args.spec)
    verdict = is_ct_realizable(spec, args.grid)
    if args.format == "csv":
        if not verdict.realizable:
            raise ValueError(
                "walk is not realizable; there is no witness generator to dump"
            )
        buf = io.StringIO()
        write_witness_csv(verdict, buf)
        _emit(buf.getvalue(), args.out)
        return 0
    doc = _report_header("realizable", spec, args)
    doc.update(
        {
            "realizable": verdict.realizable,
            "det_winding": verdict.det_winding,
            "bands": [
                {"degree": b.degree, "winding": b.winding}
                for b in verdict.band_set.bands
            ],
        }
    )
    _emit(_dump(doc), args.out)
    return 0


def _summand_labels(dec):
    labels = []
    for i, c in enumerate(dec.constants):
        labels.append(("c%d" % i, c))
    for i, p in enumerate(dec.primes):
        labels.append(("p%d" % i, p))
    return labels


def _cmd_intertwine(args) -> int:
    spec1 = _load_walk(args.spec)
    spec2 = _load_walk(args.spec2)
    dec1 = decompose(spec1, args.grid)
    dec2 = decompose(spec2, args.grid)
    pairs = []
    first_match = None
    for l1, s1 in _summand_labels(dec1):
        for l2, s2 in _summand_labels(dec2):
            space = intertwiner_space(s1, s2)
            entry = {
                "left": l1,
                "right": l2,
                "kind": space.kind,
                "generators": space.generator_count,
            }
            if space.match is not None:
                entry["alpha"] = space.match.alpha
                entry["residual"] = space.match.residual
                if first_match is None:
                    first_match = (space.match, s1.rate)
            pairs.append(entry)
    if args.format == "csv":
        if first_match is None:
            raise ValueError(
                "no translation intertwiner exists between these walks"
            )
        match, rate = first_match
        v = build_intertwiner(match, rate, args.window)
        buf = io.StringIO()
        write_intertwiner_csv(v, buf)
        _emit(buf.getvalue(), args.out)
        return 0
    rep1 = json.loads(_commutant_json(dec1))
    rep2 = json.loads(_commutant_json(dec2))
    doc = _report_header("intertwine", spec1, args)
    doc.update(
        {
            "spec_digest_2": spec_digest(spec2),
            "pairs": pairs,
            "commutant_1": rep1,
            "commutant_2": rep2,
        }
    )
    _emit(_dump(doc), args.out)
    return 0


def _commutant_json(dec) -> str:
    from .intertwine import commutant_report_to_json

    return commutant_report_to_json(commutant_report(dec))


def _initial_state(args, n):
    if args.state is not None:
        with open(args.state, "r", encoding="utf-8") as fh:
            return parse_state(fh.read())
    name = args.builtin or "uniform"
    if name == "uniform":
        return uniform_coin_state(n)
    if name.startswith("e") and name[1:].isdigit() and int(name[1:]) < n:
        return basis_state(n, int(name[1:]))
    raise ValueError(
        "unknown built-in state %r (use 'uniform' or 'e0'..'e%d')" % (name, n - 1)
    )


def _cmd_simulate(args) -> int:
    spec = _load_walk(args.spec)
    state = _initial_state(args, spec.n)
    checkpoints = sorted({max(args.steps // 4, 1), max(args.steps // 2, 1), args.steps})
    snaps = []
    cur, cur_t = state, 0
    for t in checkpoints:
        cur = evolve(spec, cur, t - cur_t)
        cur_t = t
        snaps.append(position_distribution(cur, t))
    snap = snaps[-1]
    if args.csv is not None:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("t,x,x_over_t,mass\n")
            for s in snaps:
                buf = io.StringIO()
                write_distribution_csv(s, buf)
                fh.write(buf.getvalue().split("\n", 1)[1])
    if args.format == "csv":
        buf = io.StringIO()
        write_distribution_csv(snap, buf)
        _emit(buf.getvalue(), args.out)
        return 0
    dec = decompose(spec, args.grid)
    law = limit_law(dec, state)
    doc = _report_header("simulate", spec, args)
    doc.update(
        {
            "seed": args.seed,
            "steps": args.steps,
            "total_mass": snap.total_mass(),
            "support": [int(snap.sites[0]), int(snap.sites[-1])],
            "moment_table": {
                "t=%d" % s.t: {
                    "m%d" % k: empirical_moment(s, k) for k in range(1, 5)
                }
                for s in snaps
            },
            "moments": {
                "m%d" % k: empirical_moment(snap, k) for k in range(1, 5)
            },
            "limit_moments": {"m%d" % k: law.moment(k) for k in range(1, 5)},
            "kolmogorov_distance": kolmogorov_distance(law, snap),
            "atoms": [[v, m] for v, m in law.atoms],
            "commutator_bound": dec.commutator_bound,
        }
    )
    if args.limit_law:
        doc["limit_law"] = {
            "atoms": [[v, m] for v, m in law.atoms],
            "bin_edges": [float(e) for e in law.bin_edges],
            "bin_masses": [float(m) for m in law.bin_masses],
            "moments": {"m%d" % k: law.moment(k) for k in range(1, 5)},
        }
    _emit(_dump(doc), args.out)
    return 0


def _add_common(parser, two_specs=False, simulate=False):
    parser.add_argument("spec", help="walk JSON file or fixture expression")
    if two_specs:
        parser.add_argument("spec2", help="second walk file or fixture")
    parser.add_argument(
        "--grid",
        type=int,
        default=2048,
        help="momentum grid size, power of two >= 64 (default 2048)",
    )
    parser.add_argument("--out", default=None, help="write report to a file")
    parser.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="report format (default json)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="random seed recorded in reports (reserved, default 0)",
    )
    if simulate:
        parser.add_argument(
            "--steps", type=int, default=100, help="number of walk steps"
        )
        parser.add_argument(
            "--state",
            default=None,
            help="initial state JSON file (default: uniform coin at the origin)",
        )
        parser.add_argument(
            "--builtin",
            default=None,
            help="built-in initial state: 'uniform' or 'e0'..'e(n-1)'",
        )
        parser.add_argument(
            "--csv",
            default=None,
            help="also write the distribution at t/4, t/2, t to this CSV file",
        )
        parser.add_argument(
            "--limit-law",
            action="store_true",
            help="embed the limit law (atoms, histogram, moments) in the report",
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalk",
        description="Spectral analysis of one-dimensional banded unitary walks.",
        epilog="Built-in walks: %s" % ", ".join(fixture_names()),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="bands, monodromy, decomposition, windings")
    _add_common(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("decompose", help="constants and prime model summands")
    _add_common(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("realizable", help="continuous-time realizability verdict")
    _add_common(p)
    p.set_defaults(func=_cmd_realizable)

    p = sub.add_parser("intertwine", help="classify intertwiners of two walks")
    _add_common(p, two_specs=True)
    p.add_argument(
        "--window",
        type=int,
        default=64,
        help="position window for the csv intertwiner dump (default 64)",
    )
    p.set_defaults(func=_cmd_intertwine)

    p = sub.add_parser("simulate", help="evolve a state and compare to the limit law")
    _add_common(p, simulate=True)
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnresolvedCrossing as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except (WalkSpecError, UnitarityError, MemoryCapExceeded) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
