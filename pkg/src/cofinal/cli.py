"""Command-line driver: build a filtration, measure each term, emit CSV or JSON.

Exit status: 0 all verdicts hold, 1 some verdict fails, 2 a resource cap
cut the run short, 3 unknown catalog group, 4 malformed presentation file,
5 any other input or witness error, 64 bad command-line usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .catalog import CatalogEntry, FiberingWitness, FreeQuotientWitness, identity_witness, lookup
from .cosets import DEFAULT_MAX_IMAGE
from .errors import (
    CofinalError,
    InputError,
    PresentationSyntaxError,
    ResourceError,
    UnknownGroupError,
)
from .filtrations import (
    DEFAULT_MAX_INDEX,
    FiltrationTerm,
    almost_normal_betti_schedule,
    assert_transfer_monotone,
    derived_p_filtration,
    exponent_certificate,
    fast_betti_schedule,
    measure_terms,
    normal_betti_pipeline,
    sanov_congruence_filtration,
    slow_rank_records,
    slow_rank_schedule,
)
from .growth import GrowthFunction, Power, parse_growth
from .presentations import FinitePresentation, Word, identity_automorphism, parse_presentation

EXIT_OK, EXIT_FAIL, EXIT_TRUNCATED = 0, 1, 2
EXIT_UNKNOWN_GROUP, EXIT_BAD_FILE, EXIT_INPUT, EXIT_USAGE = 3, 4, 5, 64

CONSTRUCTIONS = ("derived_p", "sanov", "fast_betti", "slow_rank", "normalized", "exponent")
CSV_HEADER = ("i", "d_i", "n_i", "index", "b1", "b1_mod", "torsion",
              "rank_lo", "rank_hi", "target", "verdict", "ratio")
DEFAULT_TARGETS = {"fast_betti": "power:1/2", "slow_rank": "log:2"}

log = logging.getLogger("cofinal")


@dataclass
class RunConfig:
    construction: str
    group: str | None = None
    file: str | None = None
    terms: int = 2
    target: str | None = None
    p: int = 2
    m: int = 3
    k: int = 1
    certificate: str = "T1_2"
    primes: tuple[int, ...] = (2,)
    emit: str = "csv"
    probes: tuple[str, ...] = ()
    max_index: int = DEFAULT_MAX_INDEX
    max_image: int = DEFAULT_MAX_IMAGE
    horizon: int | None = None
    dump: str | None = None

    def validate(self) -> "RunConfig":
        if (self.group is None) == (self.file is None):
            raise InputError("give exactly one of --group or --file")
        if self.construction not in CONSTRUCTIONS:
            raise InputError(f"unknown construction {self.construction!r}")
        if self.terms < 0:
            raise InputError("--terms must be non-negative")
        if self.max_index < 1 or self.max_image < 1:
            raise InputError("caps must be positive")
        if self.k < 1 or self.m < 2 or self.p < 2:
            raise InputError("need k >= 1, m >= 2, p >= 2")
        if self.emit not in ("csv", "json"):
            raise InputError("--emit must be csv or json")
        if self.certificate not in ("T1_2", "T2_2"):
            raise InputError("--certificate must be T1_2 or T2_2")
        return self


@dataclass
class Row:
    i: int
    d_i: int
    n_i: int
    index: int
    b1: int | None = None
    b1_mod: str = ""
    torsion: int | None = None
    rank_lo: int | None = None
    rank_hi: int | None = None
    target: float | None = None
    verdict: str = ""

    @property
    def ratio(self) -> Fraction | None:
        return None if self.b1 is None else Fraction(self.b1, self.index)

    def cells(self) -> list[str]:
        return [str(self.i), str(self.d_i), str(self.n_i), str(self.index), _cell(self.b1), self.b1_mod,
                _cell(self.torsion), _cell(self.rank_lo), _cell(self.rank_hi),
                "" if self.target is None else f"{self.target:.6g}", self.verdict,
                "" if self.ratio is None else f"{float(self.ratio):.6g}"]

    def to_json(self) -> dict:
        return dict(zip(CSV_HEADER, self.cells()))


def _cell(v) -> str:
    return "" if v is None else str(v)


@dataclass
class Report:
    config: RunConfig
    rows: list[Row] = field(default_factory=list)
    truncated: bool = False
    reason: str | None = None
    epsilon: Fraction | None = None
    probes: dict[str, int | None] = field(default_factory=dict)
    terms: list[FiltrationTerm] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def exit_status(self) -> int:
        if any(r.verdict == "fails" for r in self.rows):
            return EXIT_FAIL
        if self.truncated:
            return EXIT_TRUNCATED
        return EXIT_OK

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow(r.cells())
        return buf.getvalue()

    def json_text(self) -> str:
        doc = {
            "construction": self.config.construction,
            "group": self.config.group or self.config.file,
            "terms": [r.to_json() for r in self.rows],
            "truncated": self.truncated,
            "truncation_reason": self.reason,
            "epsilon": None if self.epsilon is None else str(self.epsilon),
            "probes": self.probes,
            "notes": self.notes,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _row(t: FiltrationTerm, target: GrowthFunction | None = None, verdict: str = "",
         index: int | None = None) -> Row:
    hom = t.measures
    idx = t.total_index if index is None else index
    return Row(t.i, t.d_i, t.n_i, idx,
               hom.b1 if hom else None, hom.b1_mod_text() if hom else "",
               hom.torsion_order if hom else None,
               *(t.rank_bounds if t.rank_bounds else (None, None)),
               None if target is None else target.approx(idx), verdict)


def _verdict(ok: bool) -> str:
    return "holds" if ok else "fails"


def load_group(cfg: RunConfig) -> tuple[FinitePresentation, CatalogEntry | None]:
    if cfg.group is not None:
        e = lookup(cfg.group)
        return e.presentation, e
    try:
        text = Path(cfg.file).read_text()
    except OSError as exc:
        raise PresentationSyntaxError(f"cannot read {cfg.file}: {exc.strerror}") from None
    return parse_presentation(text), None


def _free_witness(P: FinitePresentation, entry: CatalogEntry | None) -> FreeQuotientWitness:
    if entry is not None and entry.free_witness is not None:
        return entry.free_witness
    return identity_witness(P)


def _fibering(P: FinitePresentation, entry: CatalogEntry | None) -> FiberingWitness:
    if entry is not None and entry.fibering is not None:
        return entry.fibering
    return FiberingWitness(P, identity_automorphism(P))


def run(cfg: RunConfig) -> Report:
    cfg.validate()
    P, entry = load_group(cfg)
    rep = Report(cfg)
    c = cfg.construction
    probe_space = P
    contains = None

    if c in ("derived_p", "sanov"):
        if c == "derived_p":
            terms = derived_p_filtration(P, cfg.p, cfg.terms, cfg.max_index)
        else:
            if not P.is_free:
                raise InputError("the Sanov filtration is defined for free groups")
            terms = sanov_congruence_filtration(P.num_generators, cfg.m, cfg.terms, cfg.max_image)
        try:
            terms = measure_terms(P, terms, cfg.primes)
            assert_transfer_monotone(terms)
            ok = True
        except AssertionError:
            ok = False
        rep.rows = [_row(t, verdict=_verdict(ok)) for t in terms]

    elif c == "fast_betti":
        g = parse_growth(cfg.target or DEFAULT_TARGETS[c])
        alpha = _free_witness(P, entry)
        if cfg.k == 1:
            base = derived_p_filtration(P, cfg.p, cfg.terms, cfg.max_index)
            terms, cert = fast_betti_schedule(P, alpha, base, g, cfg.terms, cfg.max_index, cfg.primes)
            rep.rows = [_row(t, g, _verdict(r.holds)) for t, r in zip(terms, cert.records)]
        else:
            terms, cert, gamma = almost_normal_betti_schedule(alpha, cfg.k, g, cfg.terms, cfg.p, cfg.horizon,
                                                              cfg.max_index, cfg.primes)
            rep.rows = [_row(t, g, _verdict(r.holds), r.total_index) for t, r in zip(terms, cert.records)]
            rep.notes.append(f"terms are normal in an index-{cfg.k} subgroup; index column is [pi:pi_i]")
            contains = _pulled_back_membership(P, gamma)

    elif c == "slow_rank" or (c == "exponent" and cfg.certificate == "T2_2"):
        if c == "exponent" and cfg.k != 1:
            raise InputError("T2_2 certificates are computed for k = 1 (symbolic terms have no normal core)")
        f = parse_growth(cfg.target or ("power:1/2" if c == "exponent" else DEFAULT_TARGETS["slow_rank"]))
        fib = _fibering(P, entry)
        base = derived_p_filtration(fib.fiber, cfg.p, cfg.terms, cfg.max_index)
        terms, cert = slow_rank_schedule(fib.fiber, fib.monodromy, base, f, cfg.terms, cfg.primes)
        if c == "exponent":
            cert = exponent_certificate(slow_rank_records(terms), 1, "T2_2")
            rep.epsilon = cert.epsilon
            f = cert.records[0].target if cert.records else Power(1, 2)
        rep.rows = [_row(t, f, _verdict(r.holds)) for t, r in zip(terms, cert.records)]
        if entry is not None and entry.fibering is not None:
            probe_space = entry.presentation
        else:
            from .presentations import mk_semidirect_Z
            probe_space = mk_semidirect_Z(fib.fiber, fib.monodromy)

    else:  # normalized, or exponent with T1_2
        k = cfg.k if cfg.k > 1 or c == "exponent" else 2
        res = normal_betti_pipeline(_free_witness(P, entry), k, cfg.terms, cfg.p,
                                    cfg.max_index, cfg.max_image, cfg.primes)
        terms = res.cores
        cert = res.certificate
        rep.epsilon = cert.epsilon
        rep.rows = [_row(t, r.target, _verdict(r.holds)) for t, r in zip(terms, cert.records)]
        rep.notes.append(f"normal cores of a fast-Betti filtration of an index-{k} subgroup")

    rep.terms = list(terms)
    rep.truncated = bool(getattr(terms, "truncated", False))
    rep.reason = getattr(terms, "reason", None)
    for text in cfg.probes:
        w = probe_space.word(text)
        if not w:
            raise InputError(f"probe {text!r} is the trivial word")
        rep.probes[text] = _first_excluding(rep.terms, w, contains)
    if cfg.dump:
        _dump(rep.terms, cfg.dump)
    return rep


def _pulled_back_membership(P: FinitePresentation, gamma):
    from .schreier import reidemeister_schreier

    rs = reidemeister_schreier(P, gamma)

    def contains(t: FiltrationTerm, w: Word) -> bool:
        if not gamma.contains(w):
            return False
        return t.subgroup.contains(rs.rewrite_element(w))
    return contains


def _first_excluding(terms: Sequence[FiltrationTerm], w: Word, contains=None) -> int | None:
    for t in terms:
        if not (contains(t, w) if contains else t.contains(w)):
            return t.i
    return None


def _dump(terms: Sequence[FiltrationTerm], path: str) -> None:
    out = []
    for t in terms:
        if t.symbolic:
            out.append({"i": t.i, "modulus": t.subgroup.modulus,
                        "fiber": t.subgroup.fiber_subgroup.to_json()})
        else:
            out.append({"i": t.i, **t.subgroup.to_json()})
    Path(path).write_text(json.dumps(out) + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cofinal", description="Build filtrations of finitely presented groups and "
                                             "check growth inequalities term by term.")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--group", help="catalog name (free2, free3, surface_g2, fig8, trefoil, surface_g2_twist)")
    src.add_argument("--file", help="presentation file in gens:/rel: format")
    ap.add_argument("--construction", required=True, choices=CONSTRUCTIONS)
    ap.add_argument("--target", help="growth function, e.g. power:1/2, log:2, table:1,2,3, scaled:2:log:2")
    ap.add_argument("--terms", type=int, default=2)
    ap.add_argument("--p", type=int, default=2, help="prime for the derived p-series base")
    ap.add_argument("--m", type=int, default=3, help="base modulus for the Sanov filtration")
    ap.add_argument("--k", type=int, default=1, help="index of the auxiliary subgroup")
    ap.add_argument("--certificate", default="T1_2", choices=("T1_2", "T2_2"),
                    help="exponent certificate: T1_2 (Betti lower bound) or T2_2 (rank upper bound)")
    ap.add_argument("--primes", default="2", help="comma-separated primes for mod-p Betti numbers")
    ap.add_argument("--emit", default="csv", choices=("csv", "json"))
    ap.add_argument("--probe", action="append", default=[], help="word to test against the terms")
    ap.add_argument("--max-index", type=int, default=DEFAULT_MAX_INDEX)
    ap.add_argument("--max-image", type=int, default=DEFAULT_MAX_IMAGE)
    ap.add_argument("--horizon", type=int, help="horizon for ratio envelopes of table targets")
    ap.add_argument("--dump", help="write the coset tables as JSON to this path")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    try:
        primes = tuple(sorted({int(x) for x in ns.primes.split(",") if x.strip()}))
    except ValueError:
        raise InputError(f"bad prime list {ns.primes!r}") from None
    return RunConfig(ns.construction, ns.group, ns.file, ns.terms, ns.target, ns.p, ns.m, ns.k, ns.certificate,
                     primes, ns.emit, tuple(ns.probe), ns.max_index, ns.max_image, ns.horizon, ns.dump)


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    try:
        rep = run(config_from_args(ns))
    except UnknownGroupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_GROUP
    except PresentationSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_FILE
    except ResourceError as exc:
        print(f"truncated: {exc}", file=sys.stderr)
        return EXIT_TRUNCATED
    except CofinalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(rep.csv_text() if ns.emit == "csv" else rep.json_text())
    if rep.truncated:
        print(f"truncated: {rep.reason}", file=sys.stderr)
    for text, i in rep.probes.items():
        print(f"probe {text}: " + (f"excluded at i={i}" if i is not None else "not excluded"), file=sys.stderr)
    return rep.exit_status


if __name__ == "__main__":
    sys.exit(main())
