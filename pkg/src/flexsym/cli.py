"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 a verification failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .generic import build_iso, iso_record, load_iso, properness_witness
from .independence import audit_fixed_points, audit_words, build_dense_family, dump_family, load_family
from .itinerary import C, find_collision, itinerary_from
from .pmap import AtomMapContext, parse_pairs
from .structures import build_structure, parse_descriptor, verify_window_iso
from .words import atom_sequence, dagger_decompose, format_word, parse_word


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _natural(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text}")
    return v


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def _emit(obj: dict, as_json: bool, lines: Sequence[str]) -> None:
    if as_json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


# --- commands ---------------------------------------------------------------------


def cmd_decompose(args) -> int:
    w = parse_word(args.word)
    d = dagger_decompose(w)
    seq = atom_sequence(w)
    obj = {
        "word": format_word(w),
        "exponents": list(d.exponents),
        "u_blocks": [format_word(u) for u in d.u_blocks],
        "u0": None if d.u0 is None else format_word(d.u0),
        "utop": None if d.utop is None else format_word(d.utop),
        "J": d.j,
        "L'": d.lprime,
        "atoms": [str(v) for v in seq.atoms],
    }
    lines = [
        f"word: {obj['word']}",
        "exponents: " + " ".join(map(str, d.exponents)),
        "blocks: " + (", ".join(obj["u_blocks"]) or "-"),
        f"U0: {obj['u0'] or '-'}",
        f"Utop: {obj['utop'] or '-'}",
        f"J = {d.j}",
        f"L' = {d.lprime}",
        "atoms (first applied first): " + " ".join(obj["atoms"]),
    ]
    _emit(obj, args.json, lines)
    return 0


def cmd_itinerary(args) -> int:
    w = parse_word(args.word)
    maps_text = list(args.map or [])
    if args.maps:
        maps_text += [ln for ln in _read(args.maps).splitlines() if ln.strip()]
    if not maps_text:
        raise UsageError("give at least one --map (x0 first)")
    maps = [parse_pairs(t.split(":", 1)[-1]) for t in maps_text]
    seq = atom_sequence(w)
    need = max(w.generators())
    if need >= len(maps):
        raise UsageError(f"word uses x{need} but only {len(maps)} maps were given")
    ctx = AtomMapContext(maps[0], maps[1:])
    t = itinerary_from(seq, ctx, args.slot, args.value)
    col = find_collision(t)
    obj = {
        "word": format_word(w),
        "slots": [None if v is C else v for v in t.slots],
        "collision": None if col is None else list(col),
    }
    lines = t.lines() + ["collision at (%d,%d)" % col if col else "no collision"]
    _emit(obj, args.json, lines)
    return 0


def cmd_build_family(args) -> int:
    fb = build_dense_family(args.count, args.horizon)
    _write(args.out, dump_family(fb))
    print(f"wrote {args.count} members realised to stage {args.horizon} -> {args.out}")
    return 0


def cmd_fixpoints(args) -> int:
    fb = load_family(_read(args.family))
    if (args.word is None) == (args.max_len is None):
        raise UsageError("give exactly one of --word and --max-len")
    if args.max_len is not None:
        reps = audit_words(fb.members, args.max_len, args.window)
        bad = [r for r in reps if not r.ok]
        lines = [f"{format_word(r.word)}: {len(r.fixed_points)} <= {r.bound}" for r in reps]
        lines.append(f"{len(reps)} words, {len(bad)} failing")
        _emit({"window": args.window, "reports": [r.to_dict() for r in reps]}, args.json, lines)
        return 0 if not bad else 2
    w = parse_word(args.word)
    if not w:
        raise UsageError("the word must be nontrivial")
    if max(w.generators()) >= len(fb.members):
        raise UsageError(f"the family has only {len(fb.members)} members")
    rep = audit_fixed_points(fb.members, w, args.window)
    lines = [
        f"word: {format_word(w)}",
        f"window: {args.window}",
        "fixed points: " + (" ".join(map(str, rep.fixed_points)) or "-"),
        f"bound: {rep.bound} (stage {rep.bound_stage})",
    ]
    for c in rep.certificates:
        lines.append(f"  {c['point']}: collision ({c['i0']},{c['j0']}) from stage {c['stage']}")
    lines += [f"VIOLATION {v}" for v in rep.violations]
    lines.append("OK" if rep.ok else "FAIL")
    _emit(rep.to_dict(), args.json, lines)
    return 0 if rep.ok else 2


def cmd_build_iso(args) -> int:
    d1, d2 = parse_descriptor(args.source), parse_descriptor(args.target)
    handles = load_family(_read(args.family)).members if args.family else []
    run = build_iso(d1, d2, handles, args.horizon)
    if run.unmet():
        print("FAIL unmet requirements", file=sys.stderr)
        return 2
    _write(args.out, iso_record(run, d1, d2, args.horizon).dumps())
    print(f"wrote iso on 0..{args.horizon} ({len(run.chain)} conditions) -> {args.out}")
    return 0


def cmd_verify_iso(args) -> int:
    d1, d2 = parse_descriptor(args.source), parse_descriptor(args.target)
    rec = load_iso(_read(args.map))
    rep = verify_window_iso(build_structure(d1), build_structure(d2), rec.f, args.window)
    print(rep)
    return 0 if rep.ok else 2


def cmd_properness(args) -> int:
    family = load_family(_read(args.family)).members if args.family else []
    _, rep = properness_witness(args.window, family, args.max_len)
    lines = [
        f"witness fixed points in 0..{rep.window}: {rep.witness_fixed} (need >= {rep.threshold})",
        f"family words audited: {rep.words_audited}, certified: {rep.words_ok}",
        f"largest word fixed-point count: {rep.max_word_fixed} (largest bound {rep.max_word_bound})",
        "OK" if rep.ok else "FAIL",
    ]
    _emit(rep.to_dict(), args.json, lines)
    return 0 if rep.ok else 2


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="flexsym",
        description="Reduced words, itineraries, strongly independent permutations and generic isomorphisms.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="block decomposition and atom sequence of a word")
    p.add_argument("word", help='e.g. "x1 x0^2 x1^-1 x0"')
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("itinerary", aliases=["trace"], help="itinerary through a word from one slot")
    p.add_argument("--word", required=True)
    p.add_argument("--map", action="append", help='pairs like "3->4, 4->3"; repeat for x0, x1, ...')
    p.add_argument("--maps", help="file with one map per line (x0 first)")
    p.add_argument("--slot", type=_natural, default=0)
    p.add_argument("--value", type=_natural, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_itinerary)

    p = sub.add_parser("build-family", help="build a dense strongly independent family")
    p.add_argument("--count", type=_positive, required=True)
    p.add_argument("--horizon", type=_natural, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_family)

    p = sub.add_parser("fixpoints", help="certified fixed points of a word over a family")
    p.add_argument("--family", required=True)
    p.add_argument("--word")
    p.add_argument("--max-len", type=_positive, help="audit every nontrivial word up to this length")
    p.add_argument("--window", type=_natural, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fixpoints)

    p = sub.add_parser("build-iso", help="generic isomorphism between two structures")
    p.add_argument("--from", dest="source", required=True, help='e.g. "kind=qorder;scramble="')
    p.add_argument("--to", dest="target", required=True, help='e.g. "kind=qorder;scramble=(0 3)"')
    p.add_argument("--family", help="family file whose members the iso must stay independent over")
    p.add_argument("--horizon", type=_natural, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_iso)

    p = sub.add_parser("verify-iso", help="check an iso file on a window (exit 2 on a counterexample)")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--map", required=True, help="iso file written by build-iso")
    p.add_argument("--window", type=_natural, required=True)
    p.set_defaults(func=cmd_verify_iso)

    p = sub.add_parser("properness", help="even-shift witness against a family's audited words")
    p.add_argument("--window", type=_natural, default=100)
    p.add_argument("--family")
    p.add_argument("--max-len", type=_positive, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_properness)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except (UsageError, ValueError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
