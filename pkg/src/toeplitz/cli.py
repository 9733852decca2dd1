"""Command line front end.

    toeplitz gen --word "a?b?c" --range -10:10
    toeplitz skeleton --word "a?b?c" --level 2 --range 0:25
    toeplitz complexity --word "a?b?c" --nmax 200 --csv out.csv
    toeplitz phi --word "a?b?c" --level 1
    toeplitz roots --word "a?b?c" --level 2
    toeplitz odometer --powers 2:8
    toeplitz blocks --k1 4 --d0 2 --scale scale.json --levels 3 --mode toy
    toeplitz realize --d 2 --a 6 --entropy zero --out spec.json
    toeplitz verify-all --word "a?b?c" --levels 2

Exit codes: 0 success, 1 usage error, 2 a verification failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import jsonschema

from . import blocks as blk
from .holewords import ConstantWordSystem, HoleWord, PerLevelSystem, ToeplitzSystem, skeleton
from .language import complexity_table, fit_exponent
from .odometer import Scale, ScaleError, is_minimal_translation, multiplicity, torsion_structure
from .products import ProductSystem, realize_group
from .pq_toeplitz import certify_phi, extensional_check, power, root_of_shift, shift_map
from .verify import verify_all

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

_WORD = {"type": "string", "minLength": 1}

SPEC_SCHEMA = {
    "$defs": {
        "spec": {
            "type": "object",
            "required": ["kind"],
            "oneOf": [
                {
                    "properties": {"kind": {"const": "pq"}, "word": _WORD},
                    "required": ["word"],
                },
                {
                    "properties": {
                        "kind": {"const": "perlevel"},
                        "words": {"type": "array", "items": _WORD, "minItems": 1},
                    },
                    "required": ["words"],
                },
                {
                    "properties": {
                        "kind": {"const": "blocks"},
                        "k1": {"type": "integer", "minimum": 2},
                        "d0": {"type": ["string", "number"]},
                        "scale": {"type": "array", "items": {"type": ["string", "integer"]},
                                  "minItems": 1},
                        "levels": {"type": "integer", "minimum": 1},
                        "mode": {"enum": ["toy", "faithful"]},
                        "relaxed_c2": {"type": "boolean"},
                    },
                    "required": ["k1", "scale", "levels"],
                },
                {
                    "properties": {
                        "kind": {"const": "product"},
                        "a": {"type": "integer", "minimum": 1},
                        "components": {"type": "array", "items": {"$ref": "#/$defs/spec"}},
                        "report": {"type": "object"},
                    },
                    "required": ["components"],
                },
            ],
        }
    },
    "$ref": "#/$defs/spec",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        a, b = int(a), int(b)
    except ValueError:
        raise UsageError(f"bad range {text!r}, expected a:b")
    if b < a:
        raise UsageError(f"empty range {text!r}")
    return a, b


# --------------------------------------------------------------- specs


def load_spec(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    validate_spec(data)
    return data


def validate_spec(data: dict):
    try:
        jsonschema.validate(data, SPEC_SCHEMA)
    except jsonschema.ValidationError as e:
        raise UsageError(f"construction spec invalid: {e.message}")


def system_from_spec(data: dict) -> ToeplitzSystem:
    kind = data["kind"]
    try:
        if kind == "pq":
            return ConstantWordSystem(data["word"])
        if kind == "perlevel":
            return PerLevelSystem(data["words"])
        if kind == "blocks":
            spec = blk.BlockSpec(
                data["k1"], Fraction(str(data.get("d0", 2))),
                Scale(tuple(int(v) for v in data["scale"])), data["levels"],
                data.get("mode", "toy"), data.get("relaxed_c2", False),
            )
            return blk.BlockSystem(blk.BlockConstruction(spec))
        if kind == "product":
            comps = [system_from_spec(c) for c in data["components"]]
            return ProductSystem(comps, data.get("a", 1), data.get("report"))
    except (ValueError, ScaleError) as e:
        raise UsageError(f"spec rejected: {e}")
    raise UsageError(f"unknown kind {kind!r}")


def _system(args) -> ToeplitzSystem:
    if getattr(args, "spec", None):
        return system_from_spec(load_spec(args.spec))
    if getattr(args, "word", None):
        try:
            return ConstantWordSystem(args.word)
        except ValueError as e:
            raise UsageError(str(e))
    raise UsageError("give --word or --spec")


def _word(args) -> HoleWord:
    if getattr(args, "spec", None):
        data = load_spec(args.spec)
        if data["kind"] != "pq":
            raise UsageError("this command needs a pq construction")
        text = data["word"]
    elif args.word:
        text = args.word
    else:
        raise UsageError("give --word or --spec")
    try:
        w = HoleWord.parse(text)
    except ValueError as e:
        raise UsageError(str(e))
    if not w.is_generator:
        raise UsageError(f"{text!r} must neither start nor end with a hole")
    for flag, val in (("p", w.p), ("q", w.q)):
        want = getattr(args, flag, None)
        if want is not None and want != val:
            raise UsageError(f"--{flag} {want} does not match {text!r} ({flag} = {val})")
    return w


# ------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    sys_ = _system(args)
    a, b = _range(args.range)
    win = sys_.window(a, b)
    if args.json:
        _emit(_dump(win.to_json()), args.out)
    else:
        _emit(win.text(), args.out)
    return EXIT_OK


def cmd_skeleton(args) -> int:
    sys_ = _system(args)
    a, b = _range(args.range)
    _emit(skeleton(sys_, args.level, a, b).text(), args.out)
    return EXIT_OK


def cmd_complexity(args) -> int:
    sys_ = _system(args)
    table = complexity_table(sys_, args.nmax)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(table.to_csv())
    if args.plot:
        with open(args.plot, "w", encoding="utf-8") as fh:
            fh.write(table.plot_data())
    summary = {"nmax": args.nmax, "exponent": table.exponent, "c1": table.c1, "c2": table.c2,
               "p_X(nmax)": table.counts()[args.nmax]}
    if args.fit:
        lo, hi = _range(args.fit)
        slope, rms = fit_exponent(table, lo, hi)
        summary["fit"] = {"range": [lo, hi], "slope": round(slope, 6), "rms": round(rms, 6)}
    _emit(_dump(summary), args.out)
    return EXIT_OK


def cmd_phi(args) -> int:
    w = _word(args)
    if not w.coprime:
        raise UsageError("phi_n needs gcd(p,q) = 1")
    cert = certify_phi(args.level, w, not args.no_minimality)
    _emit(_dump(cert.to_json()), args.out)
    ok = cert.identity_holds and (args.no_minimality or cert.minimal_power == w.q**args.level)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_roots(args) -> int:
    w = _word(args)
    if not w.coprime:
        raise UsageError("roots need gcd(p,q) = 1")
    n = args.level
    psi, a, b = root_of_shift(n, w)
    res = extensional_check(power(psi, w.q**n), shift_map(1), ConstantWordSystem(w))
    rep = {"word": w.symbols, "level": n, "a": a, "b": b, "root_of": w.q**n,
           "radius": psi.radius, "equals_shift": res.equal,
           "factors_tested": res.factors_tested, "certification": res.certification}
    _emit(_dump(rep), args.out)
    return EXIT_OK if res.equal else EXIT_FAIL


def _scale(args) -> Scale:
    try:
        if args.scale:
            with open(args.scale, encoding="utf-8") as fh:
                return Scale.from_json(fh.read())
        if args.powers:
            base, depth = (int(v) for v in args.powers.split(":"))
            return Scale.powers(base, depth)
        if args.primorial:
            return Scale.primorial(args.primorial)
        if args.factorial:
            return Scale.factorial(args.factorial)
    except (ValueError, ScaleError) as e:
        raise UsageError(f"bad scale: {e}")
    raise UsageError("give --scale, --powers, --primorial or --factorial")


def cmd_odometer(args) -> int:
    s = _scale(args)
    mult = multiplicity(s)
    tor = torsion_structure(s)
    rep = {
        "periods": [str(p) for p in s.periods],
        "multiplicity": json.loads(mult.to_json()),
        "torsion": {"cyclic_parts": [[p, o] for p, o in tor.cyclic_parts],
                    "order": tor.order, "unresolved": list(tor.unresolved)},
    }
    if args.translation is not None:
        rep["minimal_translation"] = {"m": args.translation,
                                      "minimal": is_minimal_translation(args.translation, s)}
    _emit(_dump(rep), args.out)
    return EXIT_OK


def cmd_blocks(args) -> int:
    if args.scale:
        try:
            with open(args.scale, encoding="utf-8") as fh:
                scale = Scale.from_json(fh.read())
        except (ValueError, ScaleError) as e:
            raise UsageError(f"bad scale: {e}")
    else:
        scale = blk.TOY_SCALE
    try:
        spec = blk.BlockSpec(args.k1, Fraction(args.d0), scale, args.levels, args.mode,
                             args.relaxed_c2)
        con = blk.BlockConstruction(spec)
    except blk.BlockError as e:
        raise UsageError(str(e))
    built = [lv for lv in con.levels if lv.materialized]
    levels = []
    ok = True
    for lv in con.levels:
        row = {"n": lv.n, "index": lv.index, "period": str(lv.period),
               "k": str(lv.k) if lv.k >= 0 else None, "d": lv.d, "d_hat": lv.d_hat,
               "log_k_full": lv.log_k_full, "materialized": lv.materialized}
        if lv.materialized and lv.n >= 2:
            row["c1_c2"] = blk.check_c1_c2(con, lv.n)
            row["overlap_ok"] = blk.check_trivial_overlap(con, lv.n).ok
            ok = ok and row["c1_c2"] and row["overlap_ok"]
        levels.append(row)
    freq = []
    for lv in built[:-1]:
        try:
            freq.append(blk.frequencies(con, lv.n).to_json())
        except blk.BlockError:
            pass
    if not spec.relaxed_c2:
        ok = ok and all(f["max_deviation"] == "0" for f in freq)
    rep = {
        "k1": args.k1, "d0": str(spec.d0), "mode": args.mode, "relaxed_c2": args.relaxed_c2,
        "levels": levels,
        "overlap_ok": all(r.get("overlap_ok", True) for r in levels),
        "freq_table": freq,
        "entropy_bounds": blk.entropy_lower_bound(con).to_json(),
    }
    if args.freq_plot and freq:
        with open(args.freq_plot, "w", encoding="utf-8") as fh:
            fh.write("# level block empirical predicted\n")
            for f in freq:
                for r in f["rows"]:
                    fh.write(f"{f['level']} {r['block']} {float(Fraction(r['empirical']))!r} "
                             f"{float(Fraction(r['predicted'])) if r['predicted'] else 'nan'}\n")
    _emit(_dump(rep), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_realize(args) -> int:
    try:
        ps = realize_group(args.d, args.a, args.entropy)
    except ValueError as e:
        raise UsageError(str(e))
    doc = dict(ps.spec())
    doc["report"] = ps.report
    validate_spec(doc)
    _emit(_dump(doc), args.out)
    return EXIT_OK


def cmd_verify_all(args) -> int:
    w = _word(args)
    rep = verify_all(w, args.levels, seed=args.seed, trials=args.trials)
    _emit(_dump(rep), args.out)
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toeplitz", description="Toeplitz subshift toolkit")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    def source(sp):
        sp.add_argument("--word", help="hole word such as a?b?c")
        sp.add_argument("--spec", help="construction spec (JSON)")
        sp.add_argument("--out", help="write the result here instead of stdout")

    sp = sub.add_parser("gen", help="materialize the Toeplitz point on a range")
    source(sp)
    sp.add_argument("--range", required=True, help="a:b (half open)")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("skeleton", help="skeleton at a level of the periodic structure")
    source(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--range", required=True)
    sp.set_defaults(func=cmd_skeleton)

    sp = sub.add_parser("complexity", help="word complexity table")
    source(sp)
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("--csv")
    sp.add_argument("--plot", help="two-column log-log data")
    sp.add_argument("--fit", help="n range a:b for the exponent fit")
    sp.set_defaults(func=cmd_complexity)

    for name, func, text in (("phi", cmd_phi, "certify phi_n"),
                             ("roots", cmd_roots, "root of the shift from phi_n")):
        sp = sub.add_parser(name, help=text)
        source(sp)
        sp.add_argument("--level", type=int, required=True)
        sp.add_argument("--p", type=int, help="expected word length (checked)")
        sp.add_argument("--q", type=int, help="expected hole count (checked)")
        if name == "phi":
            sp.add_argument("--no-minimality", action="store_true")
            sp.add_argument("--verify", action="store_true",
                            help="accepted for clarity; certificates are always checked")
        sp.set_defaults(func=func)

    sp = sub.add_parser("odometer", help="torsion and multiplicity of a scale")
    sp.add_argument("--scale", help="JSON array of periods (decimal strings)")
    sp.add_argument("--powers", help="base:depth")
    sp.add_argument("--primorial", type=int)
    sp.add_argument("--factorial", type=int)
    sp.add_argument("--translation", type=int, help="check minimality of +m")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_odometer)

    sp = sub.add_parser("blocks", help="block construction with trivial automorphisms")
    sp.add_argument("--k1", type=int, required=True)
    sp.add_argument("--d0", default="2")
    sp.add_argument("--scale")
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--mode", choices=["toy", "faithful"], default="toy")
    sp.add_argument("--relaxed-c2", action="store_true")
    sp.add_argument("--freq-plot")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_blocks)

    sp = sub.add_parser("realize", help="product system for Z^d + Z_a")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--entropy", choices=["zero", "positive"], default="zero")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_realize)

    sp = sub.add_parser("verify-all", help="full invariant suite for a pq word")
    source(sp)
    sp.add_argument("--levels", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=100)
    sp.set_defaults(func=cmd_verify_all)
    return p


_RANGE_FLAGS = ("--range", "--fit")


def _glue_negative(argv: list[str]) -> list[str]:
    # "--range -10:10" would read -10:10 as an option
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _RANGE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_glue_negative(argv))
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand")
        return args.func(args)
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n\n{parser.format_usage()}")
        sys.stderr.write("construction spec schema: "
                         + json.dumps(SPEC_SCHEMA, sort_keys=True) + "\n")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
