"""Command-line front end.

Exit status is 0 on success, 1 when the library raises a domain error (its
kind goes to stderr), and 2 for usage errors. Every subcommand takes
``--json`` for a machine-readable report on stdout.
"""

import argparse
import json
import sys
from contextlib import contextmanager

from . import fileformat
from .automaton import (
    WeightedAutomaton, check_local_stochasticity, evaluate, format_word, joint_matrix,
    total_mass,
)
from .decompose import tripartite
from .errors import FormatError, InputError, MassDiverges, WfaError
from .normalize import normalize
from .numerics import DEFAULT_RHO_TOL, Rational, is_mass_finite, spectral_radius
from .oracle import bounded_equiv, find_counterexample
from .sampling import sample_pa, sample_sre
from .sre import format_sre, parse_sre, state_eliminate, thompson
from .tropical import INF, TropicalAutomaton, trop_decompose, trop_evaluate


def _num(x):
    """A weight for text output."""
    if x == INF:
        return "inf"
    if isinstance(x, float):
        return repr(x)
    return str(Rational(x))


def _jnum(x):
    """A weight for JSON output: exact values as strings, floats as numbers."""
    if isinstance(x, float) and x != INF:
        return x
    return _num(x)


def _parse_word(text):
    """Whitespace separates multi-character symbols; otherwise one symbol per character."""
    if any(c.isspace() for c in text):
        return tuple(text.split())
    return tuple(text)


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _load(path):
    return fileformat.loads(_read_text(path))


def _load_weighted(path):
    a = _load(path)
    if not isinstance(a, WeightedAutomaton):
        raise FormatError(f"{path}: expected a nonneg-real automaton")
    return a


def _load_tropical(path):
    t = _load(path)
    if not isinstance(t, TropicalAutomaton):
        raise FormatError(f"{path}: expected a tropical automaton")
    return t


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


class _Out:
    """Collects a report; renders it as text lines or one JSON object."""

    def __init__(self, as_json):
        self.as_json = as_json
        self.fields = {}
        self.lines = []

    def add(self, key, value, text=None):
        self.fields[key] = value
        if text is not None:
            self.lines.append(text)

    def emit(self, stream=None):
        stream = stream or sys.stdout
        if self.as_json:
            stream.write(json.dumps(self.fields) + "\n")
        elif self.lines:
            stream.write("\n".join(self.lines) + "\n")


def cmd_eval(args, out):
    a = _load(args.file)
    word = _parse_word(args.word)
    value = trop_evaluate(a, word) if isinstance(a, TropicalAutomaton) else evaluate(a, word)
    out.add("word", list(word))
    out.add("weight", _jnum(value), _num(value))


def cmd_mass(args, out):
    a = _load_weighted(args.file)
    try:
        z = total_mass(a)
    except MassDiverges:
        out.add("mass", None, "diverges")
        out.add("finite", False)
        return
    out.add("mass", _jnum(z), _num(z))
    out.add("finite", True)


def cmd_rho(args, out):
    a = _load_weighted(args.file)
    m = joint_matrix(a)
    rho = spectral_radius(m, tol=args.tol)
    finite = is_mass_finite(m)
    out.add("rho", rho, f"rho = {rho!r}")
    out.add("mass_finite", finite,
            "mass finite (certified)" if finite else "mass not finite (certified)")


def cmd_normalize(args, out):
    a = _load_weighted(args.file)
    res = normalize(a)
    text = fileformat.dumps(res.pa)
    out.add("Z", _jnum(res.Z), f"Z = {_num(res.Z)}")
    out.add("kept_states", [a.name(q) for q in res.kept_states])
    if args.output is None and not out.as_json:
        # the automaton owns stdout; the report moves to stderr
        sys.stdout.write(text)
        sys.stderr.write("\n".join(out.lines) + "\n")
        out.lines = []
        return
    if args.output is None:
        out.add("automaton", fileformat.to_document(res.pa))
    else:
        _write(args.output, text)


def cmd_check(args, out):
    a = _load_weighted(args.file)
    rep = check_local_stochasticity(a, args.tol)
    failing = [a.name(q) for q in rep.failing_states]
    out.add("ok", rep.ok, "locally stochastic" if rep.ok else "not locally stochastic")
    out.add("initial_residual", _jnum(rep.initial_residual),
            f"initial: residual {_num(rep.initial_residual)}")
    out.add("residuals", {a.name(q): _jnum(r) for q, r in enumerate(rep.residuals)})
    for q, r in enumerate(rep.residuals):
        mark = "FAIL" if q in rep.failing_states else "ok"
        out.lines.append(f"{a.name(q)}: residual {_num(r)} {mark}")
    out.add("failing", failing)


def cmd_to_sre(args, out):
    a = _load_weighted(args.file)
    text = format_sre(state_eliminate(a))
    if args.output:
        _write(args.output, text + "\n")
    out.add("sre", text, text)


def cmd_from_sre(args, out):
    r = parse_sre(args.expr)
    pa = thompson(r)
    if args.output is None and not out.as_json:
        sys.stdout.write(fileformat.dumps(pa))
        return
    if args.output is None:
        out.add("automaton", fileformat.to_document(pa))
    else:
        _write(args.output, fileformat.dumps(pa))
        out.add("states", pa.n, f"wrote {pa.n} states to {args.output}")


def _count(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def _epsilon(text):
    try:
        q = Rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return q


def cmd_decompose(args, out):
    a = _load_weighted(args.file)
    dec = tripartite(a, args.epsilon)
    zeta = dec.zeta_exact if dec.zeta_exact is not None else dec.zeta
    text = format_sre(dec.r)
    out.add("zeta", _jnum(zeta), f"zeta = {_num(zeta)}")
    out.add("Z", _jnum(dec.Z), f"Z = {_num(dec.Z)}")
    out.add("rho", dec.rho)
    out.add("exact", dec.exact)
    if args.output:
        _write(args.output, text + "\n")
    else:
        out.add("sre", text, f"r = {text}")


def cmd_trop_decompose(args, out):
    t = _load_tropical(args.file)
    dec = trop_decompose(t)
    out.add("gamma", _jnum(dec.gamma), f"gamma = {_num(dec.gamma)}")
    out.add("c0", _jnum(dec.c0), f"c0 = {_num(dec.c0)}")
    out.add("acyclic", dec.acyclic)
    if dec.acyclic:
        out.lines.append("no cycle on an accepting path; gamma set to 0")
    ga = dec.gamma_all_cycles
    out.add("gamma_all_cycles", None if ga is None else _jnum(ga))
    if ga is not None and ga != dec.gamma:
        out.lines.append(f"gamma over all cycles = {_num(ga)}")
    if args.output:
        _write(args.output, fileformat.dumps(dec.residual))
    else:
        out.add("residual", fileformat.to_document(dec.residual))
        if not out.as_json:
            out.lines.append(fileformat.dumps(dec.residual).rstrip("\n"))


def cmd_sample(args, out):
    if args.sre:
        batch = sample_sre(parse_sre(_read_text(args.file)), args.n, args.seed)
    else:
        batch = sample_pa(_load_weighted(args.file), args.n, args.seed)
    rows = sorted(batch.counts.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))
    out.add("seed", batch.seed)
    out.add("generator", batch.generator)
    out.add("draws", batch.draws)
    out.add("words", [[list(w), c] for w, c in rows])
    out.lines.extend(f"{format_word(w)}\t{c}" for w, c in rows)


def cmd_equiv(args, out):
    a, b = _load_weighted(args.file1), _load_weighted(args.file2)
    if args.exact or args.max_len is None:
        witness = find_counterexample(a, b)
        mode = "exact"
    else:
        rep = bounded_equiv(a, b, args.max_len)
        witness = rep.witness
        mode = f"bounded({args.max_len})"
    out.add("mode", mode)
    out.add("equivalent", witness is None, "equivalent" if witness is None else "not equivalent")
    if witness is not None:
        wa, wb = evaluate(a, witness), evaluate(b, witness)
        shown = format_word(witness) or "(empty word)"
        out.add("witness", list(witness), f"witness: {shown} ({_num(wa)} vs {_num(wb)})")
        out.add("weights", [_jnum(wa), _jnum(wb)])


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    p = argparse.ArgumentParser(prog="wfanorm",
                                description="Normalise and decompose weighted automata.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.set_defaults(func=fn)
        return s

    s = add("eval", cmd_eval, "weight of one word")
    s.add_argument("file")
    s.add_argument("word", help="symbols as characters, or separated by spaces")
    s = add("mass", cmd_mass, "total mass, or 'diverges'")
    s.add_argument("file")
    s = add("rho", cmd_rho, "spectral radius estimate and finiteness verdict")
    s.add_argument("file")
    s.add_argument("--tol", type=float, default=DEFAULT_RHO_TOL)
    s = add("normalize", cmd_normalize, "probabilistic normal form")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s = add("check", cmd_check, "local stochasticity report")
    s.add_argument("file")
    s.add_argument("--tol", type=float, default=1e-9)
    s = add("to-sre", cmd_to_sre, "stochastic regular expression of a probabilistic automaton")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s = add("from-sre", cmd_from_sre, "probabilistic automaton of an expression")
    s.add_argument("expr")
    s.add_argument("-o", "--output")
    s = add("decompose", cmd_decompose, "growth rate, mass and shape")
    s.add_argument("file")
    s.add_argument("--epsilon", type=_epsilon)
    s.add_argument("-o", "--output")
    s = add("trop-decompose", cmd_trop_decompose, "cycle mean, offset and residual")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s = add("sample", cmd_sample, "seeded word sample")
    s.add_argument("file", help="automaton file, or expression file with --sre")
    s.add_argument("-n", type=_count, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--sre", action="store_true")
    s = add("equiv", cmd_equiv, "compare two automata")
    s.add_argument("file1")
    s.add_argument("file2")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--max-len", type=_count)
    g.add_argument("--exact", action="store_true")
    return p


@contextmanager
def _errors_to_stderr(as_json):
    try:
        yield
    except WfaError as e:
        if as_json:
            sys.stderr.write(json.dumps({"error": e.kind, "message": str(e)}) + "\n")
        else:
            sys.stderr.write(f"{e.kind}: {e}\n")
        raise SystemExit(1) from None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Out(args.json)
    with _errors_to_stderr(args.json):
        args.func(args, out)
    out.emit()
    return 0


if __name__ == "__main__":
    sys.exit(main())
