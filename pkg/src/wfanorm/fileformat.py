"""JSON file format for weighted and tropical automata.

A document looks like::

    {
      "semiring": "nonneg-real",
      "backend": "rational",
      "alphabet": ["a", "b"],
      "states": ["q0", "q1"],
      "initial": {"q0": "1"},
      "final": {"q1": "1/2"},
      "transitions": [{"from": "q0", "symbol": "a", "to": "q1", "weight": "2/5"}]
    }

``states`` may also be a count, in which case states are referred to by
their index. Rational weights are strings ``"p/q"`` (integers and exact
decimals are accepted on input), float weights are JSON numbers, and a
tropical weight may be ``"inf"``. Entries that are zero (or ``inf`` in the
tropical case) may be omitted and are never written.

``dumps`` is canonical, so ``dumps(loads(dumps(a))) == dumps(a)`` and
``loads(dumps(a)) == a`` with the exact same numbers.
"""

import json
import math

from .automaton import WeightedAutomaton
from .errors import FormatError, UnknownSymbol
from .numerics import Backend, Rational
from .tropical import INF, TropicalAutomaton

NONNEG = "nonneg-real"
TROPICAL = "tropical"


def _fail(message, path):
    raise FormatError(f"{path}: {message}")


def _weight(x, backend, path, tropical=False):
    if isinstance(x, bool) or x is None:
        _fail(f"expected a number, got {json.dumps(x)}", path)
    if tropical and isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    if isinstance(x, float):
        if not math.isfinite(x):
            _fail("non-finite number", path)
        if backend is Backend.RATIONAL:
            _fail("float literal in a rational file; write it as a \"p/q\" string", path)
        return x
    if isinstance(x, int):
        return backend.coerce(x)
    if isinstance(x, str):
        try:
            q = Rational(x.strip())
        except (ValueError, ZeroDivisionError):
            _fail(f"cannot read {x!r} as a rational", path)
        return q if backend is Backend.RATIONAL else float(q)
    _fail(f"expected a number, got {json.dumps(x)}", path)


def _states(doc):
    states = doc.get("states")
    if isinstance(states, int) and not isinstance(states, bool) and states >= 0:
        return states, None, {str(i): i for i in range(states)}
    if isinstance(states, list) and all(isinstance(s, str) for s in states):
        if len(set(states)) != len(states):
            _fail("duplicate state name", "states")
        return len(states), tuple(states), {s: i for i, s in enumerate(states)}
    _fail("expected a state count or a list of state names", "states")


def _state(index, ref, path):
    key = str(ref) if isinstance(ref, int) and not isinstance(ref, bool) else ref
    if not isinstance(key, str) or key not in index:
        _fail(f"unknown state {json.dumps(ref)}", path)
    return index[key]


def _parse_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, e.lineno, e.colno) from None


def loads(text):
    """Parse a document into a WeightedAutomaton or TropicalAutomaton."""
    doc = _parse_json(text)
    if not isinstance(doc, dict):
        _fail("top level must be an object", "$")
    semiring = doc.get("semiring", NONNEG)
    if semiring not in (NONNEG, TROPICAL):
        _fail(f"unknown semiring {semiring!r}", "semiring")
    tropical = semiring == TROPICAL
    backend_name = doc.get("backend", "rational")
    try:
        backend = Backend(backend_name)
    except ValueError:
        _fail(f"unknown backend {backend_name!r}", "backend")
    if tropical and backend is not Backend.RATIONAL:
        _fail("tropical automata use the rational backend", "backend")
    alphabet = doc.get("alphabet")
    if not isinstance(alphabet, list) or not all(isinstance(s, str) and s for s in alphabet):
        _fail("expected a list of nonempty strings", "alphabet")
    n, names, index = _states(doc)

    def vector(key):
        raw = doc.get(key, {})
        if not isinstance(raw, dict):
            _fail("expected an object mapping states to weights", key)
        return {_state(index, q, f"{key}.{q}"): _weight(w, backend, f"{key}.{q}", tropical)
                for q, w in raw.items()}

    initial, final = vector("initial"), vector("final")
    raw_edges = doc.get("transitions", [])
    if not isinstance(raw_edges, list):
        _fail("expected a list", "transitions")
    edges = []
    for k, e in enumerate(raw_edges):
        path = f"transitions[{k}]"
        if not isinstance(e, dict) or set(e) != {"from", "symbol", "to", "weight"}:
            _fail("expected an object with keys from, symbol, to, weight", path)
        if e["symbol"] not in alphabet:
            _fail(f"symbol {e['symbol']!r} not in alphabet", path + ".symbol")
        edges.append((_state(index, e["from"], path + ".from"), e["symbol"],
                      _state(index, e["to"], path + ".to"),
                      _weight(e["weight"], backend, path + ".weight", tropical)))
    try:
        if tropical:
            return TropicalAutomaton.build(alphabet, n, initial, final, edges, names)
        return WeightedAutomaton.build(alphabet, n, initial, final, edges, backend, names)
    except (ValueError, UnknownSymbol) as e:
        raise FormatError(str(e)) from None


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def format_weight(x):
    """A weight as it appears in a document: ``"p/q"``, a float, or ``"inf"``."""
    if x == INF:
        return "inf"
    if isinstance(x, float):
        return x
    return str(Rational(x))


def to_document(a):
    tropical = isinstance(a, TropicalAutomaton)
    absent = INF if tropical else 0
    names = a.state_names
    ref = (lambda q: names[q]) if names else (lambda q: str(q))
    return {
        "semiring": TROPICAL if tropical else NONNEG,
        "backend": "rational" if tropical else a.backend.value,
        "alphabet": list(a.alphabet),
        "states": list(names) if names else a.n,
        "initial": {ref(q): format_weight(w) for q, w in enumerate(a.initial) if w != absent},
        "final": {ref(q): format_weight(w) for q, w in enumerate(a.final) if w != absent},
        "transitions": [
            {"from": ref(i), "symbol": s, "to": ref(j), "weight": format_weight(w)}
            for i, s, j, w in a.edges()
        ],
    }


def dumps(a):
    return json.dumps(to_document(a), indent=2, ensure_ascii=False) + "\n"


def dump(a, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(a))
