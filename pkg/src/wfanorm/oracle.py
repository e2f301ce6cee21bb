"""Independent checks: brute-force enumeration and automaton equivalence."""

from collections import deque
from dataclasses import dataclass

from .automaton import WeightedAutomaton
from .errors import BudgetExceeded, FloatBackendUnsupported
from .numerics import FLOAT_TOL, Backend, Matrix, dot, vecmat

MAX_WORDS = 10**6


def words_up_to(alphabet, max_len):
    """All words of length <= max_len in shortlex order, as tuples."""
    layer = [()]
    yield ()
    for _ in range(max_len):
        layer = [w + (a,) for w in layer for a in alphabet]
        yield from layer


def _budget(alphabet, max_len, budget):
    if len(alphabet) ** max_len > budget:
        raise BudgetExceeded(f"|alphabet|^{max_len} exceeds {budget}")


def enumerate_weights(a, max_len, budget=MAX_WORDS):
    """Weights of every word of length <= max_len with nonzero weight.

    Plain forward products ``initial . M_w``; prefixes whose forward vector
    vanishes are pruned since every extension has weight zero.
    """
    _budget(a.alphabet, max_len, budget)
    out = {}
    frontier = [((), a.initial)]
    for depth in range(max_len + 1):
        nxt = []
        for w, v in frontier:
            x = dot(v, a.final)
            if x:
                out[w] = x
            if depth < max_len:
                for s in a.alphabet:
                    u = vecmat(v, a.transitions[s])
                    if any(u):
                        nxt.append((w + (s,), u))
        frontier = nxt
    return out


@dataclass(frozen=True)
class EquivalenceReport:
    equal: bool
    witness: tuple = None
    left: object = None
    right: object = None

    def __bool__(self):
        return self.equal


def _close(x, y, exact, tol):
    if exact:
        return x == y
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def bounded_equiv(a, b, max_len, tol=FLOAT_TOL, budget=MAX_WORDS):
    """Compare two automata on all words up to ``max_len``.

    Exact on rationals, relative tolerance ``tol`` otherwise. Reports the
    first differing word in shortlex order.
    """
    if set(a.alphabet) != set(b.alphabet):
        alphabet = tuple(sorted(set(a.alphabet) | set(b.alphabet)))
    else:
        alphabet = a.alphabet
    exact = a.backend is Backend.RATIONAL and b.backend is Backend.RATIONAL
    wa = enumerate_weights(_widen(a, alphabet), max_len, budget)
    wb = enumerate_weights(_widen(b, alphabet), max_len, budget)
    diffs = [w for w in set(wa) | set(wb) if not _close(wa.get(w, 0), wb.get(w, 0), exact, tol)]
    if not diffs:
        return EquivalenceReport(True)
    w = min(diffs, key=lambda w: (len(w), [alphabet.index(s) for s in w]))
    return EquivalenceReport(False, w, wa.get(w, 0), wb.get(w, 0))


def _widen(a, alphabet):
    """Same automaton over a larger alphabet (new symbols get zero matrices)."""
    if tuple(a.alphabet) == tuple(alphabet):
        return a
    mats = {s: a.transitions.get(s) or Matrix.zeros(a.n, a.n, a.backend) for s in alphabet}
    return WeightedAutomaton(tuple(alphabet), a.initial, mats, a.final, a.backend, a.state_names)


def find_counterexample(a, b):
    """A word on which the two automata differ, or None if they are equal.

    Forward-space method over the disjoint union: explore vectors
    ``(initial_A M^A_w, initial_B M^B_w)`` breadth first, keeping only those
    linearly independent of the ones already kept. At most ``n_A + n_B``
    vectors are kept. Every kept vector is stored as computed, so it stays
    nonnegative; the two halves are compared against their own final vectors
    separately, so no negated automaton is ever formed. The automata agree
    everywhere iff they agree on the words of all kept vectors.
    """
    if a.backend is not Backend.RATIONAL or b.backend is not Backend.RATIONAL:
        raise FloatBackendUnsupported("exact equivalence needs the rational backend")
    alphabet = tuple(a.alphabet) + tuple(s for s in b.alphabet if s not in a.alphabet)
    a, b = _widen(a, alphabet), _widen(b, alphabet)
    na = a.n
    echelon = {}  # pivot column -> reduced row with 1 at the pivot
    queue = deque([((), tuple(a.initial), tuple(b.initial))])
    while queue:
        w, va, vb = queue.popleft()
        if not _independent(echelon, va + vb):
            continue
        if dot(va, a.final) != dot(vb, b.final):
            return w
        for s in alphabet:
            queue.append((w + (s,), vecmat(va, a.transitions[s]), vecmat(vb, b.transitions[s])))
        if len(echelon) > na + b.n:
            raise AssertionError("basis larger than the state space")
    return None


def _independent(echelon, vec):
    """Reduce ``vec`` against the row-echelon basis; add it if independent.

    Rows are sparse dicts whose first nonzero column is their pivot, so one
    ascending pass over the pivots clears every pivot column of ``vec``.
    """
    v = {j: x for j, x in enumerate(vec) if x}
    for col in sorted(echelon):
        c = v.get(col)
        if c:
            for j, y in echelon[col].items():
                x = v.get(j, 0) - c * y
                if x:
                    v[j] = x
                else:
                    v.pop(j, None)
    if not v:
        return False
    pivot = min(v)
    p = v[pivot]
    echelon[pivot] = {j: x / p for j, x in v.items()}
    return True


def exact_equiv(a, b):
    """Decide ``f_A == f_B`` exactly (rational backend only)."""
    return find_counterexample(a, b) is None
