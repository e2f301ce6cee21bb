"""Weighted automata over the nonnegative reals."""

from dataclasses import dataclass, field

from .errors import EmptyAutomaton, UnknownSymbol
from .graph import reachable, strongly_connected_components
from .numerics import (
    FLOAT_TOL, Backend, Matrix, dot, matvec, neumann_inverse, support_successors, vecmat,
)


def as_word(word):
    """Normalise a word to a tuple of symbols.

    Strings are split into characters; tuples and lists pass through.
    """
    return tuple(word)


def format_word(word):
    if all(len(s) == 1 for s in word):
        return "".join(word)
    return " ".join(word)


@dataclass(frozen=True)
class WeightedAutomaton:
    """``f(w) = initial^T M_{w1} ... M_{wn} final`` with nonnegative weights.

    ``transitions`` maps each alphabet symbol to an ``n x n`` Matrix.
    ``state_names`` is I/O metadata only; states are identified by index.
    """

    alphabet: tuple
    initial: tuple
    transitions: dict
    final: tuple
    backend: Backend = Backend.RATIONAL
    state_names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.initial)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet symbols must be distinct")
        if len(self.final) != n:
            raise ValueError("initial and final vectors differ in length")
        if set(self.transitions) != set(self.alphabet):
            raise ValueError("transitions must have exactly one matrix per symbol")
        for a, m in self.transitions.items():
            if (m.rows, m.cols) != (n, n):
                raise ValueError(f"matrix for {a!r} is {m.rows}x{m.cols}, expected {n}x{n}")
            if not m.is_nonnegative():
                raise ValueError(f"matrix for {a!r} has a negative entry")
        if any(x < 0 for x in self.initial) or any(x < 0 for x in self.final):
            raise ValueError("initial and final weights must be nonnegative")
        if self.state_names is not None and len(self.state_names) != n:
            raise ValueError("state_names length mismatch")

    @classmethod
    def build(cls, alphabet, n, initial, final, edges, backend=Backend.RATIONAL,
              state_names=None):
        """Construct from sparse data.

        ``initial``/``final`` map state index to weight; ``edges`` is an
        iterable of ``(src, symbol, dst, weight)``. Parallel edges add up.
        """
        alphabet = tuple(alphabet)
        c = backend.coerce
        z = backend.zero
        lam = [z] * n
        mu = [z] * n
        for q, w in initial.items():
            lam[q] += c(w)
        for q, w in final.items():
            mu[q] += c(w)
        mats = {a: [z] * (n * n) for a in alphabet}
        for src, a, dst, w in edges:
            if a not in mats:
                raise UnknownSymbol(f"symbol {a!r} not in alphabet")
            mats[a][src * n + dst] += c(w)
        return cls(alphabet, tuple(lam),
                   {a: Matrix(n, n, tuple(v)) for a, v in mats.items()},
                   tuple(mu), backend,
                   tuple(state_names) if state_names is not None else None)

    @property
    def n(self):
        return len(self.initial)

    state_count = n

    def edges(self):
        """Positive transitions as ``(src, symbol, dst, weight)``."""
        n = self.n
        for a in self.alphabet:
            m = self.transitions[a]
            for i in range(n):
                for j, w in enumerate(m.row(i)):
                    if w:
                        yield i, a, j, w

    def name(self, q):
        return self.state_names[q] if self.state_names else f"q{q}"

    def to_backend(self, backend):
        if backend is self.backend:
            return self
        c = backend.coerce
        return WeightedAutomaton(
            self.alphabet, tuple(c(x) for x in self.initial),
            {a: m.map(c) for a, m in self.transitions.items()},
            tuple(c(x) for x in self.final), backend, self.state_names)

    def scale_transitions(self, factor):
        return WeightedAutomaton(
            self.alphabet, self.initial,
            {a: m.scale(factor) for a, m in self.transitions.items()},
            self.final, self.backend, self.state_names)

    def permute(self, order):
        """Renumber states so that new state ``k`` is old state ``order[k]``."""
        order = list(order)
        if sorted(order) != list(range(self.n)):
            raise ValueError("not a permutation of the states")
        return self.restrict(order)

    def restrict(self, keep):
        """Sub-automaton on the states ``keep`` (in that order)."""
        keep = list(keep)
        names = tuple(self.state_names[q] for q in keep) if self.state_names else None
        return WeightedAutomaton(
            self.alphabet, tuple(self.initial[q] for q in keep),
            {a: m.submatrix(keep, keep) for a, m in self.transitions.items()},
            tuple(self.final[q] for q in keep), self.backend, names)


def _check_word(a, word):
    word = as_word(word)
    for s in word:
        if s not in a.transitions:
            raise UnknownSymbol(f"symbol {s!r} not in alphabet {list(a.alphabet)}")
    return word


def evaluate(a, word):
    """Weight of ``word``; the empty word gets ``initial . final``."""
    word = _check_word(a, word)
    v = a.initial
    for s in word:
        v = vecmat(v, a.transitions[s])
    return a.backend.coerce(0) + dot(v, a.final)


def joint_matrix(a):
    n = a.n
    total = Matrix.zeros(n, n, a.backend)
    for m in a.transitions.values():
        total = total + m
    return total


def total_mass(a):
    """Sum of the weights of all words, exactly when rational.

    Computed on the trimmed automaton, so divergence confined to states that
    lie on no accepting path does not count.
    """
    try:
        t = trim(a)
    except EmptyAutomaton:
        return a.backend.zero
    inv = neumann_inverse(joint_matrix(t))
    return a.backend.coerce(0) + dot(t.initial, matvec(inv, t.final))


def useful_states(a):
    """States reachable from the initial support that can reach the final support."""
    succ = support_successors(joint_matrix(a))
    pred = [[] for _ in range(a.n)]
    for i, js in enumerate(succ):
        for j in js:
            pred[j].append(i)
    fwd = reachable([q for q, x in enumerate(a.initial) if x > 0], succ.__getitem__)
    bwd = reachable([q for q, x in enumerate(a.final) if x > 0], pred.__getitem__)
    return sorted(fwd & bwd)


def trim(a):
    keep = useful_states(a)
    if not keep:
        raise EmptyAutomaton("no state lies on an accepting path")
    if len(keep) == a.n:
        return a
    return a.restrict(keep)


@dataclass(frozen=True)
class StochasticityReport:
    """Outcome of the local-stochasticity check.

    ``residuals[q]`` is ``final(q) + outgoing(q) - 1``; ``initial_residual``
    is ``sum(initial) - 1``.
    """

    ok: bool
    initial_residual: object
    residuals: tuple
    failing_states: tuple

    def __bool__(self):
        return self.ok


def row_sums(a):
    sums = [a.final[q] for q in range(a.n)]
    for m in a.transitions.values():
        for q in range(a.n):
            sums[q] += sum(m.row(q))
    return sums


def check_local_stochasticity(a, tol=FLOAT_TOL):
    one = a.backend.one
    init_res = sum(a.initial, a.backend.zero) - one
    residuals = tuple(s - one for s in row_sums(a))
    if a.backend is Backend.RATIONAL:
        bad = lambda r: r != 0
    else:
        bad = lambda r: abs(r) > tol
    failing = tuple(q for q, r in enumerate(residuals) if bad(r))
    ok = not bad(init_res) and not failing
    return StochasticityReport(ok, init_res, residuals, failing)


@dataclass(frozen=True)
class Condensation:
    """SCCs of the positive-weight support graph in topological order.

    Edges between distinct components only go from lower to higher index.
    """

    components: tuple
    assignment: tuple

    @property
    def order(self):
        return [q for comp in self.components for q in comp]

    def __len__(self):
        return len(self.components)


def condensation_of_matrix(m):
    succ = support_successors(m)
    comps = strongly_connected_components(m.rows, succ.__getitem__)
    comps.reverse()
    assignment = [0] * m.rows
    for k, comp in enumerate(comps):
        for q in comp:
            assignment[q] = k
    return Condensation(tuple(tuple(c) for c in comps), tuple(assignment))


def condensation(a):
    return condensation_of_matrix(joint_matrix(a))

