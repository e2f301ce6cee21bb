"""Min-plus automata: cycle mean and the tropical normal form.

A word costs the cheapest accepting path: initial + transition costs +
final. ``INF`` marks a missing weight. Weights are exact rationals.
"""

import math
from dataclasses import dataclass, field

from .automaton import as_word
from .errors import EmptyLanguage, NoCycle, UnknownSymbol
from .graph import reachable, strongly_connected_components
from .numerics import Matrix, Rational

INF = math.inf


def _coerce(x):
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    if x == INF:
        return INF
    return Rational(x)


@dataclass(frozen=True)
class TropicalAutomaton:
    alphabet: tuple
    initial: tuple
    transitions: dict
    final: tuple
    state_names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.initial)
        if len(self.final) != n:
            raise ValueError("initial and final vectors differ in length")
        if set(self.transitions) != set(self.alphabet):
            raise ValueError("transitions must have exactly one matrix per symbol")
        for a, m in self.transitions.items():
            if (m.rows, m.cols) != (n, n):
                raise ValueError(f"matrix for {a!r} has the wrong shape")

    @classmethod
    def build(cls, alphabet, n, initial, final, edges, state_names=None):
        """``edges`` holds ``(src, symbol, dst, cost)``; parallel edges keep the minimum."""
        alphabet = tuple(alphabet)
        lam = [INF] * n
        mu = [INF] * n
        for q, w in initial.items():
            lam[q] = min(lam[q], _coerce(w))
        for q, w in final.items():
            mu[q] = min(mu[q], _coerce(w))
        mats = {a: [INF] * (n * n) for a in alphabet}
        for src, a, dst, w in edges:
            if a not in mats:
                raise UnknownSymbol(f"symbol {a!r} not in alphabet")
            k = src * n + dst
            mats[a][k] = min(mats[a][k], _coerce(w))
        return cls(alphabet, tuple(lam), {a: Matrix(n, n, tuple(v)) for a, v in mats.items()},
                   tuple(mu), tuple(state_names) if state_names is not None else None)

    @property
    def n(self):
        return len(self.initial)

    def edges(self):
        for a in self.alphabet:
            m = self.transitions[a]
            for i in range(self.n):
                for j, w in enumerate(m.row(i)):
                    if w != INF:
                        yield i, a, j, w

    def name(self, q):
        return self.state_names[q] if self.state_names else f"q{q}"

    def map_weights(self, initial=None, transition=None):
        def same(x):
            return x
        fi = initial or same
        ft = transition or same
        return TropicalAutomaton(
            self.alphabet,
            tuple(x if x == INF else fi(x) for x in self.initial),
            {a: m.map(lambda x: x if x == INF else ft(x)) for a, m in self.transitions.items()},
            self.final, self.state_names)


def trop_evaluate(t, word):
    """Cheapest accepting path for ``word``; INF when there is none."""
    w = as_word(word)
    v = list(t.initial)
    n = t.n
    for s in w:
        if s not in t.transitions:
            raise UnknownSymbol(f"symbol {s!r} not in alphabet {list(t.alphabet)}")
        m = t.transitions[s]
        nxt = [INF] * n
        for i, x in enumerate(v):
            if x == INF:
                continue
            for j, c in enumerate(m.row(i)):
                if c != INF and x + c < nxt[j]:
                    nxt[j] = x + c
        v = nxt
    return min((x + f for x, f in zip(v, t.final) if x != INF and f != INF), default=INF)


def trop_joint(t):
    """Entrywise minimum over the symbol matrices."""
    n = t.n
    out = [INF] * (n * n)
    for m in t.transitions.values():
        out = [min(x, y) for x, y in zip(out, m.entries)]
    return Matrix(n, n, tuple(out))


def _successors(m):
    return [[j for j in range(m.cols) if m[i, j] != INF] for i in range(m.rows)]


def useful_states(t):
    m = trop_joint(t)
    succ = _successors(m)
    pred = [[] for _ in range(t.n)]
    for i, js in enumerate(succ):
        for j in js:
            pred[j].append(i)
    fwd = reachable([q for q, x in enumerate(t.initial) if x != INF], succ.__getitem__)
    bwd = reachable([q for q, x in enumerate(t.final) if x != INF], pred.__getitem__)
    return sorted(fwd & bwd)


def karp_cycle_mean(m, component):
    """Minimum cycle mean inside one strongly connected component (Karp).

    ``D[k][v]`` is the cheapest walk of exactly k edges from a fixed source
    to v; the answer is ``min_v max_k (D[n][v] - D[k][v]) / (n - k)``.
    Returns None for a single vertex without a self-loop.
    """
    comp = list(component)
    k = len(comp)
    if k == 1 and m[comp[0], comp[0]] == INF:
        return None
    pos = {q: i for i, q in enumerate(comp)}
    edges = [(pos[u], pos[v], m[u, v]) for u in comp for v in comp if m[u, v] != INF]
    D = [[INF] * k for _ in range(k + 1)]
    D[0][0] = Rational(0)
    for step in range(1, k + 1):
        prev, cur = D[step - 1], D[step]
        for u, v, w in edges:
            if prev[u] != INF and prev[u] + w < cur[v]:
                cur[v] = prev[u] + w
    best = None
    for v in range(k):
        if D[k][v] == INF:
            continue
        worst = max((D[k][v] - D[j][v]) / (k - j) for j in range(k) if D[j][v] != INF)
        if best is None or worst < best:
            best = worst
    return best


def _component_means(t, useful_only):
    m = trop_joint(t)
    succ = _successors(m)
    comps = strongly_connected_components(t.n, succ.__getitem__)
    keep = set(useful_states(t)) if useful_only else None
    means = []
    for comp in comps:
        if keep is not None and comp[0] not in keep:
            continue
        g = karp_cycle_mean(m, comp)
        if g is not None:
            means.append(g)
    return means


def cycle_mean(t, useful_only=True):
    """Minimum mean cost per transition over cycles of the joint graph.

    By default only cycles on some accepting path count, since others
    cannot influence any word's cost; ``useful_only=False`` takes every cycle.
    """
    means = _component_means(t, useful_only)
    if not means:
        raise NoCycle("no cycle" + (" on an accepting path" if useful_only else ""))
    return min(means)


def trop_normalize(t, gamma=None):
    """Subtract the cycle mean from every finite transition cost."""
    g = cycle_mean(t) if gamma is None else gamma
    return t.map_weights(transition=lambda x: x - g)


def min_cost(t):
    """Cheapest cost over all words (the empty word included).

    Bellman-Ford from a virtual source feeding the initial costs, restricted
    to useful states. Requires every cycle there to have nonnegative cost,
    so cheapest walks are simple and n rounds of relaxation suffice.
    """
    keep = useful_states(t)
    if not keep:
        raise EmptyLanguage("no accepting path")
    m = trop_joint(t)
    dist = {q: t.initial[q] for q in keep}
    edges = [(u, v, m[u, v]) for u in keep for v in keep if m[u, v] != INF]
    for rnd in range(len(keep) + 1):
        changed = False
        for u, v, w in edges:
            if dist[u] != INF and dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    else:
        raise ValueError("negative cycle on an accepting path; normalise first")
    return min(dist[q] + t.final[q] for q in keep if dist[q] != INF and t.final[q] != INF)


@dataclass(frozen=True)
class TropicalDecomposition:
    """``cost(w) = |w| * gamma + c0 + residual(w)``."""

    gamma: object
    c0: object
    residual: TropicalAutomaton
    acyclic: bool = False
    gamma_all_cycles: object = None


def trop_decompose(t):
    """Split off the linear growth rate and the constant offset.

    The offset is absorbed into the initial costs of the residual. An
    automaton without cycles on accepting paths gets ``gamma = 0``.
    """
    if not useful_states(t):
        raise EmptyLanguage("no accepting path")
    try:
        gamma = cycle_mean(t)
        acyclic = False
    except NoCycle:
        gamma, acyclic = Rational(0), True
    try:
        gamma_all = cycle_mean(t, useful_only=False)
    except NoCycle:
        gamma_all = None
    shifted = trop_normalize(t, gamma)
    c0 = min_cost(shifted)
    residual = shifted.map_weights(initial=lambda x: x - c0)
    return TropicalDecomposition(gamma, c0, residual, acyclic, gamma_all)
