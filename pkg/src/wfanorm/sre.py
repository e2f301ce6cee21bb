"""Stochastic regular expressions.

An SRE denotes a probability distribution over words:

* ``Dirac(a)`` puts all mass on the one-letter word ``a``;
* ``Epsilon()`` puts all mass on the empty word;
* ``Choice(alpha, l, r)`` is the mixture ``alpha*l + (1-alpha)*r``;
* ``Concat(l, r)`` is the Cauchy product;
* ``Star(body, alpha)`` iterates ``body`` k >= 0 times with probability
  ``(1-alpha) * alpha**k``; ``alpha`` is the continuation probability and the
  body must give the empty word probability zero.

Text syntax (``parse_sre`` / ``format_sre``)::

    expr     := weighted ('+' weighted)*
    weighted := NUMBER ':' concat | concat
    concat   := atom+
    atom     := SYMBOL | '(' expr ')' | '()' | atom '*' '[' NUMBER ']'

NUMBER is ``p/q``, an integer, or a decimal float; SYMBOL is one ASCII
letter or a double-quoted string.
"""

import json
import re
import sys
from dataclasses import dataclass

from .automaton import (
    WeightedAutomaton, as_word, check_local_stochasticity, total_mass, useful_states,
)
from .errors import EmptyAutomaton, IllFormedSre, NotStochastic, SreSyntaxError
from .numerics import Backend, Rational

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class Dirac:
    symbol: str


@dataclass(frozen=True)
class Choice:
    alpha: object
    left: object
    right: object


@dataclass(frozen=True)
class Concat:
    left: object
    right: object


@dataclass(frozen=True)
class Star:
    body: object
    alpha: object


SRE_TYPES = (Epsilon, Dirac, Choice, Concat, Star)


def _children(r):
    if isinstance(r, (Choice, Concat)):
        return (r.left, r.right)
    if isinstance(r, Star):
        return (r.body,)
    return ()


def _postorder(r):
    """Distinct nodes (by identity), children before parents."""
    seen = set()
    out = []
    stack = [(r, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in _children(node):
            if id(c) not in seen:
                stack.append((c, False))
    return out


def size(r):
    """Number of nodes of the expression tree (shared subtrees counted per use)."""
    counts = {}
    for node in _postorder(r):
        counts[id(node)] = 1 + sum(counts[id(c)] for c in _children(node))
    return counts[id(r)]


def symbols(r):
    return sorted({node.symbol for node in _postorder(r) if isinstance(node, Dirac)})


def backend_of_sre(r):
    for node in _postorder(r):
        if isinstance(node, (Choice, Star)) and isinstance(node.alpha, float):
            return Backend.FLOAT
    return Backend.RATIONAL


def empty_word_mass(r):
    vals = {}
    for node in _postorder(r):
        if isinstance(node, Epsilon):
            v = 1
        elif isinstance(node, Dirac):
            v = 0
        elif isinstance(node, Choice):
            v = node.alpha * vals[id(node.left)] + (1 - node.alpha) * vals[id(node.right)]
        elif isinstance(node, Concat):
            v = vals[id(node.left)] * vals[id(node.right)]
        else:
            v = 1 - node.alpha
        vals[id(node)] = v
    return vals[id(r)]


def check_well_formed(r):
    """Raise IllFormedSre unless every parameter lies in (0, 1) and no star
    body can produce the empty word."""
    eps = {}
    for node in _postorder(r):
        if not isinstance(node, SRE_TYPES):
            raise IllFormedSre(f"not an SRE node: {node!r}")
        if isinstance(node, (Choice, Star)) and not 0 < node.alpha < 1:
            raise IllFormedSre(f"parameter {node.alpha} outside (0, 1)")
        if isinstance(node, Epsilon):
            v = 1
        elif isinstance(node, Dirac):
            v = 0
        elif isinstance(node, Choice):
            v = node.alpha * eps[id(node.left)] + (1 - node.alpha) * eps[id(node.right)]
        elif isinstance(node, Concat):
            v = eps[id(node.left)] * eps[id(node.right)]
        else:
            if eps[id(node.body)] != 0:
                raise IllFormedSre("star body assigns positive mass to the empty word")
            v = 1 - node.alpha
        eps[id(node)] = v


# -- semantics ---------------------------------------------------------------

def eval_sre(r, word):
    """Probability of ``word`` under ``r``.

    Dynamic programming over substring spans: every node gets a table
    ``T[i][j] = [[node]](word[i:j])``; shared subtrees are computed once.
    """
    check_well_formed(r)
    w = as_word(word)
    n = len(w)
    zero = Backend.RATIONAL.zero if backend_of_sre(r) is Backend.RATIONAL else 0.0
    tables = {}
    for node in _postorder(r):
        t = [[zero] * (n + 1) for _ in range(n + 1)]
        if isinstance(node, Epsilon):
            for i in range(n + 1):
                t[i][i] = zero + 1
        elif isinstance(node, Dirac):
            for i in range(n):
                if w[i] == node.symbol:
                    t[i][i + 1] = zero + 1
        elif isinstance(node, Choice):
            a = node.alpha
            l, rr = tables[id(node.left)], tables[id(node.right)]
            for i in range(n + 1):
                for j in range(i, n + 1):
                    t[i][j] = a * l[i][j] + (1 - a) * rr[i][j]
        elif isinstance(node, Concat):
            l, rr = tables[id(node.left)], tables[id(node.right)]
            for i in range(n + 1):
                for j in range(i, n + 1):
                    acc = zero
                    for k in range(i, j + 1):
                        x = l[i][k]
                        if x:
                            y = rr[k][j]
                            if y:
                                acc += x * y
                    t[i][j] = acc
        else:
            a = node.alpha
            b = tables[id(node.body)]
            for j in range(n + 1):
                t[j][j] = 1 - a + zero
                for i in range(j - 1, -1, -1):
                    acc = zero
                    for k in range(i + 1, j + 1):
                        x = b[i][k]
                        if x:
                            y = t[k][j]
                            if y:
                                acc += x * y
                    t[i][j] = a * acc
        tables[id(node)] = t
    return tables[id(r)][0][n]


def length_distribution(r, max_len):
    """``out[k]`` = total probability of words of length ``k``, for k <= max_len."""
    check_well_formed(r)
    zero = Backend.RATIONAL.zero if backend_of_sre(r) is Backend.RATIONAL else 0.0
    L = max_len
    vecs = {}
    for node in _postorder(r):
        v = [zero] * (L + 1)
        if isinstance(node, Epsilon):
            v[0] = zero + 1
        elif isinstance(node, Dirac):
            if L >= 1:
                v[1] = zero + 1
        elif isinstance(node, Choice):
            a = node.alpha
            l, rr = vecs[id(node.left)], vecs[id(node.right)]
            v = [a * x + (1 - a) * y for x, y in zip(l, rr)]
        elif isinstance(node, Concat):
            l, rr = vecs[id(node.left)], vecs[id(node.right)]
            for i, x in enumerate(l):
                if x:
                    for j in range(L + 1 - i):
                        if rr[j]:
                            v[i + j] += x * rr[j]
        else:
            a = node.alpha
            b = vecs[id(node.body)]
            v[0] = 1 - a + zero
            for k in range(1, L + 1):
                acc = zero
                for m in range(1, k + 1):
                    if b[m]:
                        acc += b[m] * v[k - m]
                v[k] = a * acc
        vecs[id(node)] = v
    return vecs[id(r)]


def partial_mass(r, max_len):
    """Total probability of the words of length at most ``max_len``."""
    return sum(length_distribution(r, max_len))


# -- text syntax -------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+|(?:\.\d+)?(?:[eE][-+]?\d+)?))
  | (?P<sym>[A-Za-z])
  | (?P<quoted>"(?:[^"\\]|\\.)*")
  | (?P<eps>ε)
  | (?P<op>[()+:*\[\]])
""", re.VERBOSE)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SreSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", pos))
    return out


def _number(tok):
    s = tok
    if "." in s or "e" in s or "E" in s:
        return float(s)
    return Rational(s)


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            raise SreSyntaxError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        r = self.expr()
        self.take("end")
        return r

    def expr(self):
        start = self.peek()[2]
        terms = [self.weighted()]
        while self.peek()[1] == "+":
            self.take()
            terms.append(self.weighted())
        if len(terms) == 1:
            w, node = terms[0]
            if w is not None and w != 1:
                raise SreSyntaxError(f"a single term must have weight 1, got {w}", start)
            return node
        if any(w is None for w, _ in terms):
            raise SreSyntaxError("every term of a sum needs a weight", start)
        weights = [w for w, _ in terms]
        total = sum(weights)
        exact = all(not isinstance(w, float) for w in weights)
        if (exact and total != 1) or (not exact and abs(total - 1) > 1e-9):
            raise SreSyntaxError(f"weights sum to {total}, not 1", start)
        node = terms[-1][1]
        rem_weights = []
        rem = 1
        for w in weights[:-1]:
            rem_weights.append(rem)
            rem = rem - w
        for (w, t), remaining in zip(reversed(terms[:-1]), reversed(rem_weights)):
            node = Choice(w / remaining, t, node)
        return node

    def weighted(self):
        if self.peek()[0] == "num":
            w = _number(self.take()[1])
            self.take("op", ":")
            return w, self.concat()
        return None, self.concat()

    def concat(self):
        atoms = [self.atom()]
        while self.peek()[0] in ("sym", "quoted", "eps") or self.peek()[1] == "(":
            atoms.append(self.atom())
        node = atoms[-1]
        for a in reversed(atoms[:-1]):
            node = Concat(a, node)
        return node

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "sym":
            self.take()
            node = Dirac(value)
        elif kind == "quoted":
            self.take()
            node = Dirac(json.loads(value))
        elif kind == "eps":
            self.take()
            node = Epsilon()
        elif value == "(":
            self.take()
            if self.peek()[1] == ")":
                self.take()
                node = Epsilon()
            else:
                node = self.expr()
                self.take("op", ")")
        else:
            raise SreSyntaxError(f"unexpected {value or 'end of input'!r}", pos)
        while self.peek()[1] == "*":
            self.take()
            self.take("op", "[")
            alpha = _number(self.take("num")[1])
            self.take("op", "]")
            node = Star(node, alpha)
        return node


def parse_sre(text):
    return _Parser(text).parse()


def _fmt_num(x):
    if isinstance(x, float):
        return repr(x)
    x = Rational(x)
    return str(x)


def _fmt_symbol(s):
    if len(s) == 1 and s.isascii() and s.isalpha():
        return s
    return json.dumps(s)


def format_sre(r):
    """Render ``r`` in the text syntax; ``parse_sre`` inverts it exactly.

    Rational right-nested choices are flattened into one weighted sum;
    float choices stay binary so that no weight has to be recomputed.
    """
    return _fmt_sum(r)


def _fmt_sum(r):
    if not isinstance(r, Choice):
        return _fmt_concat(r)
    if isinstance(r.alpha, float):
        return f"{_fmt_num(r.alpha)}:{_fmt_concat(r.left)} + {_fmt_num(1 - r.alpha)}:{_fmt_concat(r.right)}"
    terms = []
    rem = Rational(1)
    node = r
    while isinstance(node, Choice) and not isinstance(node.alpha, float):
        terms.append((rem * node.alpha, node.left))
        rem = rem * (1 - node.alpha)
        node = node.right
    terms.append((rem, node))
    return " + ".join(f"{_fmt_num(w)}:{_fmt_concat(t)}" for w, t in terms)


def _fmt_concat(r):
    if isinstance(r, Concat):
        left = r.left
        head = f"({_fmt_sum(left)})" if isinstance(left, Concat) else _fmt_atom(left)
        return head + _fmt_concat(r.right)
    return _fmt_atom(r)


def _fmt_atom(r):
    if isinstance(r, Dirac):
        return _fmt_symbol(r.symbol)
    if isinstance(r, Epsilon):
        return "()"
    if isinstance(r, Star):
        return f"{_fmt_atom(r.body)}*[{_fmt_num(r.alpha)}]"
    return f"({_fmt_sum(r)})"


# -- automaton -> expression ---------------------------------------------------

def _cat(*parts):
    parts = [p for p in parts if p is not None]
    if not parts:
        return None
    node = parts[-1]
    for p in reversed(parts[:-1]):
        node = Concat(p, node)
    return node


def _mix(alpha, left, right):
    return Choice(alpha, Epsilon() if left is None else left,
                  Epsilon() if right is None else right)


def state_eliminate(pa, order=None, tol=1e-9):
    """Convert a probabilistic automaton into an equivalent SRE.

    Fresh source and sink nodes are attached through the initial and final
    weights; each edge carries a pair ``(probability, expression)`` where the
    expression is a distribution (``None`` stands for the empty word).
    Removing state k with self-return probability s rewires every path
    i -> k -> j into probability ``p_ik * p_kj / (1 - s)`` and expression
    ``r_ik . (self_k)*[s] . r_kj``; parallel edges merge into a Choice
    weighted by their probabilities.

    ``order`` fixes the elimination order; by default the state minimising
    in-degree times out-degree goes next.
    """
    if not useful_states(pa):
        raise EmptyAutomaton("no accepting path")
    report = check_local_stochasticity(pa, tol)
    if not report.ok:
        raise NotStochastic(f"not locally stochastic at states {list(report.failing_states)}")
    mass = total_mass(pa)
    if not pa.backend.close(mass, 1, tol):
        raise NotStochastic(f"total probability is {mass}, not 1: mass leaks into dead states")
    n = pa.n
    src, snk = n, n + 1
    out_edges = {v: {} for v in range(n + 2)}
    in_edges = {v: {} for v in range(n + 2)}

    def put(i, j, p, e):
        if not p:
            return
        old = out_edges[i].get(j)
        if old is not None:
            q, f = old
            total = q + p
            p, e = total, _mix(q / total, f, e)
        out_edges[i][j] = (p, e)
        in_edges[j][i] = (p, e)

    for q in range(n):
        put(src, q, pa.initial[q], None)
        put(q, snk, pa.final[q], None)
    for i in range(n):
        for j in range(n):
            labelled = [(pa.transitions[a][i, j], Dirac(a)) for a in pa.alphabet
                        if pa.transitions[a][i, j]]
            if not labelled:
                continue
            p, e = labelled[-1]
            for w, d in reversed(labelled[:-1]):
                e = Choice(w / (w + p), d, e)
                p = w + p
            put(i, j, p, e)

    remaining = list(range(n))
    if order is not None:
        order = list(order)
        if sorted(order) != remaining:
            raise ValueError("order must be a permutation of the states")
    while remaining:
        if order is not None:
            k = order[len(order) - len(remaining)]
        else:
            k = min(remaining, key=lambda v: (
                len([u for u in in_edges[v] if u != v]) * len([u for u in out_edges[v] if u != v]), v))
        remaining.remove(k)
        s, self_e = out_edges[k].pop(k, (0, None))
        in_edges[k].pop(k, None)
        loop = Star(self_e, s) if s else None
        ins = list(in_edges[k].items())
        outs = list(out_edges[k].items())
        for i, _ in ins:
            del out_edges[i][k]
        for j, _ in outs:
            del in_edges[j][k]
        in_edges[k].clear()
        out_edges[k].clear()
        for i, (p_ik, e_ik) in ins:
            for j, (p_kj, e_kj) in outs:
                put(i, j, p_ik * p_kj / (1 - s), _cat(e_ik, loop, e_kj))

    if snk not in out_edges[src]:
        raise EmptyAutomaton("no accepting path")
    p, e = out_edges[src][snk]
    if not pa.backend.close(p, 1, tol):
        raise NotStochastic(f"source-to-sink probability is {p}, not 1")
    return Epsilon() if e is None else e


# -- expression -> automaton ------------------------------------------------------

class _Builder:
    def __init__(self):
        self.count = 0
        self.letters = []   # (src, symbol, dst, p)
        self.eps = {}       # src -> list of (dst, p)

    def state(self):
        self.count += 1
        return self.count - 1

    def build(self, r):
        """Return (start, finish) of a fragment with all mass leaving via finish."""
        if isinstance(r, Epsilon):
            s = self.state()
            return s, s
        if isinstance(r, Dirac):
            s, f = self.state(), self.state()
            self.letters.append((s, r.symbol, f, 1))
            return s, f
        if isinstance(r, Choice):
            s, f = self.state(), self.state()
            s1, f1 = self.build(r.left)
            s2, f2 = self.build(r.right)
            self.eps.setdefault(s, []).extend([(s1, r.alpha), (s2, 1 - r.alpha)])
            self.eps.setdefault(f1, []).append((f, 1))
            self.eps.setdefault(f2, []).append((f, 1))
            return s, f
        if isinstance(r, Concat):
            s1, f1 = self.build(r.left)
            s2, f2 = self.build(r.right)
            self.eps.setdefault(f1, []).append((s2, 1))
            return s1, f2
        # star: decision node loops back after each body run
        dec, f = self.state(), self.state()
        s1, f1 = self.build(r.body)
        self.eps.setdefault(dec, []).extend([(s1, r.alpha), (f, 1 - r.alpha)])
        self.eps.setdefault(f1, []).append((dec, 1))
        return dec, f


def thompson(r, alphabet=None):
    """Probabilistic automaton for ``r``.

    The inductive construction uses internal empty-word transitions, which
    are then removed: well-formedness rules out empty-word cycles, so the
    closure is computed along a topological order of the empty-word graph.
    Only the start state and the targets of letter transitions survive.
    """
    check_well_formed(r)
    backend = backend_of_sre(r)
    one = backend.one
    b = _Builder()
    start, finish = b.build(r)
    closure = _epsilon_closure(b, backend)
    keep = [start] + sorted({dst for _, _, dst, _ in b.letters} - {start})
    index = {q: k for k, q in enumerate(keep)}
    if alphabet is None:
        alphabet = symbols(r)
    alphabet = tuple(alphabet)
    out_letters = {}
    for s, a, d, p in b.letters:
        out_letters.setdefault(s, []).append((a, d, p))
    edges = []
    final = {}
    for q in keep:
        for mid, c in closure[q].items():
            if mid == finish:
                final[index[q]] = final.get(index[q], 0) + c * one
            for a, d, p in out_letters.get(mid, ()):
                edges.append((index[q], a, index[d], c * p * one))
    return WeightedAutomaton.build(alphabet, len(keep), {0: one}, final, edges, backend)


def _epsilon_closure(b, backend):
    """closure[q][m] = probability of moving q -> m using empty-word steps only."""
    closure = {}
    state = {}  # 1 = in progress, 2 = done
    one = backend.one
    for root in range(b.count):
        if root in closure:
            continue
        stack = [(root, iter(b.eps.get(root, ())))]
        state[root] = 1
        while stack:
            q, it = stack[-1]
            pushed = False
            for d, _ in it:
                st = state.get(d)
                if st == 1:
                    raise IllFormedSre("empty-word cycle in construction")
                if st is None:
                    state[d] = 1
                    stack.append((d, iter(b.eps.get(d, ()))))
                    pushed = True
                    break
            if pushed:
                continue
            stack.pop()
            acc = {q: one}
            for d, p in b.eps.get(q, ()):
                for m, c in closure[d].items():
                    acc[m] = acc.get(m, 0) + p * c
            closure[q] = acc
            state[q] = 2
    return closure
