"""Seeded word sampling from probabilistic automata and SREs.

Randomness comes from numpy's PCG64 bit generator. Each decision draws one
uniform integer ``u`` in ``[0, 2**53)`` and picks the first outcome whose
cumulative probability ``c`` satisfies ``u < c * 2**53``. The thresholds
``ceil(c * 2**53)`` are precomputed as integers from the exact row
distribution, so no float rounding enters the decision.
"""

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .automaton import check_local_stochasticity, total_mass
from .errors import NotStochastic
from .numerics import Rational, dot, vecmat
from .sre import Choice, Concat, Dirac, Epsilon, check_well_formed

GENERATOR_ID = "numpy.PCG64/u53-inverse-cdf"
RESOLUTION = 2 ** 53
_BLOCK = 1 << 16


@dataclass(frozen=True)
class SampleBatch:
    counts: dict
    seed: int
    generator: str
    draws: int

    def most_common(self, k=None):
        return Counter(self.counts).most_common(k)


class _Uniform:
    """Buffered stream of integers in [0, 2**53)."""

    def __init__(self, seed):
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.buf = ()
        self.pos = 0

    def draw(self):
        if self.pos == len(self.buf):
            self.buf = self.rng.integers(0, RESOLUTION, size=_BLOCK, dtype=np.int64).tolist()
            self.pos = 0
        self.pos += 1
        return self.buf[self.pos - 1]


def _threshold(c):
    q = Rational(c)
    return math.ceil(q * RESOLUTION)


def _thresholds(probs):
    cum = Rational(0)
    out = []
    for p in probs:
        cum += Rational(p)
        out.append(_threshold(cum))
    # the last outcome absorbs rounding of float rows
    if out:
        out[-1] = RESOLUTION
    return out


def _pick(thresholds, u):
    return bisect_right(thresholds, u)


def _require_stochastic(pa, tol=1e-9):
    report = check_local_stochasticity(pa, tol)
    if not report.ok:
        raise NotStochastic(f"not locally stochastic at states {list(report.failing_states)}")
    mass = total_mass(pa)
    if not pa.backend.close(mass, 1, tol):
        raise NotStochastic(f"total probability is {mass}; some walks never stop")


def sample_pa(pa, count, seed):
    """Draw ``count`` words by walking the automaton.

    Start state from the initial distribution; at each state either stop
    (with the final weight) or take a labelled transition, by inverse
    transform over that state's row.
    """
    _require_stochastic(pa)
    n = pa.n
    start_states = [q for q in range(n) if pa.initial[q]]
    start_thr = _thresholds([pa.initial[q] for q in start_states])
    rows = []
    for q in range(n):
        outcomes = [None] if pa.final[q] else []
        probs = [pa.final[q]] if pa.final[q] else []
        for a in pa.alphabet:
            for j, w in pa.transitions[a].sparse_rows[q]:
                outcomes.append((a, j))
                probs.append(w)
        rows.append((outcomes, _thresholds(probs)))
    src = _Uniform(seed)
    counts = Counter()
    for _ in range(count):
        q = start_states[_pick(start_thr, src.draw())]
        word = []
        while True:
            outcomes, thr = rows[q]
            o = outcomes[_pick(thr, src.draw())]
            if o is None:
                break
            word.append(o[0])
            q = o[1]
        counts[tuple(word)] += 1
    return SampleBatch(dict(counts), seed, GENERATOR_ID, count)


def sample_sre(r, count, seed):
    """Ancestral sampling over the expression tree.

    A Choice picks a branch, a Concat samples both sides in order, and a
    Star keeps running its body while a continuation draw succeeds.
    """
    check_well_formed(r)
    src = _Uniform(seed)
    thr = {}

    def threshold(node):
        t = thr.get(id(node))
        if t is None:
            t = thr[id(node)] = _threshold(node.alpha)
        return t

    counts = Counter()
    for _ in range(count):
        out = []
        stack = [r]
        while stack:
            node = stack.pop()
            if isinstance(node, Dirac):
                out.append(node.symbol)
            elif isinstance(node, Epsilon):
                pass
            elif isinstance(node, Choice):
                stack.append(node.left if src.draw() < threshold(node) else node.right)
            elif isinstance(node, Concat):
                stack.append(node.right)
                stack.append(node.left)
            else:
                if src.draw() < threshold(node):
                    stack.append(node)
                    stack.append(node.body)
        counts[tuple(out)] += 1
    return SampleBatch(dict(counts), seed, GENERATOR_ID, count)


def probable_words(pa, min_prob=1e-3):
    """Every word with probability >= ``min_prob`` under a probabilistic automaton.

    Explores prefixes breadth first; a prefix whose forward mass (which
    bounds every extension's probability) is below ``min_prob`` is dropped.
    """
    _require_stochastic(pa)
    out = {}
    frontier = [((), pa.initial)]
    while frontier:
        nxt = []
        for w, v in frontier:
            p = dot(v, pa.final)
            if p >= min_prob:
                out[w] = p
            for a in pa.alphabet:
                u = vecmat(v, pa.transitions[a])
                if sum(u) >= min_prob:
                    nxt.append((w + (a,), u))
        frontier = nxt
    return out


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    critical: float
    level: float

    @property
    def passed(self):
        return self.statistic <= self.critical


def chi_square_fit(batch, probabilities, level=0.999):
    """Pearson goodness of fit of ``batch`` against exact word probabilities.

    One cell per word in ``probabilities`` plus a tail cell for everything
    else; passes when the statistic is below the ``level`` quantile.
    """
    n = batch.draws
    observed = []
    expected = []
    covered = 0
    for w, p in probabilities.items():
        observed.append(batch.counts.get(w, 0))
        expected.append(n * float(p))
        covered += float(p)
    tail_obs = n - sum(observed)
    tail_exp = n * (1 - covered)
    if tail_exp > 1e-9:
        observed.append(tail_obs)
        expected.append(tail_exp)
    elif tail_obs:
        return ChiSquareResult(math.inf, len(observed) - 1, 0.0, level)
    stat = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
    dof = len(observed) - 1
    # one cell means one possible outcome: any deviation at all is a failure
    critical = float(stats.chi2.ppf(level, dof)) if dof else 0.0
    return ChiSquareResult(stat, dof, critical, level)
