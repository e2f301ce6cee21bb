"""Finite-mass normal form: conjugation by the expected future mass.

For a trimmed automaton with finite mass, ``d = (I - M)^-1 final`` is
strictly positive. Conjugating every transition matrix by ``diag(d)`` and
dividing the final weights by ``d`` makes each state's outgoing weight plus
final weight equal to one, while the initial vector absorbs ``d`` and is
divided by the total mass ``Z = initial . d``.
"""

from dataclasses import dataclass

from .automaton import WeightedAutomaton, condensation, joint_matrix, useful_states
from .errors import ZeroMass
from .numerics import matvec, neumann_inverse


@dataclass(frozen=True)
class NormalizationResult:
    Z: object
    pa: WeightedAutomaton
    d: tuple
    kept_states: tuple


def future_mass(a):
    """Solve ``(I - M) d = final`` block by block over the condensation.

    Components are processed in reverse topological order so each block
    solve only needs the already-known mass of later components. Each block
    inverse doubles as the finiteness certificate for that block.
    """
    m = joint_matrix(a)
    cond = condensation(a)
    d = [None] * a.n
    for comp in reversed(cond.components):
        inside = set(comp)
        rhs = []
        for q in comp:
            acc = a.final[q]
            row = m.row(q)
            for j, w in enumerate(row):
                if w and j not in inside:
                    acc = acc + w * d[j]
            rhs.append(acc)
        block = m.submatrix(comp, comp)
        sol = matvec(neumann_inverse(block), rhs)
        for q, x in zip(comp, sol):
            d[q] = x
    return tuple(d)


def normalize(a):
    """Return ``(Z, pa)`` with ``Z * pa(w) == a(w)`` for every word.

    ``pa`` is locally stochastic and has one state per useful state of ``a``.
    Raises MassDiverges when the mass is infinite and ZeroMass when no word
    has positive weight.
    """
    keep = useful_states(a)
    if not keep:
        raise ZeroMass("automaton assigns weight 0 to every word")
    t = a if len(keep) == a.n else a.restrict(keep)
    d = future_mass(t)
    Z = sum((l * x for l, x in zip(t.initial, d)), a.backend.zero)
    n = t.n
    new_initial = tuple(l * x / Z for l, x in zip(t.initial, d))
    new_final = tuple(f / x for f, x in zip(t.final, d))
    mats = {}
    for sym, mat in t.transitions.items():
        mats[sym] = type(mat)(n, n, tuple(
            mat[i, j] * d[j] / d[i] if mat[i, j] else mat[i, j]
            for i in range(n) for j in range(n)))
    pa = WeightedAutomaton(t.alphabet, new_initial, mats, new_final, t.backend, t.state_names)
    return NormalizationResult(Z, pa, d, tuple(keep))

