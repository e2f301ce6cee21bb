"""Growth rate, residual mass and stochastic shape: f(w) = zeta^|w| * Z * r(w).

Scaling every transition by ``1/zeta`` with ``zeta = (1 + epsilon) * rho``
brings the spectral radius down to ``1/(1 + epsilon)``, after which the
finite-mass normal form and state elimination apply.

When the spectral radius is an exactly certified rational and epsilon is
rational, ``zeta`` is rational and the whole chain stays exact; otherwise
the automaton is moved to the float backend before scaling.
"""

from dataclasses import dataclass

from .automaton import (
    WeightedAutomaton, as_word, condensation_of_matrix, joint_matrix, trim, useful_states,
)
from .errors import SingularMatrix, ZeroMass
from .normalize import normalize
from .numerics import (
    Backend, Matrix, as_fraction, inverse, is_mass_finite, spectral_radius,
)
from .sre import eval_sre, state_eliminate

DEFAULT_EPSILON = 0.25


@dataclass(frozen=True)
class SpectralScaling:
    automaton: WeightedAutomaton
    zeta: float
    zeta_exact: object  # rational zeta, or None when only a float is known
    rho: float
    epsilon: object


@dataclass(frozen=True)
class TripartiteDecomposition:
    zeta: float
    Z: object
    r: object
    epsilon: object
    rho: float
    zeta_exact: object = None

    @property
    def exact(self):
        return self.zeta_exact is not None and not isinstance(self.Z, float)


def _is_nilpotent(m):
    """True when the support graph has no cycle, i.e. rho is exactly 0."""
    cond = condensation_of_matrix(m)
    return all(len(c) == 1 and not m[c[0], c[0]] for c in cond.components)


def exact_rho(m, rho, tol=1e-9):
    """The spectral radius as an exact rational, when it is one.

    A small-denominator candidate near the float estimate is accepted only
    if ``det(q I - M) = 0`` holds exactly, i.e. it really is an eigenvalue.
    """
    q = as_fraction(rho, tol=tol)
    if q is None or q <= 0:
        return None
    try:
        inverse(Matrix.identity(m.rows).scale(q) - m)
    except SingularMatrix:
        return q
    return None


def spectral_normalize(a, epsilon):
    """Divide every transition matrix by ``zeta = (1 + epsilon) * rho``.

    An automaton without cycles has ``rho = 0``; it is returned unchanged
    with ``zeta = 1`` so the decomposition stays invertible.
    """
    if epsilon is None or epsilon <= 0:
        raise ValueError("epsilon must be positive")
    m = joint_matrix(a)
    if _is_nilpotent(m):
        return SpectralScaling(a, 1.0, a.backend.one, 0.0, epsilon)
    rho = spectral_radius(m)
    zeta = (1 + float(epsilon)) * rho
    exact = None
    if a.backend is Backend.RATIONAL:
        rho_q, eps_q = exact_rho(m, rho), as_fraction(epsilon)
        if rho_q is not None and eps_q is not None:
            exact = (1 + eps_q) * rho_q
    if exact is not None:
        return SpectralScaling(a.scale_transitions(1 / exact), float(exact), exact, rho, epsilon)
    f = a.to_backend(Backend.FLOAT)
    return SpectralScaling(f.scale_transitions(1.0 / zeta), zeta, None, rho, epsilon)


def tripartite(a, epsilon=None):
    """Decompose ``a`` into ``(zeta, Z, r)``.

    With ``epsilon=None`` a finite-mass automaton is left unscaled
    (``zeta = 1``) so ``Z`` and ``r`` stay exact; a divergent one falls back
    to ``DEFAULT_EPSILON``.
    """
    if not useful_states(a):
        raise ZeroMass("automaton assigns weight 0 to every word")
    if epsilon is None and is_mass_finite(joint_matrix(trim(a))):
        rho = spectral_radius(joint_matrix(a))
        scaled = SpectralScaling(a, 1.0, a.backend.one, rho, None)
    else:
        scaled = spectral_normalize(a, DEFAULT_EPSILON if epsilon is None else epsilon)
    result = normalize(scaled.automaton)
    r = state_eliminate(result.pa)
    return TripartiteDecomposition(scaled.zeta, result.Z, r, scaled.epsilon, scaled.rho,
                                   scaled.zeta_exact)


def reconstruct(dec, word):
    """``zeta^|w| * Z * r(w)``; exact whenever zeta and Z are rational."""
    w = as_word(word)
    p = eval_sre(dec.r, w)
    if not p:
        return p
    if dec.exact:
        return dec.zeta_exact ** len(w) * dec.Z * p
    return dec.zeta ** len(w) * float(dec.Z) * float(p)
