"""Normal forms and decompositions for weighted finite automata.

Exact rational arithmetic is the default; a float backend covers the cases
where an exact answer is not available (irrational growth rates).
"""

from .automaton import (
    WeightedAutomaton, check_local_stochasticity, condensation, evaluate, joint_matrix,
    total_mass, trim, useful_states,
)
from .decompose import reconstruct, spectral_normalize, tripartite
from .errors import WfaError
from .fileformat import dump, dumps, load, loads
from .normalize import future_mass, normalize
from .numerics import Backend, Matrix, Rational, is_mass_finite, spectral_radius
from .oracle import bounded_equiv, enumerate_weights, exact_equiv, find_counterexample
from .sampling import sample_pa, sample_sre
from .sre import (
    Choice, Concat, Dirac, Epsilon, Star, eval_sre, format_sre, length_distribution,
    parse_sre, partial_mass, state_eliminate, thompson,
)
from .tropical import (
    TropicalAutomaton, cycle_mean, min_cost, trop_decompose, trop_evaluate, trop_normalize,
)

__version__ = "0.1.0"
