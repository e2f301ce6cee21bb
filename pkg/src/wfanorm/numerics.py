"""Scalar backends, dense matrices and the linear algebra the automata need.

Two backends exist: exact rationals (``gmpy2.mpq``, always in lowest
terms) and 64-bit floats. Algorithms elsewhere in the package are written against ordinary
arithmetic operators, so they run unchanged on either; the backend object
only supplies coercion and the zero test.
"""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from gmpy2 import mpq as Rational

from .errors import MassDiverges, NoConvergence, SingularMatrix
from .graph import strongly_connected_components

FLOAT_TOL = 1e-9
DEFAULT_RHO_TOL = 1e-12
MAX_POWER_ITERATIONS = 10**6


class Backend(enum.Enum):
    RATIONAL = "rational"
    FLOAT = "float"

    @property
    def zero(self):
        return Rational(0) if self is Backend.RATIONAL else 0.0

    @property
    def one(self):
        return Rational(1) if self is Backend.RATIONAL else 1.0

    def coerce(self, value):
        if self is Backend.RATIONAL:
            # floats convert to their exact binary value
            return Rational(value)
        if isinstance(value, str):
            return float(Rational(value))
        return float(value)

    def close(self, x, y, tol=FLOAT_TOL):
        if self is Backend.RATIONAL:
            return x == y
        return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def backend_of(values):
    """RATIONAL unless some value is a float."""
    for v in values:
        if isinstance(v, float):
            return Backend.FLOAT
    return Backend.RATIONAL


@dataclass(frozen=True)
class Matrix:
    """Dense row-major matrix of scalars."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}")

    @classmethod
    def from_rows(cls, rows):
        rows = [tuple(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), ncols, tuple(x for r in rows for x in r))

    @classmethod
    def zeros(cls, rows, cols=None, backend=Backend.RATIONAL):
        cols = rows if cols is None else cols
        return cls(rows, cols, (backend.zero,) * (rows * cols))

    @classmethod
    def identity(cls, n, backend=Backend.RATIONAL):
        z, o = backend.zero, backend.one
        return cls(n, n, tuple(o if i == j else z for i in range(n) for j in range(n)))

    @property
    def is_square(self):
        return self.rows == self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    @cached_property
    def sparse_rows(self):
        """Per row, the ``(column, value)`` pairs of the nonzero entries."""
        c = self.cols
        e = self.entries
        return tuple(tuple((j, e[i * c + j]) for j in range(c) if e[i * c + j])
                     for i in range(self.rows))

    def to_rows(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def map(self, fn):
        return Matrix(self.rows, self.cols, tuple(fn(x) for x in self.entries))

    def is_nonnegative(self):
        return all(x >= 0 for x in self.entries)

    def __add__(self, other):
        self._same_shape(other)
        return Matrix(self.rows, self.cols,
                      tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other):
        self._same_shape(other)
        return Matrix(self.rows, self.cols,
                      tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch in matrix product")
            cols = [other.col(j) for j in range(other.cols)]
            out = []
            for i in range(self.rows):
                r = self.row(i)
                out.extend(_dot(r, c) for c in cols)
            return Matrix(self.rows, other.cols, tuple(out))
        return matvec(self, other)

    def col(self, j):
        return self.entries[j::self.cols]

    def scale(self, c):
        return Matrix(self.rows, self.cols, tuple(c * x for x in self.entries))

    def transpose(self):
        return Matrix(self.cols, self.rows,
                      tuple(x for j in range(self.cols) for x in self.col(j)))

    def submatrix(self, rows, cols):
        return Matrix(len(rows), len(cols),
                      tuple(self[i, j] for i in rows for j in cols))

    def _same_shape(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")


def _dot(u, v):
    total = 0
    for a, b in zip(u, v):
        if a and b:
            total += a * b
    return total


def vecmat(v, m):
    """Row vector times matrix."""
    out = [0] * m.cols
    rows = m.sparse_rows
    for i, x in enumerate(v):
        if x:
            for j, y in rows[i]:
                out[j] += x * y
    return tuple(out)


def matvec(m, v):
    return tuple(_dot(m.row(i), v) for i in range(m.rows))


def dot(u, v):
    return _dot(u, v)


def _float_scale(rows):
    return max((abs(x) for r in rows for x in r), default=0.0)


def _eliminate(a_rows, rhs_rows, exact):
    """Gauss-Jordan on ``a_rows`` applied to the augmented ``rhs_rows``.

    Both arguments are lists of mutable row lists and are modified in place.
    Returns the solved right-hand sides.
    """
    n = len(a_rows)
    if exact:
        tiny = 0
    else:
        tiny = 1e-13 * max(1.0, _float_scale(a_rows))
    for k in range(n):
        if exact:
            pivot = next((i for i in range(k, n) if a_rows[i][k] != 0), None)
        else:
            pivot = max(range(k, n), key=lambda i: abs(a_rows[i][k]))
            if abs(a_rows[pivot][k]) <= tiny:
                pivot = None
        if pivot is None:
            raise SingularMatrix(f"no pivot in column {k}")
        if pivot != k:
            a_rows[k], a_rows[pivot] = a_rows[pivot], a_rows[k]
            rhs_rows[k], rhs_rows[pivot] = rhs_rows[pivot], rhs_rows[k]
        p = a_rows[k][k]
        ak = a_rows[k] = [x / p for x in a_rows[k]]
        bk = rhs_rows[k] = [x / p for x in rhs_rows[k]]
        for i in range(n):
            if i == k:
                continue
            f = a_rows[i][k]
            if not f:
                continue
            ai = a_rows[i]
            for j in range(k, n):
                if ak[j]:
                    ai[j] -= f * ak[j]
            bi = rhs_rows[i]
            for j, y in enumerate(bk):
                if y:
                    bi[j] -= f * y
    return rhs_rows


def _is_exact(values):
    return not any(isinstance(x, float) for x in values)


def solve_linear(a, b):
    """Solve ``a @ x = b`` for square ``a``.

    Exact (pivoted elimination over rationals) unless any entry is a float,
    in which case partial pivoting is used.
    """
    if not a.is_square or a.rows != len(b):
        raise ValueError("solve_linear needs a square matrix matching b")
    exact = _is_exact(a.entries) and _is_exact(b)
    rows = a.to_rows()
    rhs = [[x] for x in b]
    out = _eliminate(rows, rhs, exact)
    return tuple(r[0] for r in out)


def inverse(a):
    if not a.is_square:
        raise ValueError("inverse of a non-square matrix")
    exact = _is_exact(a.entries)
    backend = Backend.RATIONAL if exact else Backend.FLOAT
    eye = Matrix.identity(a.rows, backend).to_rows()
    out = _eliminate(a.to_rows(), eye, exact)
    return Matrix.from_rows(out) if out else Matrix(0, 0, ())


def neumann_inverse(m, tol=FLOAT_TOL):
    """Return ``(I - m)^-1`` for nonnegative ``m``, certifying ``rho(m) < 1``.

    For nonnegative ``m``, ``I - m`` is nonsingular with an entrywise
    nonnegative inverse exactly when the spectral radius is below one, which
    makes the check exact on rationals. On floats, entries above ``-tol`` are
    accepted as nonnegative.
    """
    if not m.is_square:
        raise ValueError("neumann_inverse needs a square matrix")
    if not m.is_nonnegative():
        raise ValueError("neumann_inverse needs a nonnegative matrix")
    exact = _is_exact(m.entries)
    backend = Backend.RATIONAL if exact else Backend.FLOAT
    try:
        inv = inverse(Matrix.identity(m.rows, backend) - m)
    except SingularMatrix:
        raise MassDiverges("I - M is singular: spectral radius is 1") from None
    floor = 0 if exact else -tol
    if any(x < floor for x in inv.entries):
        raise MassDiverges("(I - M)^-1 has a negative entry: spectral radius exceeds 1")
    return inv


def is_mass_finite(m):
    try:
        neumann_inverse(m)
    except MassDiverges:
        return False
    return True


def support_successors(m):
    """Adjacency lists of the strictly positive entries of a square matrix."""
    succ = []
    for i in range(m.rows):
        r = m.row(i)
        succ.append([j for j, x in enumerate(r) if x > 0])
    return succ


def _block_radius(block, tol, max_iter):
    """Dominant eigenvalue of an irreducible nonnegative block.

    Power iteration on ``block + I`` (primitive, so no oscillation) with the
    Collatz-Wielandt bracket min(Bx/x) <= rho <= max(Bx/x) as the stopping rule.
    """
    n = block.shape[0]
    if n == 1:
        return float(block[0, 0])
    shifted = block + np.eye(n)
    x = np.full(n, 1.0 / n)
    lo = hi = None
    for it in range(1, max_iter + 1):
        y = shifted @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * max(1.0, hi):
            return float(0.5 * (lo + hi) - 1.0)
        x = y / y.sum()
    raise NoConvergence(
        f"power iteration did not converge in {max_iter} steps",
        estimate=float(0.5 * (lo + hi) - 1.0), iterations=max_iter)


def spectral_radius(m, tol=DEFAULT_RHO_TOL, max_iter=MAX_POWER_ITERATIONS):
    """Spectral radius of a nonnegative square matrix, as a float.

    The maximum over the irreducible diagonal blocks of the SCC
    decomposition; each block is handled by shifted power iteration.
    """
    if not m.is_square:
        raise ValueError("spectral_radius needs a square matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not m.is_nonnegative():
        raise ValueError("spectral_radius needs a nonnegative matrix")
    if m.rows == 0:
        return 0.0
    dense = np.array([[float(x) for x in m.row(i)] for i in range(m.rows)])
    succ = support_successors(m)
    best = 0.0
    for comp in strongly_connected_components(m.rows, succ.__getitem__):
        block = dense[np.ix_(comp, comp)]
        if len(comp) == 1 and block[0, 0] == 0:
            continue
        best = max(best, _block_radius(block, tol, max_iter))
    return best


def as_fraction(x, max_denominator=10**6, tol=1e-12):
    """Recognise a float as a small rational, or return None."""
    if not isinstance(x, float):
        return Rational(x)
    if not math.isfinite(x):
        return None
    q = Fraction(x).limit_denominator(max_denominator)
    if abs(float(q) - x) <= tol * max(1.0, abs(x)):
        return Rational(q)
    return None
