"""Exact linear algebra.

Integer matrices live in numpy object arrays so every entry stays a Python
int; nothing here ever touches floating point. Field matrices hold either
:class:`fractions.Fraction` entries (``p = 0``) or residues mod a prime.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product

import numpy as np

from exitcalc import settings
from exitcalc.errors import (
    BoundaryCompositionNonzero, DimensionMismatch, InvariantViolation,
    NonCommutingDiagram, UnknownEdge, ValidationError,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Integer matrices and Smith normal form
# ---------------------------------------------------------------------------

class IntMatrix:
    """Integer matrix with arbitrary-precision entries."""

    def __init__(self, entries, shape=None):
        if shape is None:
            rows = len(entries)
            cols = len(entries[0]) if rows else 0
            shape = (rows, cols)
        array = np.zeros(shape, dtype=object)
        for i, row in enumerate(entries):
            if len(row) != shape[1]:
                raise DimensionMismatch(f'row {i} has {len(row)} entries, expected {shape[1]}')
            for j, value in enumerate(row):
                array[i, j] = int(value)
        self.array = array

    @classmethod
    def from_array(cls, array):
        matrix = cls.__new__(cls)
        matrix.array = np.array(array, dtype=object)
        return matrix

    @classmethod
    def zeros(cls, rows, cols):
        return cls.from_array(np.zeros((rows, cols), dtype=object))

    @classmethod
    def identity(cls, n):
        matrix = cls.zeros(n, n)
        for i in range(n):
            matrix.array[i, i] = 1
        return matrix

    @property
    def shape(self):
        return self.array.shape

    @property
    def rows(self):
        return self.array.shape[0]

    @property
    def cols(self):
        return self.array.shape[1]

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionMismatch(f'cannot multiply {self.shape} by {other.shape}')
        if self.cols == 0:
            return IntMatrix.zeros(self.rows, other.cols)
        return IntMatrix.from_array(self.array.dot(other.array))

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and bool((self.array == other.array).all())

    def __repr__(self):
        return f'IntMatrix({self.tolist()})'

    def is_zero(self):
        return not any(self.array.flat)

    def tolist(self):
        return [[int(v) for v in row] for row in self.array]


@dataclass(frozen=True)
class SmithForm:
    """``U @ m @ V == D`` with D diagonal and ``invariants`` its nonzero diagonal."""
    invariants: tuple
    U: IntMatrix
    V: IntMatrix
    D: IntMatrix

    @property
    def rank(self):
        return len(self.invariants)

    @property
    def torsion(self):
        return tuple(d for d in self.invariants if d > 1)


def _smallest_nonzero(a, t):
    best = None
    rows, cols = a.shape
    for i in range(t, rows):
        for j in range(t, cols):
            value = a[i, j]
            if value != 0 and (best is None or abs(value) < best[0]):
                best = (abs(value), i, j)
    return None if best is None else best[1:]


def smith_normal_form(m, verify=None):
    """Smith normal form of an integer matrix.

    Pivots on the smallest nonzero entry of the remaining block, ties broken
    by row-major position, so the transforms are reproducible.
    """
    if verify is None:
        verify = settings['VERIFY_SNF']
    a = m.array.copy()
    rows, cols = a.shape
    u = IntMatrix.identity(rows).array
    v = IntMatrix.identity(cols).array

    t = 0
    while t < min(rows, cols):
        pivot = _smallest_nonzero(a, t)
        if pivot is None:
            break
        i, j = pivot
        if i != t:
            a[[t, i]] = a[[i, t]]
            u[[t, i]] = u[[i, t]]
        if j != t:
            a[:, [t, j]] = a[:, [j, t]]
            v[:, [t, j]] = v[:, [j, t]]

        clean = True
        for i in range(t + 1, rows):
            if a[i, t] != 0:
                q = a[i, t] // a[t, t]
                a[i] = a[i] - q * a[t]
                u[i] = u[i] - q * u[t]
                clean = clean and a[i, t] == 0
        for j in range(t + 1, cols):
            if a[t, j] != 0:
                q = a[t, j] // a[t, t]
                a[:, j] = a[:, j] - q * a[:, t]
                v[:, j] = v[:, j] - q * v[:, t]
                clean = clean and a[t, j] == 0
        if not clean:
            continue

        stray = next(
            (i for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i, j] % a[t, t] != 0),
            None,
        )
        if stray is not None:
            a[t] = a[t] + a[stray]
            u[t] = u[t] + u[stray]
            continue

        if a[t, t] < 0:
            a[t] = -a[t]
            u[t] = -u[t]
        t += 1

    form = SmithForm(
        invariants=tuple(int(a[k, k]) for k in range(min(rows, cols)) if a[k, k] != 0),
        U=IntMatrix.from_array(u),
        V=IntMatrix.from_array(v),
        D=IntMatrix.from_array(a),
    )
    if verify:
        _verify_smith_form(m, form)
    return form


def _verify_smith_form(m, form):
    if form.U @ m @ form.V != form.D:
        raise InvariantViolation('Smith normal form transforms do not reproduce D')
    d = form.D.array
    for i in range(d.shape[0]):
        for j in range(d.shape[1]):
            if i != j and d[i, j] != 0:
                raise InvariantViolation(f'Smith form has off-diagonal entry at ({i}, {j})')
    for first, second in zip(form.invariants, form.invariants[1:]):
        if second % first != 0:
            raise InvariantViolation(f'Smith invariants break divisibility: {first} does not divide {second}')


# ---------------------------------------------------------------------------
# Fields and field matrices
# ---------------------------------------------------------------------------

def is_prime(n):
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


class Field:
    """The rationals (``p = 0``) or the prime field F_p."""

    def __init__(self, p=0):
        p = int(p)
        if p != 0 and not is_prime(p):
            raise ValidationError(f'field characteristic must be 0 or a prime, got {p}')
        self.p = p

    def __eq__(self, other):
        return isinstance(other, Field) and self.p == other.p

    def __hash__(self):
        return hash(('Field', self.p))

    def __repr__(self):
        return f'Field({self.p})'

    @property
    def label(self):
        return 'Q' if self.p == 0 else f'F_{self.p}'

    @property
    def zero(self):
        return Fraction(0) if self.p == 0 else 0

    @property
    def one(self):
        return Fraction(1) if self.p == 0 else 1

    def __call__(self, value):
        if self.p == 0:
            return Fraction(value)
        value = Fraction(value)
        if value.denominator % self.p == 0:
            raise ValidationError(f'{value} has no image in {self.label}')
        return value.numerator * pow(value.denominator, -1, self.p) % self.p

    def add(self, a, b):
        return a + b if self.p == 0 else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.p == 0 else (a - b) % self.p

    def mul(self, a, b):
        return a * b if self.p == 0 else (a * b) % self.p

    def neg(self, a):
        return -a if self.p == 0 else (-a) % self.p

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError('zero has no inverse')
        return 1 / a if self.p == 0 else pow(a, -1, self.p)

    def elements(self):
        if self.p == 0:
            raise ValidationError('the rationals cannot be enumerated')
        return range(self.p)

    def to_json(self, value):
        if self.p == 0:
            return value.numerator if value.denominator == 1 else str(value)
        return int(value)


@dataclass(frozen=True)
class FieldMatrix:
    field: Field
    rows: int
    cols: int
    entries: tuple

    @classmethod
    def from_rows(cls, field, rows, shape=None):
        rows = [list(row) for row in rows]
        if shape is None:
            shape = (len(rows), len(rows[0]) if rows else 0)
        if len(rows) != shape[0] or any(len(row) != shape[1] for row in rows):
            raise DimensionMismatch(f'matrix entries do not have shape {shape[0]}x{shape[1]}')
        return cls(field, shape[0], shape[1], tuple(tuple(field(v) for v in row) for row in rows))

    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, rows, cols, tuple((field.zero,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, field, n):
        return cls(field, n, n, tuple(
            tuple(field.one if i == j else field.zero for j in range(n)) for i in range(n)
        ))

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, key):
        i, j = key
        return self.entries[i][j]

    def __repr__(self):
        return f'FieldMatrix({self.field.label}, {self.tolist()})'

    def tolist(self):
        return [[self.field.to_json(v) for v in row] for row in self.entries]

    def _check_same_field(self, other):
        if self.field != other.field:
            raise ValidationError(f'field mismatch: {self.field.label} vs {other.field.label}')

    def __matmul__(self, other):
        self._check_same_field(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f'cannot multiply {self.shape} by {other.shape}')
        f = self.field
        columns = list(zip(*other.entries)) if other.rows else [()] * other.cols
        out = []
        for row in self.entries:
            line = []
            for column in columns:
                acc = f.zero
                for a, b in zip(row, column):
                    if a and b:
                        acc = f.add(acc, f.mul(a, b))
                line.append(acc)
            out.append(tuple(line))
        return FieldMatrix(f, self.rows, other.cols, tuple(out))

    def _elementwise(self, other, op):
        self._check_same_field(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f'shape mismatch: {self.shape} vs {other.shape}')
        return FieldMatrix(self.field, self.rows, self.cols, tuple(
            tuple(op(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries)
        ))

    def __add__(self, other):
        return self._elementwise(other, self.field.add)

    def __sub__(self, other):
        return self._elementwise(other, self.field.sub)

    def scale(self, c):
        c = self.field(c)
        return FieldMatrix(self.field, self.rows, self.cols, tuple(
            tuple(self.field.mul(c, a) for a in row) for row in self.entries
        ))

    def transpose(self):
        if self.rows == 0:
            return FieldMatrix.zeros(self.field, self.cols, 0)
        return FieldMatrix(self.field, self.cols, self.rows, tuple(zip(*self.entries)))

    @property
    def T(self):
        return self.transpose()

    @staticmethod
    def hstack(field, blocks, rows):
        out = [[] for _ in range(rows)]
        for block in blocks:
            if block.rows != rows:
                raise DimensionMismatch('hstack blocks need equal row counts')
            for i, row in enumerate(block.entries):
                out[i].extend(row)
        cols = sum(block.cols for block in blocks)
        return FieldMatrix(field, rows, cols, tuple(tuple(row) for row in out))

    @staticmethod
    def vstack(field, blocks, cols):
        entries = []
        for block in blocks:
            if block.cols != cols:
                raise DimensionMismatch('vstack blocks need equal column counts')
            entries.extend(block.entries)
        return FieldMatrix(field, len(entries), cols, tuple(entries))

    def select_rows(self, start, stop):
        return FieldMatrix(self.field, stop - start, self.cols, self.entries[start:stop])

    def select_cols(self, start, stop):
        return FieldMatrix(self.field, self.rows, stop - start,
                           tuple(row[start:stop] for row in self.entries))

    def is_zero(self):
        return not any(any(row) for row in self.entries)

    def rref(self):
        """Reduced row echelon form and the pivot columns."""
        f = self.field
        m = [list(row) for row in self.entries]
        pivots = []
        r = 0
        for c in range(self.cols):
            if r == self.rows:
                break
            found = next((i for i in range(r, self.rows) if m[i][c] != 0), None)
            if found is None:
                continue
            m[r], m[found] = m[found], m[r]
            scale = f.inv(m[r][c])
            m[r] = [f.mul(scale, x) for x in m[r]]
            for i in range(self.rows):
                if i != r and m[i][c] != 0:
                    factor = m[i][c]
                    m[i] = [f.sub(a, f.mul(factor, b)) for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
        return FieldMatrix(f, self.rows, self.cols, tuple(tuple(row) for row in m)), tuple(pivots)

    @cached_property
    def rank(self):
        return len(self.rref()[1])

    def nullspace(self):
        """Basis of the kernel, returned as the columns of a matrix."""
        f = self.field
        reduced, pivots = self.rref()
        free = [c for c in range(self.cols) if c not in pivots]
        basis = []
        for c in free:
            vector = [f.zero] * self.cols
            vector[c] = f.one
            for k, p in enumerate(pivots):
                vector[p] = f.neg(reduced.entries[k][c])
            basis.append(vector)
        if not basis:
            return FieldMatrix.zeros(f, self.cols, 0)
        return FieldMatrix(f, self.cols, len(basis), tuple(zip(*basis)))

    def solve(self, rhs):
        """Some X with ``self @ X == rhs``, or None when there is none."""
        self._check_same_field(rhs)
        if rhs.rows != self.rows:
            raise DimensionMismatch(f'cannot solve {self.shape} against {rhs.shape}')
        f = self.field
        augmented = FieldMatrix.hstack(f, [self, rhs], self.rows)
        reduced, pivots = augmented.rref()
        if any(p >= self.cols for p in pivots):
            return None
        x = [[f.zero] * rhs.cols for _ in range(self.cols)]
        for k, p in enumerate(pivots):
            for j in range(rhs.cols):
                x[p][j] = reduced.entries[k][self.cols + j]
        return FieldMatrix(f, self.cols, rhs.cols, tuple(tuple(row) for row in x))

    def is_invertible(self):
        return self.rows == self.cols and self.rank == self.rows

    def inverse(self):
        if not self.is_invertible():
            raise ValidationError('matrix is not invertible')
        return self.solve(FieldMatrix.identity(self.field, self.rows))


# ---------------------------------------------------------------------------
# Chain complexes and homology
# ---------------------------------------------------------------------------

class ChainComplex:
    """Free chain complex: ``dims[n]`` generators in degree n and
    ``boundaries[n - 1]`` the matrix of d_n : C_n -> C_{n-1}."""

    def __init__(self, dims, boundaries):
        self.dims = tuple(dims)
        self.boundaries = tuple(boundaries)
        if len(self.boundaries) != max(len(self.dims) - 1, 0):
            raise DimensionMismatch('need one boundary matrix per positive degree')
        for n, d in enumerate(self.boundaries, start=1):
            if d.shape != (self.dims[n - 1], self.dims[n]):
                raise DimensionMismatch(f'd_{n} has shape {d.shape}, expected {(self.dims[n - 1], self.dims[n])}')
        for n in range(1, len(self.boundaries)):
            if not (self.boundaries[n - 1] @ self.boundaries[n]).is_zero():
                raise BoundaryCompositionNonzero(f'd_{n} o d_{n + 1} is not zero')

    @property
    def top(self):
        return len(self.dims) - 1

    def boundary(self, n):
        """d_n, or None outside the range of nonzero maps."""
        if 1 <= n <= len(self.boundaries):
            return self.boundaries[n - 1]
        return None


@dataclass(frozen=True)
class HomologyResult:
    betti: tuple
    torsion: tuple
    coefficients: str = 'Z'

    def __post_init__(self):
        for coeffs in self.torsion:
            if any(t < 2 for t in coeffs):
                raise InvariantViolation('torsion coefficients must be at least 2')

    @classmethod
    def build(cls, betti, torsion, coefficients='Z'):
        betti, torsion = list(betti), [tuple(t) for t in torsion]
        while len(betti) > 1 and betti[-1] == 0 and not torsion[-1]:
            betti.pop()
            torsion.pop()
        if not betti:
            betti, torsion = [0], [()]
        return cls(tuple(betti), tuple(torsion), coefficients)

    def degree(self, n):
        if n < len(self.betti):
            return self.betti[n], self.torsion[n]
        return 0, ()

    def __str__(self):
        parts = []
        for n, (rank, torsion) in enumerate(zip(self.betti, self.torsion)):
            terms = []
            if rank:
                terms.append(self.coefficients if rank == 1 else f'{self.coefficients}^{rank}')
            terms.extend(f'Z/{t}' for t in torsion)
            parts.append(f"H{n}={' + '.join(terms) if terms else '0'}")
        return ', '.join(parts)


def _field_rank(matrix, field):
    if matrix is None or matrix.rows == 0 or matrix.cols == 0:
        return 0
    return FieldMatrix.from_rows(field, matrix.tolist(), matrix.shape).rank


def homology(c, coefficients=None):
    """Homology of a chain complex, integral by default or over a Field."""
    if coefficients is None:
        forms = {n: smith_normal_form(d) for n, d in enumerate(c.boundaries, start=1)}
        rank = {n: form.rank for n, form in forms.items()}
        betti, torsion = [], []
        for n, dim in enumerate(c.dims):
            betti.append(dim - rank.get(n, 0) - rank.get(n + 1, 0))
            torsion.append(forms[n + 1].torsion if n + 1 in forms else ())
        return HomologyResult.build(betti, torsion, 'Z')

    rank = {n: _field_rank(c.boundary(n), coefficients) for n in range(1, len(c.dims))}
    betti = [dim - rank.get(n, 0) - rank.get(n + 1, 0) for n, dim in enumerate(c.dims)]
    return HomologyResult.build(betti, [()] * len(betti), coefficients.label)


# ---------------------------------------------------------------------------
# Poset-shaped diagrams of vector spaces
# ---------------------------------------------------------------------------

class VectorDiagram:
    """A functor from a poset to finite-dimensional vector spaces.

    ``maps`` is keyed by Hasse edge; composites along longer relations are
    computed on demand and must not depend on the path.
    """

    def __init__(self, shape, field, dims, maps):
        self.shape = shape
        self.field = field
        self.dims = {x: int(dims[x]) for x in shape.elements}
        self.maps = {}
        for x, y in shape.hasse:
            if (x, y) not in maps:
                raise UnknownEdge(f'no matrix given for edge {x}->{y}', anchor=f'{x}->{y}')
            matrix = maps[(x, y)]
            if matrix.shape != (self.dims[y], self.dims[x]):
                raise DimensionMismatch(
                    f'matrix on {x}->{y} has shape {matrix.rows}x{matrix.cols}, '
                    f'expected {self.dims[y]}x{self.dims[x]}',
                    anchor=f'{x}->{y}',
                )
            self.maps[(x, y)] = matrix
        extra = [edge for edge in maps if edge not in self.maps]
        if extra:
            x, y = extra[0]
            raise UnknownEdge(f'{x}->{y} is not a Hasse edge', anchor=f'{x}->{y}')
        self._transports = {}

    def _transports_from(self, x):
        if x not in self._transports:
            table = {x: FieldMatrix.identity(self.field, self.dims[x])}
            above = self.shape.up_set(x)
            for y in self.shape.topological_order():
                if y == x or y not in above:
                    continue
                candidates = [
                    self.maps[(u, y)] @ table[u]
                    for u in self.shape.predecessors(y) if u in above
                ]
                first = candidates[0]
                for other in candidates[1:]:
                    if other != first:
                        raise NonCommutingDiagram(
                            f'paths from {x} to {y} give different matrices', anchor=f'{x}->{y}',
                        )
                table[y] = first
            self._transports[x] = table
        return self._transports[x]

    def transport(self, x, y):
        """The composite map F(x) -> F(y) for x <= y."""
        if not self.shape.leq(x, y):
            raise UnknownEdge(f'{x} is not below {y}', anchor=f'{x}->{y}')
        return self._transports_from(x)[y]

    def check(self):
        """Compare every pair of paths; raises NonCommutingDiagram."""
        for x in self.shape.elements:
            self._transports_from(x)
        return True


@dataclass(frozen=True)
class DiagramLimit:
    direction: str
    dim: int
    legs: dict
    basis: FieldMatrix

    def factor(self, cone):
        """The unique map through the (co)limit for a compatible (co)cone.

        For a limit, ``cone[x]`` maps the apex into F(x); for a colimit,
        ``cone[x]`` maps F(x) to the apex.
        """
        field = self.basis.field
        order = sorted(self.legs)
        if self.direction == 'limit':
            width = next(iter(cone.values())).cols if cone else 0
            stacked = FieldMatrix.vstack(field, [cone[x] for x in order], width)
            solution = self.basis.solve(stacked)
            if solution is None:
                raise ValidationError('maps do not form a cone over the diagram')
            return solution
        height = next(iter(cone.values())).rows if cone else 0
        stacked = FieldMatrix.hstack(field, [cone[x] for x in order], height)
        solution = self.basis.transpose().solve(stacked.transpose())
        if solution is None:
            raise ValidationError('maps do not form a cocone under the diagram')
        return solution.transpose()


def _offsets(diagram, order):
    offsets, total = {}, 0
    for x in order:
        offsets[x] = total
        total += diagram.dims[x]
    return offsets, total


def _block(field, rows, cols, placed):
    entries = [[field.zero] * cols for _ in range(rows)]
    for row_off, col_off, matrix in placed:
        for i, line in enumerate(matrix.entries):
            for j, value in enumerate(line):
                entries[row_off + i][col_off + j] = value
    return FieldMatrix(field, rows, cols, tuple(tuple(row) for row in entries))


def limit_of_vectorspace_diagram(diagram, direction='limit'):
    """Limit (kernel of the difference map) or colimit (cokernel) of a diagram."""
    if direction not in ('limit', 'colimit'):
        raise ValidationError(f"direction must be 'limit' or 'colimit', got {direction!r}")
    diagram.check()
    field = diagram.field
    order = list(diagram.shape.elements)
    offsets, total = _offsets(diagram, order)
    edges = list(diagram.shape.hasse)

    if direction == 'limit':
        placed, row = [], 0
        for s, t in edges:
            placed.append((row, offsets[s], diagram.maps[(s, t)]))
            placed.append((row, offsets[t], FieldMatrix.identity(field, diagram.dims[t]).scale(-1)))
            row += diagram.dims[t]
        difference = _block(field, row, total, placed)
        basis = difference.nullspace()
        legs = {x: basis.select_rows(offsets[x], offsets[x] + diagram.dims[x]) for x in order}
        return DiagramLimit('limit', basis.cols, legs, basis)

    placed, col = [], 0
    for s, t in edges:
        placed.append((offsets[s], col, FieldMatrix.identity(field, diagram.dims[s])))
        placed.append((offsets[t], col, diagram.maps[(s, t)].scale(-1)))
        col += diagram.dims[s]
    relations = _block(field, total, col, placed)
    quotient = relations.transpose().nullspace().transpose()
    legs = {x: quotient.select_cols(offsets[x], offsets[x] + diagram.dims[x]) for x in order}
    return DiagramLimit('colimit', quotient.rows, legs, quotient)


# ---------------------------------------------------------------------------
# Enumeration over prime fields
# ---------------------------------------------------------------------------

def all_matrices(field, rows, cols):
    """Every rows x cols matrix over a prime field, in lexicographic order."""
    for values in product(field.elements(), repeat=rows * cols):
        yield FieldMatrix(field, rows, cols, tuple(
            tuple(values[i * cols:(i + 1) * cols]) for i in range(rows)
        ))


@lru_cache(maxsize=None)
def general_linear(field, n):
    """All invertible n x n matrices over a prime field."""
    return tuple(m for m in all_matrices(field, n, n) if m.is_invertible())


def general_linear_order(q, n):
    order = 1
    for k in range(n):
        order *= q ** n - q ** k
    return order
