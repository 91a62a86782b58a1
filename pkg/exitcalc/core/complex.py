"""Abstract simplicial complexes and their stratifications.

A stratification is given per face: ``phi`` sends every face (or, for
complexes entered in cell form, every cell of a regular cell complex) to an
element of the stratifying poset. Faces are identified by their key, the
sorted vertex list joined by ``|``.
"""
import logging
from itertools import combinations

from exitcalc.core.homlin import ChainComplex, IntMatrix, homology
from exitcalc.core.poset import MonotoneMap, Poset, order_complex, validate_poset
from exitcalc.errors import (
    EmptyStratum, IncompatibleStratifications, UnknownElement, UnknownStratum,
    ValidationError,
)

logger = logging.getLogger(__name__)


def face_key(face):
    return '|'.join(sorted(face))


def _sort_key(face):
    return (len(face), tuple(sorted(face)))


class SimplicialComplex:

    def __init__(self, vertices, faces):
        self.vertices = frozenset(vertices)
        self.faces = frozenset(frozenset(face) for face in faces)
        for face in self.faces:
            if not face:
                raise ValidationError('faces must be nonempty')
            stray = face - self.vertices
            if stray:
                v = sorted(stray)[0]
                raise UnknownElement(f"face {face_key(face)} uses undeclared vertex '{v}'", anchor=v)
            if len(face) > 1:
                for v in face:
                    if face - {v} not in self.faces:
                        raise ValidationError(
                            f'face {face_key(face)} is missing its subface {face_key(face - {v})}',
                            anchor=face_key(face),
                        )
        for v in self.vertices:
            if frozenset([v]) not in self.faces:
                raise ValidationError(f"vertex '{v}' is not a face", anchor=v)

    @classmethod
    def from_facets(cls, facets):
        facets = [frozenset(f) for f in facets]
        faces = set()
        for facet in facets:
            for k in range(1, len(facet) + 1):
                faces.update(frozenset(s) for s in combinations(facet, k))
        return cls(set().union(*facets) if facets else set(), faces)

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self.vertices == other.vertices and self.faces == other.faces

    def __hash__(self):
        return hash((self.vertices, self.faces))

    def __repr__(self):
        return f'<SimplicialComplex f={self.f_vector}>'

    def sorted_faces(self):
        return sorted((tuple(sorted(f)) for f in self.faces), key=lambda f: (len(f), f))

    def faces_of_dim(self, n):
        return sorted(tuple(sorted(f)) for f in self.faces if len(f) == n + 1)

    @property
    def dimension(self):
        return max((len(f) for f in self.faces), default=0) - 1

    @property
    def f_vector(self):
        return tuple(len(self.faces_of_dim(n)) for n in range(self.dimension + 1))

    def euler_characteristic(self):
        return sum((-1) ** n * count for n, count in enumerate(self.f_vector))

    def facets(self):
        return sorted(
            (tuple(sorted(f)) for f in self.faces if not any(f < g for g in self.faces)),
            key=lambda f: (len(f), f),
        )

    def boundary_matrix(self, n):
        """Matrix of d_n : C_n -> C_{n-1}, oriented by sorted vertex order."""
        rows = {face: i for i, face in enumerate(self.faces_of_dim(n - 1))}
        cols = self.faces_of_dim(n)
        matrix = IntMatrix.zeros(len(rows), len(cols))
        for j, face in enumerate(cols):
            for i in range(len(face)):
                matrix.array[rows[face[:i] + face[i + 1:]], j] = (-1) ** i
        return matrix

    def chain_complex(self):
        dims = self.f_vector
        return ChainComplex(dims, [self.boundary_matrix(n) for n in range(1, len(dims))])

    def barycentric_subdivision(self):
        return order_complex(face_poset(self))


def face_poset(c):
    """Faces ordered by inclusion; covers are codimension-one inclusions."""
    elements = [face_key(f) for f in c.faces]
    edges = [
        (face_key(face - {v}), face_key(face))
        for face in c.faces if len(face) > 1 for v in face
    ]
    return Poset(elements, edges)


class StratifiedComplex:
    """A cell poset with a face-monotone, surjective map onto strat_poset.

    ``complex`` is the simplicial complex whose face poset is ``cells``, or
    None for complexes entered in cell form.
    """

    def __init__(self, cells, strat_poset, phi, complex=None):
        if not isinstance(phi, MonotoneMap):
            phi = MonotoneMap(cells, strat_poset, phi)
        if phi.source != cells or phi.target != strat_poset:
            raise ValidationError('stratification map does not match its cells and poset')
        missed = sorted(set(strat_poset.elements) - phi.image())
        if missed:
            raise EmptyStratum(f"stratum '{missed[0]}' has no cells", anchor=missed[0])
        self.cells = cells
        self.strat_poset = strat_poset
        self.phi = phi
        self.complex = complex

    @classmethod
    def from_complex(cls, complex, strat_poset, assignment):
        cells = face_poset(complex)
        return cls(cells, strat_poset, MonotoneMap(cells, strat_poset, assignment), complex)

    @classmethod
    def identity(cls, complex):
        cells = face_poset(complex)
        return cls(cells, cells, MonotoneMap.identity(cells), complex)

    @classmethod
    def from_cells(cls, cells, strat_poset, assignment):
        return cls(cells, strat_poset, MonotoneMap(cells, strat_poset, assignment))

    @property
    def is_identity(self):
        return self.cells == self.strat_poset and all(x == y for x, y in self.phi.items())

    def __eq__(self, other):
        if not isinstance(other, StratifiedComplex):
            return NotImplemented
        return (self.cells == other.cells and self.strat_poset == other.strat_poset
                and self.phi == other.phi and self.complex == other.complex)

    def __repr__(self):
        return f'<StratifiedComplex {len(self.cells)} cells over {len(self.strat_poset)} strata>'

    def underlying_complex(self):
        if self.complex is not None:
            return self.complex
        return order_complex(self.cells)


def stratum_members(sc, p):
    if p not in sc.strat_poset:
        raise UnknownStratum(f"'{p}' is not a stratum", anchor=p)
    return sc.phi.preimage({p})


def simplicial_homology(c, coefficients=None):
    return homology(c.chain_complex(), coefficients)


def underlying_homology(sc, coefficients=None):
    """Homology of the underlying space; cell-form inputs go through the
    order complex of their cell poset."""
    return simplicial_homology(sc.underlying_complex(), coefficients)


def glue(a, b):
    """Union of two stratified complexes over a common stratification.

    Two identity-stratified complexes glue to the identity stratification of
    their union.
    """
    if (a.complex is None) != (b.complex is None):
        raise IncompatibleStratifications('cannot glue a simplicial complex to a cell complex')

    if a.complex is not None and a.is_identity and b.is_identity:
        union = SimplicialComplex(a.complex.vertices | b.complex.vertices,
                                  a.complex.faces | b.complex.faces)
        return StratifiedComplex.identity(union)

    if a.strat_poset != b.strat_poset:
        raise IncompatibleStratifications('complexes are stratified over different posets')
    assignment = a.phi.assignment
    for cell, value in b.phi.items():
        if cell in assignment and assignment[cell] != value:
            raise IncompatibleStratifications(
                f"shared cell '{cell}' is sent to {assignment[cell]} and to {value}", anchor=cell,
            )
        assignment[cell] = value

    if a.complex is not None:
        union = SimplicialComplex(a.complex.vertices | b.complex.vertices,
                                  a.complex.faces | b.complex.faces)
        return StratifiedComplex.from_complex(union, a.strat_poset, assignment)

    cells = validate_poset(sorted(set(a.cells.elements) | set(b.cells.elements)),
                           set(a.cells.hasse) | set(b.cells.hasse))
    return StratifiedComplex.from_cells(cells, a.strat_poset, assignment)


def coarsen_stratification(sc, psi):
    if psi.source != sc.strat_poset:
        raise ValidationError('coarsening map must start at the stratifying poset')
    phi = psi.compose(sc.phi)
    return StratifiedComplex(sc.cells, psi.target, phi, sc.complex)
