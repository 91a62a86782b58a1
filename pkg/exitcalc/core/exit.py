"""Exit presentations: a shape poset R with a monotone surjection onto P.

The marks of a presentation are the Hasse edges of R that the stratification
collapses; they are always recomputed from ``strat`` and never stored. Every
stability operation below returns a new presentation and leaves its inputs
untouched.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

from exitcalc.core.complex import face_key, simplicial_homology
from exitcalc.core.poset import (
    MonotoneMap, classify_subposet, inclusion_fibration, order_complex,
    product as poset_product, validate_poset,
)
from exitcalc.errors import (
    EmptyStratum, UnknownStratum, ValidationError,
)

logger = logging.getLogger(__name__)


class ExitPresentation:

    def __init__(self, shape, strat):
        if strat.source != shape:
            raise ValidationError('stratification map does not start at the shape')
        missed = sorted(set(strat.target.elements) - strat.image())
        if missed:
            raise EmptyStratum(f"stratum '{missed[0]}' has no shape elements", anchor=missed[0])
        self.shape = shape
        self.strat = strat

    @property
    def target(self):
        return self.strat.target

    @cached_property
    def marks(self):
        return tuple((x, y) for (x, y) in self.shape.hasse if self.strat(x) == self.strat(y))

    def is_marked(self, x, y):
        return (x, y) in self.marks

    def inverts(self, x, y):
        """True when x <= y lies in the closure of the marks."""
        return self.shape.leq(x, y) and self.strat(x) == self.strat(y)

    @property
    def counts(self):
        return (len(self.shape), len(self.shape.hasse), len(self.marks))

    def __eq__(self, other):
        if not isinstance(other, ExitPresentation):
            return NotImplemented
        return self.shape == other.shape and self.strat == other.strat

    def __hash__(self):
        return hash((self.shape, tuple(self.strat.items())))

    def __repr__(self):
        elements, hasse, marks = self.counts
        return f'<ExitPresentation {elements} elements, {hasse} covers, {marks} marks>'


def presentation_of(sc):
    return ExitPresentation(sc.cells, sc.phi)


def coarsen(pres, psi):
    if psi.source != pres.target:
        raise ValidationError('coarsening map must start at the stratifying poset')
    return ExitPresentation(pres.shape, psi.compose(pres.strat))


def restrict(pres, spec):
    """Pull the presentation back to a locally closed subposet of P."""
    if spec.parent != pres.target:
        raise ValidationError('subposet does not belong to the stratifying poset')
    fibration = inclusion_fibration(spec.parent, spec.members)
    members = pres.strat.preimage(spec.members)
    shape = pres.shape.subposet(members)
    target = spec.parent.subposet(spec.members)
    logger.debug('restricting presentation', extra={'kind': spec.kind, 'fibration': fibration,
                                                    'size': len(members)})
    return ExitPresentation(shape, MonotoneMap(shape, target, {x: pres.strat(x) for x in members}))


def restrict_to(pres, members):
    return restrict(pres, classify_subposet(pres.target, members))


def product(a, b):
    shape = poset_product(a.shape, b.shape)
    return ExitPresentation(shape, MonotoneMap.product(a.strat, b.strat))


def env_homology(pres, coefficients=None):
    """Homology of the classifying space: the order complex of the shape."""
    return simplicial_homology(order_complex(pres.shape), coefficients)


def fiber(pres, p):
    if p not in pres.target:
        raise UnknownStratum(f"'{p}' is not a stratum", anchor=p)
    return restrict(pres, classify_subposet(pres.target, {p}))


def iota_P(pres):
    """Largest sub-presentation that is conservative over P.

    Keeps exactly the relations r <= r' with r = r' or strat(r) != strat(r').
    The kept relation is transitive because strat is monotone, so the result
    is again a poset.
    """
    kept = [(x, y) for (x, y) in pres.shape.relations() if pres.strat(x) != pres.strat(y)]
    shape = validate_poset(pres.shape.elements, kept)
    return ExitPresentation(shape, MonotoneMap(shape, pres.target, pres.strat.assignment))


def is_conservative_presentation(pres):
    """True when no strict relation of the shape is collapsed."""
    return not pres.marks


def localize_chain(pres):
    """Localization of a presentation whose shape is a chain.

    A chain localizes to the chain on the strata it meets: constant maps give
    a point and an injective map gives the chain back.
    """
    if len(pres.shape) > 0 and pres.shape.longest_chain() != len(pres.shape):
        raise ValidationError('shape is not a chain')
    return pres.target.subposet(pres.strat.image())


@dataclass(frozen=True)
class FinitenessReport:
    finite: bool
    elements: int
    hasse: int
    marks: int
    fibers: dict

    @property
    def counts(self):
        return (self.elements, self.hasse, self.marks)


def is_finite_presentation(pres):
    """Every in-memory presentation is finite; localizing at the marks keeps
    it finite, so the report only records sizes."""
    elements, hasse, marks = pres.counts
    fibers = {p: len(pres.strat.preimage({p})) for p in pres.target.elements}
    return FinitenessReport(True, elements, hasse, marks, fibers)


@dataclass(frozen=True)
class PresentationMap:
    """A shape map lying over a map of stratifying posets."""
    source: ExitPresentation
    target: ExitPresentation
    shape_map: MonotoneMap
    base_map: MonotoneMap

    def __post_init__(self):
        if self.shape_map.source != self.source.shape or self.shape_map.target != self.target.shape:
            raise ValidationError('shape map does not match the presentations')
        if self.base_map.source != self.source.target or self.base_map.target != self.target.target:
            raise ValidationError('base map does not match the stratifying posets')
        for x in self.source.shape.elements:
            if self.target.strat(self.shape_map(x)) != self.base_map(self.source.strat(x)):
                raise ValidationError(f"shape map does not lie over the base map at '{x}'", anchor=x)

    def image_of_marks(self):
        return tuple((self.shape_map(x), self.shape_map(y)) for x, y in self.source.marks)


def maps_over(a, b, base_map=None):
    """Every monotone shape map a -> b lying over ``base_map``.

    With no base map the two presentations must share their stratifying
    poset and the identity is used.
    """
    if base_map is None:
        if a.target != b.target:
            raise ValidationError('presentations are over different posets; give a base map')
        base_map = MonotoneMap.identity(a.target)
    order = a.shape.topological_order()
    over = {
        x: [z for z in b.shape.elements if b.strat(z) == base_map(a.strat(x))]
        for x in order
    }

    def extend(k, assignment):
        if k == len(order):
            yield dict(assignment)
            return
        x = order[k]
        for z in over[x]:
            if all(b.shape.leq(assignment[u], z) for u in a.shape.predecessors(x)):
                assignment[x] = z
                yield from extend(k + 1, assignment)
                del assignment[x]

    for assignment in extend(0, {}):
        yield PresentationMap(a, b, MonotoneMap(a.shape, b.shape, assignment), base_map)


def induced_map(sc_a, sc_b, vertex_map, base_map):
    """Presentation map induced by a simplicial map of stratified complexes."""
    if sc_a.complex is None or sc_b.complex is None:
        raise ValidationError('induced maps need simplicial complexes')
    assignment = {}
    for face in sc_a.complex.faces:
        image = frozenset(vertex_map[v] for v in face)
        if image not in sc_b.complex.faces:
            raise ValidationError(f'image of face {face_key(face)} is not a face', anchor=face_key(face))
        assignment[face_key(face)] = face_key(image)
    a, b = presentation_of(sc_a), presentation_of(sc_b)
    return PresentationMap(a, b, MonotoneMap(a.shape, b.shape, assignment), base_map)
