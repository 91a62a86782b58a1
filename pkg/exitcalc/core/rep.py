"""Finite-dimensional representations of exit presentations.

A representation assigns a vector space to every shape element and a matrix
to every Hasse edge; longer relations act by composites, which must not
depend on the path. It is constructible over P exactly when every marked
edge carries an invertible matrix.

Kan extensions along open and closed inclusions are the plain pointwise
(co)limits of vector spaces. On the subposet itself the extension keeps the
original spaces, so restricting back returns the input unchanged.
"""
import logging
import random
from dataclasses import dataclass
from typing import NamedTuple

from exitcalc.core.exit import restrict
from exitcalc.core.homlin import (
    FieldMatrix, VectorDiagram, all_matrices, general_linear, limit_of_vectorspace_diagram,
)
from exitcalc.core.poset import CLOSED, OPEN, complement
from exitcalc.errors import (
    DimensionMismatch, ReassemblyFailed, UnknownEdge, ValidationError,
)

logger = logging.getLogger(__name__)

LOWER_STAR = 'lower-star'
LOWER_SHRIEK = 'lower-shriek'


class Representation:

    def __init__(self, pres, field, dims, mats):
        missing = [x for x in pres.shape.elements if x not in dims]
        if missing:
            raise ValidationError(f"no dimension given for '{missing[0]}'", anchor=missing[0])
        negative = [x for x in pres.shape.elements if int(dims[x]) < 0]
        if negative:
            raise DimensionMismatch(f"negative dimension at '{negative[0]}'", anchor=negative[0])
        self.pres = pres
        self.field = field
        self.diagram = VectorDiagram(pres.shape, field, dims, mats)
        self.diagram.check()

    @property
    def dims(self):
        return self.diagram.dims

    @property
    def mats(self):
        return self.diagram.maps

    def transport(self, x, y):
        return self.diagram.transport(x, y)

    def dimension_vector(self):
        return tuple(self.dims[x] for x in self.pres.shape.elements)

    def __eq__(self, other):
        if not isinstance(other, Representation):
            return NotImplemented
        return (self.pres == other.pres and self.field == other.field
                and self.dims == other.dims and self.mats == other.mats)

    def __repr__(self):
        return f'<Representation dims={self.dimension_vector()} over {self.field.label}>'

    def is_zero(self):
        return not any(self.dims.values())


def specialization(rep, edge):
    """The map of stalks F(x) -> F(y) along x <= y."""
    x, y = edge
    if x not in rep.pres.shape or y not in rep.pres.shape or not rep.pres.shape.leq(x, y):
        raise UnknownEdge(f'{x}->{y} is not a relation of the shape', anchor=f'{x}->{y}')
    return rep.transport(x, y)


class Constructibility(NamedTuple):
    constructible: bool
    offenders: tuple


def is_P_constructible(rep):
    """Constructible iff every marked edge acts invertibly."""
    offenders = tuple(edge for edge in rep.pres.marks if not rep.mats[edge].is_invertible())
    return Constructibility(not offenders, offenders)


def constant_rep(pres, field, dim=1):
    identity = FieldMatrix.identity(field, dim)
    return Representation(pres, field, {x: dim for x in pres.shape.elements},
                          {edge: identity for edge in pres.shape.hasse})


def zero_rep(pres, field):
    return Representation(pres, field, {x: 0 for x in pres.shape.elements},
                          {edge: FieldMatrix.zeros(field, 0, 0) for edge in pres.shape.hasse})


def restrict_rep(rep, spec):
    """Restriction to the preimage of a locally closed subposet of P."""
    sub = restrict(rep.pres, spec)
    return Representation(
        sub, rep.field,
        {x: rep.dims[x] for x in sub.shape.elements},
        {(x, y): rep.transport(x, y) for (x, y) in sub.shape.hasse},
    )


def _local_diagram(rep, members):
    shape = rep.pres.shape.subposet(members)
    return VectorDiagram(shape, rep.field, {u: rep.dims[u] for u in members},
                         {(u, v): rep.transport(u, v) for (u, v) in shape.hasse})


def _pointwise_extension(rep_sub, pres, side):
    """Right (``side='above'``) or left (``'below'``) Kan extension to pres.

    Returns the extended representation and, per element, the legs between
    the new space and the spaces of rep_sub in its comma set.
    """
    sub = set(rep_sub.pres.shape.elements)
    field = rep_sub.field
    shape = pres.shape
    comma, universal, legs, dims = {}, {}, {}, {}
    for x in shape.elements:
        if side == 'above':
            comma[x] = sorted(u for u in sub if shape.leq(x, u))
        else:
            comma[x] = sorted(u for u in sub if shape.leq(u, x))
        if x in sub:
            dims[x] = rep_sub.dims[x]
            legs[x] = {u: rep_sub.transport(x, u) if side == 'above' else rep_sub.transport(u, x)
                       for u in comma[x]}
            continue
        direction = 'limit' if side == 'above' else 'colimit'
        result = limit_of_vectorspace_diagram(_local_diagram(rep_sub, comma[x]), direction)
        universal[x] = result
        dims[x] = result.dim
        legs[x] = result.legs

    mats = {}
    for x, y in shape.hasse:
        if side == 'above':
            if not comma[y]:
                mats[(x, y)] = FieldMatrix.zeros(field, 0, dims[x])
            elif y in sub:
                mats[(x, y)] = legs[x][y]
            else:
                mats[(x, y)] = universal[y].factor({u: legs[x][u] for u in comma[y]})
        else:
            if not comma[x]:
                mats[(x, y)] = FieldMatrix.zeros(field, dims[y], 0)
            elif x in sub:
                mats[(x, y)] = legs[y][x]
            else:
                mats[(x, y)] = universal[x].factor({u: legs[y][u] for u in comma[x]})
    return Representation(pres, field, dims, mats), legs


def _check_sub(rep_sub, pres, spec):
    expected = restrict(pres, spec)
    if rep_sub.pres.shape != expected.shape:
        raise ValidationError('representation does not live on the restricted shape')


def kan_extend_open(rep_U, pres, spec, mode=LOWER_STAR):
    """j_* (limit over u >= x) or j_! (colimit over u <= x) along an open inclusion."""
    if spec.kind != OPEN:
        raise ValidationError(f'expected an open subposet, got a {spec.kind} one')
    _check_sub(rep_U, pres, spec)
    if mode == LOWER_STAR:
        return _pointwise_extension(rep_U, pres, 'above')[0]
    if mode == LOWER_SHRIEK:
        return _pointwise_extension(rep_U, pres, 'below')[0]
    raise ValidationError(f"mode must be '{LOWER_STAR}' or '{LOWER_SHRIEK}', got {mode!r}")


def kan_extend_closed(rep_Z, pres, spec):
    """i_*: limit over z >= x; zero on the open complement."""
    if spec.kind != CLOSED:
        raise ValidationError(f'expected a closed subposet, got a {spec.kind} one')
    _check_sub(rep_Z, pres, spec)
    return _pointwise_extension(rep_Z, pres, 'above')[0]


# Units and counits are returned as components, one matrix per shape element.

def unit_lower_star(rep, spec):
    """F -> j_* j^* F"""
    extended, legs = _pointwise_extension(restrict_rep(rep, spec), rep.pres, 'above')
    return _components_into_limit(rep, extended, legs)


def _components_into_limit(rep, extended, legs):
    components = {}
    for x in rep.pres.shape.elements:
        above = sorted(legs[x])
        if not above:
            components[x] = FieldMatrix.zeros(rep.field, extended.dims[x], rep.dims[x])
            continue
        cone = {u: rep.transport(x, u) for u in above}
        components[x] = _factor_through(extended, legs, x, cone)
    return components


def _factor_through(extended, legs, x, cone):
    # The legs of x determine the space at x; solve for the unique factorization.
    field = extended.field
    order = sorted(cone)
    width = cone[order[0]].cols
    stacked = FieldMatrix.vstack(field, [cone[u] for u in order], width)
    basis = FieldMatrix.vstack(field, [legs[x][u] for u in order], extended.dims[x])
    solution = basis.solve(stacked)
    if solution is None:
        raise ValidationError(f'maps at {x} do not factor through the extension')
    return solution


def counit_lower_shriek(rep, spec):
    """j_! j^* F -> F"""
    extended, legs = _pointwise_extension(restrict_rep(rep, spec), rep.pres, 'below')
    components = {}
    for x in rep.pres.shape.elements:
        below = sorted(legs[x])
        if not below:
            components[x] = FieldMatrix.zeros(rep.field, rep.dims[x], extended.dims[x])
            continue
        cocone = {u: rep.transport(u, x) for u in below}
        height = rep.dims[x]
        stacked = FieldMatrix.hstack(rep.field, [cocone[u] for u in below], height)
        basis = FieldMatrix.hstack(rep.field, [legs[x][u] for u in below], extended.dims[x])
        solution = basis.transpose().solve(stacked.transpose())
        if solution is None:
            raise ValidationError(f'maps at {x} do not factor through the extension')
        components[x] = solution.transpose()
    return components


def unit_lower_shriek(rep_U):
    """F_U -> j^* j_! F_U, the identity on every element."""
    return {x: FieldMatrix.identity(rep_U.field, rep_U.dims[x]) for x in rep_U.pres.shape.elements}


def counit_lower_star(rep_U):
    """j^* j_* F_U -> F_U, the identity on every element."""
    return unit_lower_shriek(rep_U)


def is_natural(source, target, components):
    """True when the components commute with every edge map."""
    for x, y in source.pres.shape.hasse:
        if target.mats[(x, y)] @ components[x] != components[y] @ source.mats[(x, y)]:
            return False
    return True


# ---------------------------------------------------------------------------
# Recollement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecollementData:
    open_part: Representation
    closed_part: Representation
    gluing: dict
    open_spec: object
    closed_spec: object


def reassemble(data, pres):
    """Rebuild a representation from its open part, closed part and gluing.

    A crossing edge z -> u is the unit at z followed by the limit leg to u.
    """
    extended, legs = _pointwise_extension(data.open_part, pres, 'above')
    dims, mats = {}, {}
    for part in (data.open_part, data.closed_part):
        dims.update(part.dims)
        mats.update(part.mats)
    for z, u in pres.shape.hasse:
        if (z, u) in mats:
            continue
        mats[(z, u)] = legs[z][u] @ data.gluing[z]
    return Representation(pres, data.open_part.field, dims, mats)


def recollement_decompose(rep, open_spec):
    """Split rep into open part, closed part and the gluing unit on the closed part."""
    if open_spec.kind != OPEN:
        raise ValidationError(f'expected an open subposet, got a {open_spec.kind} one')
    closed_spec = complement(open_spec)
    open_part = restrict_rep(rep, open_spec)
    closed_part = restrict_rep(rep, closed_spec)
    extended, legs = _pointwise_extension(open_part, rep.pres, 'above')
    units = _components_into_limit(rep, extended, legs)
    closed_members = set(closed_part.pres.shape.elements)
    gluing = {z: units[z] for z in rep.pres.shape.elements if z in closed_members}
    data = RecollementData(open_part, closed_part, gluing, open_spec, closed_spec)

    rebuilt = reassemble(data, rep.pres)
    if rebuilt.mats != rep.mats or rebuilt.dims != rep.dims:
        bad = sorted(edge for edge in rep.mats if rebuilt.mats.get(edge) != rep.mats[edge])
        where = f' at {bad[0][0]}->{bad[0][1]}' if bad else ''
        raise ReassemblyFailed(f'recollement does not reproduce the representation{where}')
    logger.debug('recollement decomposed', extra={'open': len(open_part.dims),
                                                  'closed': len(closed_part.dims)})
    return data


def restrict_closed_shriek(rep, open_spec):
    """i^! F: the part of F on Z killed by the unit F -> j_* j^* F."""
    data = recollement_decompose(rep, open_spec)
    field = rep.field
    closed = data.closed_part
    kernels = {z: data.gluing[z].nullspace() for z in closed.pres.shape.elements}
    mats = {}
    for z, w in closed.pres.shape.hasse:
        image = closed.mats[(z, w)] @ kernels[z]
        solution = kernels[w].solve(image)
        if solution is None:
            raise ReassemblyFailed(f'kernel of the unit is not preserved along {z}->{w}')
        mats[(z, w)] = solution
    return Representation(closed.pres, field, {z: k.cols for z, k in kernels.items()}, mats)


# ---------------------------------------------------------------------------
# Random representations and isomorphisms
# ---------------------------------------------------------------------------

def _random_invertible(field, n, rng):
    while True:
        if field.p == 0:
            values = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
        else:
            values = [[rng.randrange(field.p) for _ in range(n)] for _ in range(n)]
        matrix = FieldMatrix.from_rows(field, values, (n, n))
        if matrix.is_invertible():
            return matrix


def random_rep(pres, field, max_dim=2, rng=None, summands=None):
    """Direct sum of interval modules on random intervals, in a random basis."""
    rng = rng or random.Random(0)
    shape = pres.shape
    elements = list(shape.elements)
    intervals = []
    load = {x: 0 for x in elements}
    for _ in range(summands if summands is not None else rng.randint(0, 2 * max_dim)):
        a, b = rng.choice(elements), rng.choice(elements)
        if not shape.leq(a, b):
            a, b = b, a
        if not shape.leq(a, b):
            continue
        members = shape.interval(a, b)
        if all(load[x] < max_dim for x in members):
            intervals.append(members)
            for x in members:
                load[x] += 1

    dims = dict(load)
    slots = {x: [k for k, members in enumerate(intervals) if x in members] for x in elements}
    mats = {}
    for x, y in shape.hasse:
        rows = [[field.one if i == j else field.zero for j in slots[x]] for i in slots[y]]
        mats[(x, y)] = FieldMatrix(field, dims[y], dims[x], tuple(tuple(r) for r in rows))

    change = {x: _random_invertible(field, dims[x], rng) for x in elements}
    mats = {(x, y): change[y] @ m @ change[x].inverse() for (x, y), m in mats.items()}
    return Representation(pres, field, dims, mats)


def intertwiners(a, b, invertible=True):
    """Every family (g_x) with g_y a(x->y) == b(x->y) g_x, over a prime field.

    With ``invertible`` each g_x ranges over GL(d_x); the two
    representations must then have equal dimension vectors.
    """
    if a.pres.shape != b.pres.shape or a.field != b.field:
        raise ValidationError('representations live on different shapes or fields')
    if invertible and a.dims != b.dims:
        return
    field = a.field
    order = a.pres.shape.topological_order()

    def options(x):
        if invertible:
            return general_linear(field, a.dims[x])
        return tuple(all_matrices(field, b.dims[x], a.dims[x]))

    def extend(k, chosen):
        if k == len(order):
            yield dict(chosen)
            return
        x = order[k]
        for g in options(x):
            if all(b.mats[(u, x)] @ chosen[u] == g @ a.mats[(u, x)]
                   for u in a.pres.shape.predecessors(x)):
                chosen[x] = g
                yield from extend(k + 1, chosen)
                del chosen[x]

    yield from extend(0, {})


def isomorphisms(a, b):
    return intertwiners(a, b, invertible=True)


def are_isomorphic(a, b):
    return next(isomorphisms(a, b), None) is not None
