"""Counting representations over a prime field.

Functors are enumerated exhaustively, either on the shape of a presentation
(matrices on Hasse edges, commuting, invertible on marks) or on a finite
category (matrices on non-identity morphisms respecting composition). The
group of basis changes at every object acts on them; the groupoid
cardinality is the sum of 1/|Aut| over the orbits.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

from exitcalc import settings
from exitcalc.core.exit import ExitPresentation
from exitcalc.core.hocat import FinCategory
from exitcalc.core.homlin import (
    Field, FieldMatrix, all_matrices, general_linear, general_linear_order,
)
from exitcalc.core.rep import Representation
from exitcalc.errors import BudgetExceeded, DimensionMismatch, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CountResult:
    dims: tuple
    q: int
    functors: int
    classes: int
    cardinality: Fraction

    def to_row(self):
        return {
            'dims': ','.join(str(d) for d in self.dims),
            'q': self.q,
            'functors': self.functors,
            'classes': self.classes,
            'cardinality': str(self.cardinality),
        }


class _Problem:
    """Objects, dimensions and the morphism keys a functor assigns matrices to."""

    def __init__(self, objects, dims, keys, ends):
        self.objects = tuple(objects)
        self.dims = dims
        self.keys = tuple(keys)
        self.ends = ends

    def act(self, g, assignment):
        """Basis change: M_f -> g_t M_f g_s^-1."""
        inverse = {x: m.inverse() for x, m in g.items()}
        return {f: g[self.ends[f][1]] @ m @ inverse[self.ends[f][0]] for f, m in assignment.items()}

    def freeze(self, assignment):
        return tuple(assignment[f].entries for f in self.keys)


def _object_dims(objects, dims):
    if isinstance(dims, dict):
        missing = [x for x in objects if x not in dims]
        if missing:
            raise ValidationError(f"no dimension given for '{missing[0]}'", anchor=missing[0])
        return {x: int(dims[x]) for x in objects}
    dims = tuple(int(d) for d in dims)
    if len(dims) != len(objects):
        raise DimensionMismatch(f'expected {len(objects)} dimensions, got {len(dims)}')
    return dict(zip(objects, dims))


def _check_budget(bound, budget):
    if bound > budget:
        raise BudgetExceeded(f'{bound} candidate assignments exceed the budget of {budget}')
    if 2 * bound > budget:
        logger.warning('enumeration close to the budget', extra={'bound': bound, 'budget': budget})


def _presentation_functors(pres, field, dims, budget):
    shape = pres.shape
    order = shape.topological_order()
    bound = 1
    for x, y in shape.hasse:
        bound *= field.p ** (dims[x] * dims[y])
    _check_budget(bound, budget)
    marks = set(pres.marks)

    def incoming(y):
        return [(u, y) for u in shape.predecessors(y)]

    def extend(k, mats, transports):
        if k == len(order):
            yield dict(mats)
            return
        y = order[k]
        edges = incoming(y)
        options = []
        for edge in edges:
            candidates = [m for m in all_matrices(field, dims[y], dims[edge[0]])
                          if edge not in marks or m.is_invertible()]
            options.append(candidates)
        for choice in _product(options):
            table = {y: FieldMatrix.identity(field, dims[y])}
            consistent = True
            for x in shape.elements:
                if x == y or not shape.leq(x, y):
                    continue
                values = {
                    choice[i] @ transports[x][edge[0]]
                    for i, edge in enumerate(edges) if shape.leq(x, edge[0])
                }
                if len(values) > 1:
                    consistent = False
                    break
                table[x] = values.pop()
            if not consistent:
                continue
            for i, edge in enumerate(edges):
                mats[edge] = choice[i]
            for x, m in table.items():
                transports.setdefault(x, {})[y] = m
            yield from extend(k + 1, mats, transports)
            for edge in edges:
                del mats[edge]
            for x in table:
                del transports[x][y]

    return _Problem(shape.elements, dims, shape.hasse, {edge: edge for edge in shape.hasse}), extend(0, {}, {})


def _product(options):
    if not options:
        yield ()
        return
    first, rest = options[0], options[1:]
    for m in first:
        for tail in _product(rest):
            yield (m,) + tail


def _category_functors(category, field, dims, budget):
    identities = set(category.identities.values())
    keys = [f for f in category.morphisms() if f not in identities]
    composites = {
        h for (g, f), h in category.composition.items()
        if g not in identities and f not in identities and h not in identities
    }
    keys.sort(key=lambda f: (f in composites, f))
    bound = 1
    for f in keys:
        if f not in composites:
            x, y = category.ends[f]
            bound *= field.p ** (dims[x] * dims[y])
    _check_budget(bound, budget)

    constraints = [
        (g, f, h) for (g, f), h in category.composition.items()
        if g not in identities and f not in identities
    ]

    def matrix(assigned, f):
        if f in identities:
            return FieldMatrix.identity(field, dims[category.source(f)])
        return assigned.get(f)

    def settle(assigned):
        """Fill determined composites; False on a contradiction."""
        changed = True
        while changed:
            changed = False
            for g, f, h in constraints:
                mg, mf, mh = matrix(assigned, g), matrix(assigned, f), matrix(assigned, h)
                if mg is None or mf is None:
                    continue
                value = mg @ mf
                if mh is None:
                    assigned[h] = value
                    changed = True
                elif mh != value:
                    return False
        return True

    def extend(k, assigned):
        while k < len(keys) and keys[k] in assigned:
            k += 1
        if k == len(keys):
            yield {f: assigned[f] for f in keys}
            return
        f = keys[k]
        x, y = category.ends[f]
        for m in all_matrices(field, dims[y], dims[x]):
            trial = dict(assigned)
            trial[f] = m
            if settle(trial):
                yield from extend(k + 1, trial)

    ends = {f: category.ends[f] for f in keys}
    return _Problem(category.objects, dims, keys, ends), extend(0, {})


def enumerate_functors(target, field, dims, budget=None):
    """Problem description and a generator of all functors to vector spaces."""
    budget = budget or settings['COUNT_BUDGET']
    if field.p == 0:
        raise ValidationError('enumeration needs a prime field')
    if isinstance(target, ExitPresentation):
        dims = _object_dims(target.shape.elements, dims)
        return _presentation_functors(target, field, dims, budget)
    if isinstance(target, FinCategory):
        dims = _object_dims(target.objects, dims)
        return _category_functors(target, field, dims, budget)
    raise ValidationError(f'cannot count functors out of {type(target).__name__}')


def enumerate_representations(pres, field, dims, budget=None):
    """Every representation of pres with these dimensions that inverts the marks."""
    problem, functors = enumerate_functors(pres, field, dims, budget)
    for mats in functors:
        yield Representation(pres, field, problem.dims, mats)


def _group(problem, field):
    elements = [{}]
    for x in problem.objects:
        elements = [dict(g, **{x: m}) for g in elements for m in general_linear(field, problem.dims[x])]
    return elements


def _fingerprint(problem, assignment):
    return tuple(assignment[f].rank for f in problem.keys)


def _isomorphisms(problem, field, a, b):
    """Basis changes g with g.a == b, found object by object."""
    objects = problem.objects

    def extend(k, g):
        if k == len(objects):
            yield dict(g)
            return
        x = objects[k]
        for m in general_linear(field, problem.dims[x]):
            g[x] = m
            ok = True
            for f in problem.keys:
                s, t = problem.ends[f]
                if s in g and t in g and b[f] @ g[s] != g[t] @ a[f]:
                    ok = False
                    break
            if ok:
                yield from extend(k + 1, g)
            del g[x]

    return extend(0, {})


def count_reps_Fq(target, q, dims, budget=None):
    """Functor count, isomorphism-class count and groupoid cardinality over F_q."""
    budget = budget or settings['COUNT_BUDGET']
    field = Field(q)
    if field.p == 0:
        raise ValidationError('q must be a prime')
    problem, functors = enumerate_functors(target, field, dims, budget)

    found = []
    for assignment in functors:
        found.append(assignment)
        if len(found) > budget:
            raise BudgetExceeded(f'more than {budget} functors')
    logger.debug('functors enumerated', extra={'functors': len(found), 'q': q})

    group_order = 1
    for x in problem.objects:
        group_order *= general_linear_order(q, problem.dims[x])

    classes, cardinality = 0, Fraction(0)
    max_dim = max(problem.dims.values(), default=0)
    if max_dim <= settings['ORBIT_DIM_LIMIT'] and group_order * len(found) <= budget:
        group = _group(problem, field)
        seen = set()
        for assignment in found:
            key = problem.freeze(assignment)
            if key in seen:
                continue
            orbit = {problem.freeze(problem.act(g, assignment)) for g in group}
            seen |= orbit
            classes += 1
            cardinality += Fraction(len(orbit), group_order)
    else:
        buckets = {}
        for assignment in found:
            buckets.setdefault(_fingerprint(problem, assignment), []).append(assignment)
        for members in buckets.values():
            representatives = []
            for assignment in members:
                if any(next(_isomorphisms(problem, field, rep, assignment), None) is not None
                       for rep in representatives):
                    continue
                representatives.append(assignment)
                automorphisms = sum(1 for _ in _isomorphisms(problem, field, assignment, assignment))
                cardinality += Fraction(1, automorphisms)
            classes += len(representatives)

    result = CountResult(
        dims=tuple(problem.dims[x] for x in problem.objects),
        q=q,
        functors=len(found),
        classes=classes,
        cardinality=cardinality,
    )
    logger.info('representations counted', extra={'classes': classes, 'functors': len(found)})
    return result
