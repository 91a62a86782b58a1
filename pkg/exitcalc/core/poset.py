"""Finite posets, monotone maps and locally closed subposets.

Element identifiers are opaque strings. Every constructor sorts them, so all
derived output (Hasse edges, chains, products) comes out in lexicographic
order and two runs on the same input agree byte for byte.

Open subposets are up-closed: ``P_{>=p}`` is open, the Alexandroff
convention.
"""
import logging
from dataclasses import dataclass
from itertools import product as cartesian

import networkx as nx
import numpy as np

from exitcalc import settings
from exitcalc.errors import (
    CycleDetected, DuplicateElement, MalformedIdentifier, NotLocallyClosed, NotMonotone,
    UnknownElement, ValidationError,
)

logger = logging.getLogger(__name__)

OPEN = 'open'
CLOSED = 'closed'
LOCALLY_CLOSED = 'locally-closed'


class Poset:
    """A finite poset stored as its Hasse diagram.

    Build instances with :func:`validate_poset`; the constructor trusts that
    ``hasse`` is already acyclic and transitively reduced.
    """

    def __init__(self, elements, hasse):
        self._elements = tuple(sorted(elements))
        self._index = {x: i for i, x in enumerate(self._elements)}
        self._hasse = tuple(sorted(tuple(edge) for edge in hasse))
        self._graph = nx.DiGraph()
        self._graph.add_nodes_from(self._elements)
        self._graph.add_edges_from(self._hasse)
        self._descendants = {}
        if len(self._elements) <= settings['POSET_DENSE_LIMIT']:
            self._matrix = self._dense_closure()
        else:
            self._matrix = None

    def _dense_closure(self):
        n = len(self._elements)
        reach = np.eye(n, dtype=bool)
        for x in reversed(list(nx.topological_sort(self._graph))):
            i = self._index[x]
            for y in self._graph.successors(x):
                reach[i] |= reach[self._index[y]]
        return reach

    @property
    def elements(self):
        return self._elements

    @property
    def hasse(self):
        return self._hasse

    def __len__(self):
        return len(self._elements)

    def __iter__(self):
        return iter(self._elements)

    def __contains__(self, x):
        return x in self._index

    def __eq__(self, other):
        if not isinstance(other, Poset):
            return NotImplemented
        return self._elements == other._elements and self._hasse == other._hasse

    def __hash__(self):
        return hash((self._elements, self._hasse))

    def __repr__(self):
        return f'<Poset {len(self._elements)} elements, {len(self._hasse)} covers>'

    def index(self, x):
        try:
            return self._index[x]
        except KeyError:
            raise UnknownElement(f"unknown element '{x}'", anchor=x) from None

    def leq(self, x, y):
        i, j = self.index(x), self.index(y)
        if self._matrix is not None:
            return bool(self._matrix[i, j])
        if x == y:
            return True
        if x not in self._descendants:
            self._descendants[x] = frozenset(nx.descendants(self._graph, x))
        return y in self._descendants[x]

    def lt(self, x, y):
        return x != y and self.leq(x, y)

    def comparable(self, x, y):
        return self.leq(x, y) or self.leq(y, x)

    def up_set(self, x):
        return frozenset(y for y in self._elements if self.leq(x, y))

    def down_set(self, x):
        return frozenset(y for y in self._elements if self.leq(y, x))

    def up_closure(self, members):
        members = set(members)
        return frozenset(y for y in self._elements if any(self.leq(x, y) for x in members))

    def down_closure(self, members):
        members = set(members)
        return frozenset(y for y in self._elements if any(self.leq(y, x) for x in members))

    def successors(self, x):
        """Upper covers of x."""
        return tuple(sorted(self._graph.successors(x)))

    def predecessors(self, x):
        """Lower covers of x."""
        return tuple(sorted(self._graph.predecessors(x)))

    def relations(self):
        """All strict relations x < y, sorted."""
        return tuple(
            (x, y) for x in self._elements for y in self._elements
            if x != y and self.leq(x, y)
        )

    def topological_order(self):
        return tuple(nx.lexicographical_topological_sort(self._graph))

    def minimal(self):
        return tuple(x for x in self._elements if not self.predecessors(x))

    def maximal(self):
        return tuple(x for x in self._elements if not self.successors(x))

    def interval(self, p, q):
        return frozenset(x for x in self._elements if self.leq(p, x) and self.leq(x, q))

    def chains(self):
        """Every nonempty chain, as an increasing tuple."""
        above = {x: [y for y in self._elements if self.lt(x, y)] for x in self._elements}
        stack = [(x,) for x in reversed(self._elements)]
        while stack:
            chain = stack.pop()
            yield chain
            for y in reversed(above[chain[-1]]):
                stack.append(chain + (y,))

    def longest_chain(self):
        if not self._elements:
            return 0
        return nx.dag_longest_path_length(self._graph) + 1

    def subposet(self, members):
        """The induced subposet on ``members``."""
        members = set(members)
        for x in members:
            self.index(x)
        kept = [(x, y) for (x, y) in self.relations() if x in members and y in members]
        return validate_poset(members, kept)

    def relabel(self, mapping):
        return validate_poset(
            [mapping[x] for x in self._elements],
            [(mapping[x], mapping[y]) for (x, y) in self._hasse],
        )

    def opposite(self):
        return Poset(self._elements, [(y, x) for (x, y) in self._hasse])

    def to_graph(self):
        return self._graph.copy()


def validate_poset(raw_elements, raw_edges):
    """Build a poset from declared elements and any generating relation.

    Loops ``x -> x`` are dropped; the edge set is reduced to its Hasse
    diagram.
    """
    elements = list(raw_elements)
    seen = set()
    for x in elements:
        if x in seen:
            raise DuplicateElement(f"element '{x}' declared twice", anchor=x)
        seen.add(x)

    graph = nx.DiGraph()
    graph.add_nodes_from(elements)
    for x, y in raw_edges:
        for end in (x, y):
            if end not in seen:
                raise UnknownElement(f"edge ({x}, {y}) references undeclared element '{end}'", anchor=end)
        if x != y:
            graph.add_edge(x, y)

    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        first = cycle[0][0]
        raise CycleDetected(
            'edges induce a cycle: ' + ' -> '.join([u for u, _ in cycle] + [first]),
            anchor=first,
        )
    reduced = nx.transitive_reduction(graph)
    return Poset(elements, reduced.edges())


def chain(n):
    """The chain [n] = 0 < 1 < ... < n with string labels."""
    labels = [str(i) for i in range(n + 1)]
    return validate_poset(labels, zip(labels, labels[1:]))


# Separators of compound labels: pairs "(x,y)", face keys "a|b" and the
# "<"/">" steps of zigzag ids
RESERVED = frozenset(',()|<>')


def _term_end(text, i):
    if text.startswith('(', i):
        i = _label_end(text, i + 1)
        if not text.startswith(',', i):
            raise ValueError(i)
        i = _label_end(text, i + 1)
        if not text.startswith(')', i):
            raise ValueError(i)
        return i + 1
    start = i
    while i < len(text) and text[i] not in RESERVED:
        i += 1
    if i == start:
        raise ValueError(i)
    return i


def _label_end(text, i):
    i = _term_end(text, i)
    while text.startswith('|', i):
        i = _term_end(text, i + 1)
    return i


def check_label(name, atom=False):
    """Reject identifiers that could make two pair labels or face keys equal.

    A label is a face key of terms, each term an atom or a pair of labels;
    ``atom=True`` admits atoms only, as for the vertices of a complex.
    """
    if atom:
        well_formed = bool(name) and not RESERVED.intersection(name)
    else:
        try:
            well_formed = _label_end(name, 0) == len(name)
        except ValueError:
            well_formed = False
    if not well_formed:
        reserved = ' '.join(sorted(RESERVED))
        raise MalformedIdentifier(
            f"identifier '{name}' misuses a reserved separator ({reserved})", anchor=name)
    return name


def pair_label(x, y):
    return f'({x},{y})'


def product(p1, p2):
    """Componentwise product order; elements are labelled ``(x,y)``."""
    elements = [pair_label(x, y) for x, y in cartesian(p1.elements, p2.elements)]
    edges = [(pair_label(a, y), pair_label(b, y)) for (a, b) in p1.hasse for y in p2.elements]
    edges += [(pair_label(x, a), pair_label(x, b)) for x in p1.elements for (a, b) in p2.hasse]
    return validate_poset(elements, edges)


def order_complex(p):
    """Simplicial complex of chains of p."""
    from exitcalc.core.complex import SimplicialComplex
    return SimplicialComplex(p.elements, (frozenset(c) for c in p.chains()))


class MonotoneMap:
    """An order-preserving total map between two posets."""

    def __init__(self, source, target, assignment):
        self.source = source
        self.target = target
        self._assignment = dict(assignment)

        missing = [x for x in source.elements if x not in self._assignment]
        if missing:
            raise ValidationError(f"map is not defined on '{missing[0]}'", anchor=missing[0])
        extra = [x for x in self._assignment if x not in source]
        if extra:
            raise UnknownElement(f"map assigns unknown element '{extra[0]}'", anchor=extra[0])
        for x, image in self._assignment.items():
            if image not in target:
                raise UnknownElement(f"'{x}' is sent to unknown element '{image}'", anchor=image)
        for x, y in source.hasse:
            if not target.leq(self._assignment[x], self._assignment[y]):
                raise NotMonotone(
                    f"{x} <= {y} but {self._assignment[x]} is not <= {self._assignment[y]}",
                    anchor=x,
                )

    @classmethod
    def identity(cls, poset):
        return cls(poset, poset, {x: x for x in poset.elements})

    @classmethod
    def constant(cls, source, target, value):
        return cls(source, target, {x: value for x in source.elements})

    @staticmethod
    def product(f, g):
        source = product(f.source, g.source)
        target = product(f.target, g.target)
        assignment = {
            pair_label(x, y): pair_label(f(x), g(y))
            for x in f.source.elements for y in g.source.elements
        }
        return MonotoneMap(source, target, assignment)

    def __call__(self, x):
        try:
            return self._assignment[x]
        except KeyError:
            raise UnknownElement(f"unknown element '{x}'", anchor=x) from None

    def __eq__(self, other):
        if not isinstance(other, MonotoneMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self._assignment == other._assignment)

    def __repr__(self):
        return f'<MonotoneMap {len(self.source)} -> {len(self.target)}>'

    @property
    def assignment(self):
        return dict(sorted(self._assignment.items()))

    def items(self):
        return sorted(self._assignment.items())

    def compose(self, first):
        """``self o first``: apply ``first``, then ``self``."""
        if first.target != self.source:
            raise ValidationError('maps are not composable')
        return MonotoneMap(first.source, self.target,
                           {x: self._assignment[first(x)] for x in first.source.elements})

    def image(self):
        return frozenset(self._assignment.values())

    def is_surjective(self):
        return self.image() == frozenset(self.target.elements)

    def preimage(self, members):
        members = set(members)
        return frozenset(x for x, image in self._assignment.items() if image in members)


@dataclass(frozen=True)
class SubposetSpec:
    parent: Poset
    members: frozenset
    kind: str


def is_up_closed(parent, members):
    return parent.up_closure(members) == frozenset(members)


def is_down_closed(parent, members):
    return parent.down_closure(members) == frozenset(members)


def is_convex(parent, members):
    members = frozenset(members)
    return parent.up_closure(members) & parent.down_closure(members) == members


def classify_subposet(parent, members):
    """Classify ``members`` as open, closed or locally closed, in that order."""
    members = frozenset(members)
    for x in members:
        parent.index(x)
    if is_up_closed(parent, members):
        kind = OPEN
    elif is_down_closed(parent, members):
        kind = CLOSED
    elif is_convex(parent, members):
        kind = LOCALLY_CLOSED
    else:
        gaps = sorted((parent.up_closure(members) & parent.down_closure(members)) - members)
        raise NotLocallyClosed(
            f"not locally closed: '{gaps[0]}' lies between members but is missing",
            anchor=gaps[0],
        )
    return SubposetSpec(parent, members, kind)


def complement(spec):
    """The closed complement of an open subposet, or the open complement of a closed one."""
    rest = frozenset(spec.parent.elements) - spec.members
    if spec.kind == OPEN:
        return SubposetSpec(spec.parent, rest, CLOSED)
    if spec.kind == CLOSED:
        return SubposetSpec(spec.parent, rest, OPEN)
    raise ValidationError('only open and closed subposets have complements of the other kind')


def inclusion_fibration(parent, members):
    """Fibration type of the inclusion ``members -> parent``.

    Open inclusions are left fibrations, closed ones right fibrations and
    locally closed ones exponentiable; anything else raises NotLocallyClosed.
    """
    kind = classify_subposet(parent, members).kind
    return {OPEN: 'left', CLOSED: 'right', LOCALLY_CLOSED: 'exponentiable'}[kind]
