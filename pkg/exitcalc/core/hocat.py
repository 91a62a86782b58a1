"""Homotopy categories of exit presentations.

The homotopy category of R[W^-1] is computed from zigzags. A zigzag is a
tuple ``(x0, d1, x1, d2, x2, ...)`` with each direction ``'>'`` (a relation
x_{i-1} < x_i of R) or ``'<'`` (a relation x_i < x_{i-1} collapsed by the
stratification, hence inverted). ``(x,)`` is the identity of x.

Words are rewritten to reduced form by three local rules:

* an identity step is dropped;
* two adjacent steps in the same direction compose;
* a turn ``a > b < c`` or ``a < b > c`` whose ends are comparable becomes
  the single step between the ends (or nothing when a == c).

Classes of zigzags out of a source are the cells of a union-find table of
the free W-inverting functor on that source, filled breadth first under a
cell budget. Hom-sets can be infinite, so the result is certified only when
every table closes and every class is reached strictly below the depth.
"""
import logging
from dataclasses import dataclass, field
from itertools import permutations, product as cartesian

from exitcalc import settings
from exitcalc.errors import DepthExhausted, InvariantViolation, ValidationError

logger = logging.getLogger(__name__)

FORWARD = '>'
BACKWARD = '<'


def word_length(word):
    return (len(word) - 1) // 2


def word_id(word):
    return ''.join(word)


def shortlex(word):
    return (word_length(word), word)


# ---------------------------------------------------------------------------
# Finite categories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FinCategory:
    """A finite category given by its composition table.

    ``homs[(x, y)]`` lists morphism ids, ``composition[(g, f)]`` is g o f and
    ``identities[x]`` the identity of x.
    """
    objects: tuple
    homs: dict
    composition: dict
    identities: dict
    ends: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ends = {}
        for (x, y), morphisms in self.homs.items():
            for f in morphisms:
                if f in ends:
                    raise ValidationError(f"morphism '{f}' appears in two hom-sets", anchor=f)
                ends[f] = (x, y)
        object.__setattr__(self, 'ends', ends)

    @classmethod
    def from_poset(cls, poset):
        homs, composition, identities = {}, {}, {}
        name = {}
        for x in poset.elements:
            for y in poset.elements:
                if poset.leq(x, y):
                    name[(x, y)] = x if x == y else word_id((x, FORWARD, y))
                    homs[(x, y)] = (name[(x, y)],)
            identities[x] = name[(x, x)]
        for (x, y), f in name.items():
            for z in poset.elements:
                if (y, z) in name:
                    composition[(name[(y, z)], f)] = name[(x, z)]
        return cls(tuple(poset.elements), homs, composition, identities)

    def hom(self, x, y):
        return self.homs.get((x, y), ())

    def source(self, f):
        return self.ends[f][0]

    def target(self, f):
        return self.ends[f][1]

    def morphisms(self):
        return tuple(sorted(self.ends))

    def compose(self, g, f):
        """g o f"""
        if self.target(f) != self.source(g):
            raise ValidationError(f"'{g}' and '{f}' are not composable")
        try:
            return self.composition[(g, f)]
        except KeyError:
            raise ValidationError(f"composite of '{g}' and '{f}' is missing") from None

    def hom_sizes(self):
        return {key: len(value) for key, value in sorted(self.homs.items()) if value}

    def check_axioms(self):
        """List of violated category axioms; empty when the table is a category."""
        problems = []
        for x in self.objects:
            if self.identities.get(x) not in self.hom(x, x):
                problems.append(f'{x} has no identity')
        if problems:
            return problems
        for f in self.morphisms():
            x, y = self.ends[f]
            if self.composition.get((f, self.identities[x])) != f:
                problems.append(f'{f} o id_{x} != {f}')
            if self.composition.get((self.identities[y], f)) != f:
                problems.append(f'id_{y} o {f} != {f}')
        leaving = {x: [f for f in self.morphisms() if self.source(f) == x] for x in self.objects}
        for f in self.morphisms():
            for g in leaving[self.target(f)]:
                gf = self.composition.get((g, f))
                if gf is None:
                    problems.append(f'{g} o {f} is undefined')
                    continue
                for h in leaving[self.target(g)]:
                    hg = self.composition.get((h, g))
                    if hg is None or self.composition.get((hg, f)) != self.composition.get((h, gf)):
                        problems.append(f'({h} o {g}) o {f} != {h} o ({g} o {f})')
        return problems

    def is_invertible(self, f):
        return self.inverse(f) is not None

    def inverse(self, f):
        x, y = self.ends[f]
        for g in self.hom(y, x):
            if (self.composition.get((g, f)) == self.identities[x]
                    and self.composition.get((f, g)) == self.identities[y]):
                return g
        return None

    def isomorphic(self, x, y):
        return any(self.is_invertible(f) for f in self.hom(x, y))

    def iso_classes(self):
        classes = []
        for x in self.objects:
            for members in classes:
                if self.isomorphic(members[0], x):
                    members.append(x)
                    break
            else:
                classes.append([x])
        return [tuple(sorted(members)) for members in classes]

    def skeleton(self):
        """Full subcategory on the least object of each isomorphism class."""
        return self.full_subcategory(sorted(members[0] for members in self.iso_classes()))

    def is_layered(self):
        return all(self.is_invertible(f) for x in self.objects for f in self.hom(x, x))

    def nontrivial_idempotents(self):
        return tuple(
            e for x in self.objects for e in self.hom(x, x)
            if e != self.identities[x] and self.composition.get((e, e)) == e
        )

    def full_subcategory(self, objects):
        objects = tuple(sorted(objects))
        keep = set(objects)
        homs = {(x, y): fs for (x, y), fs in self.homs.items() if x in keep and y in keep}
        morphisms = {f for fs in homs.values() for f in fs}
        composition = {
            (g, f): h for (g, f), h in self.composition.items() if g in morphisms and f in morphisms
        }
        return FinCategory(objects, homs, composition, {x: self.identities[x] for x in objects})


def functor_is_isomorphism(source, target, object_map, morphism_map):
    """True when the maps define an isomorphism of categories."""
    if sorted(object_map.values()) != sorted(target.objects) or len(object_map) != len(source.objects):
        return False
    for x in source.objects:
        for y in source.objects:
            images = sorted(morphism_map.get(f) for f in source.hom(x, y))
            if images != sorted(target.hom(object_map[x], object_map[y])):
                return False
    for x in source.objects:
        if morphism_map[source.identities[x]] != target.identities[object_map[x]]:
            return False
    for (g, f), h in source.composition.items():
        if target.composition.get((morphism_map[g], morphism_map[f])) != morphism_map[h]:
            return False
    return True


def find_isomorphism(source, target, object_map):
    """Search for morphism bijections making ``object_map`` an isomorphism."""
    pairs = [(x, y) for x in source.objects for y in source.objects if source.hom(x, y)]
    choices = []
    for x, y in pairs:
        mine, theirs = source.hom(x, y), target.hom(object_map[x], object_map[y])
        if len(mine) != len(theirs):
            return None
        choices.append([dict(zip(mine, perm)) for perm in permutations(theirs)])
    for combination in cartesian(*choices):
        morphism_map = {}
        for part in combination:
            morphism_map.update(part)
        if functor_is_isomorphism(source, target, object_map, morphism_map):
            return morphism_map
    return None


# ---------------------------------------------------------------------------
# Zigzag rewriting
# ---------------------------------------------------------------------------

def _turn(pres, a, c):
    """Replacement for a turn a ? b ? c whose ends are comparable."""
    if a == c:
        return ()
    if pres.shape.leq(a, c):
        return (FORWARD, c)
    if pres.shape.leq(c, a):
        return (BACKWARD, c)
    return None


def _rewrite_once(pres, word):
    for j in range(1, len(word), 2):
        if word[j - 1] == word[j + 1]:
            return word[:j] + word[j + 2:]
        if j + 2 < len(word):
            if word[j] == word[j + 2]:
                return word[:j + 1] + word[j + 3:]
            replacement = _turn(pres, word[j - 1], word[j + 3])
            if replacement is not None:
                return word[:j] + replacement + word[j + 4:]
    return None


def normalize(pres, word):
    word = tuple(word)
    while True:
        rewritten = _rewrite_once(pres, word)
        if rewritten is None:
            return word
        word = rewritten


def is_valid_word(pres, word):
    for j in range(1, len(word), 2):
        a, d, b = word[j - 1], word[j], word[j + 1]
        if d == FORWARD and not pres.shape.leq(a, b):
            return False
        if d == BACKWARD and not pres.inverts(b, a):
            return False
        if d not in (FORWARD, BACKWARD):
            return False
    return True


def _flips_to_peak(pres, left, x, right):
    """Peaks ``left > v < m`` equal to the valley ``left < x > m``, for m in [x, right]."""
    shape = pres.shape
    for m in shape.elements:
        if not (shape.leq(x, m) and shape.leq(m, right)):
            continue
        for v in shape.elements:
            if shape.leq(left, v) and pres.inverts(m, v):
                yield m, v


def _flips_to_valley(pres, left, x, right):
    """Valleys ``m < v > right`` equal to the peak ``m > x < right``, for m in [left, x]."""
    shape = pres.shape
    for m in shape.elements:
        if not (shape.leq(left, m) and shape.leq(m, x)):
            continue
        for v in shape.elements:
            if shape.leq(v, right) and pres.inverts(v, m):
                yield m, v


def _moves(pres, word):
    shape = pres.shape
    for i in range(2, len(word) - 1, 2):
        left, x, right = word[i - 2], word[i], word[i + 2]
        peak = word[i - 1] == FORWARD and word[i + 1] == BACKWARD
        valley = word[i - 1] == BACKWARD and word[i + 1] == FORWARD
        if not (peak or valley):
            continue
        head, tail = word[:i - 2], word[i + 3:]
        for y in shape.elements:
            if y == x or pres.strat(y) != pres.strat(x) or not shape.comparable(x, y):
                continue
            if peak and not (shape.leq(left, y) and shape.leq(right, y)):
                continue
            if valley and not (shape.leq(y, left) and shape.leq(y, right)):
                continue
            yield word[:i] + (y,) + word[i + 1:]
        if valley:
            for m, v in _flips_to_peak(pres, left, x, right):
                turn = (left, FORWARD, v, BACKWARD, m, FORWARD, right)
                yield head + turn + tail
        else:
            for m, v in _flips_to_valley(pres, left, x, right):
                turn = (left, FORWARD, m, BACKWARD, v, FORWARD, right)
                yield head + turn + tail


def slide_moves(pres, word):
    """Words equal to ``word`` by one move at an interior peak or valley.

    The vertex either slides along a collapsed relation, or the turn flips
    across a commuting square of R, possibly after splitting the forward step
    next to it at an intermediate element.
    """
    seen = {tuple(word)}
    for moved in _moves(pres, word):
        moved = normalize(pres, moved)
        if moved not in seen:
            seen.add(moved)
            yield moved


# ---------------------------------------------------------------------------
# Localization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalizationReport:
    category: FinCategory
    certified: bool
    search_depth: int
    witness: dict
    class_counts: dict
    complete: bool = True
    closed: bool = True
    presentation: object = field(default=None, repr=False, compare=False)
    tables: dict = field(default_factory=dict, repr=False, compare=False)

    def classify(self, word):
        """Morphism id of the class of a zigzag, or None past the search depth."""
        if self.presentation is None:
            raise ValidationError('report carries no presentation to classify against')
        word = tuple(word)
        if not is_valid_word(self.presentation, word):
            raise ValidationError(f"'{word_id(word)}' is not a zigzag of the shape")
        table = self.tables[word[0]]
        cell = table.walk(table.root, normalize(self.presentation, word))
        return table.names.get(cell)

    def skeletal_objects(self):
        return len(self.category.iso_classes())

    def to_dict(self):
        category = self.category
        return {
            'objects': list(category.objects),
            'skeleton': list(category.skeleton().objects),
            'homs': {f'{x}->{y}': list(fs) for (x, y), fs in sorted(category.homs.items()) if fs},
            'hom_sizes': {f'{x}->{y}': n for (x, y), n in category.hom_sizes().items()},
            'composition': {f'{g}*{f}': h for (g, f), h in sorted(category.composition.items())},
            'identities': dict(sorted(category.identities.items())),
            'certified': self.certified,
            'complete': self.complete,
            'closed': self.closed,
            'search_depth': self.search_depth,
            'class_counts': {str(d): n for d, n in sorted(self.class_counts.items())},
            'witness': self.witness,
        }


class CellTable:
    """Morphisms out of one source, enumerated as a W-inverting functor R -> Set.

    A cell is a morphism ``source -> at[cell]``. ``fwd[cell][z]`` pushes it
    along x < z and ``back[cell][w]`` pulls it back along a collapsed w < x.
    Cells are only created as images the functor requires and only merged
    when a composition law of R or an inverse law forces it, so a table that
    closes within its budget holds exactly the classes of zigzags.
    """

    def __init__(self, pres, source, budget):
        shape = pres.shape
        self.pres = pres
        self.source = source
        self.budget = budget
        self.at, self.parent, self.fwd, self.back = [], [], [], []
        self.above = {x: [y for y in shape.elements if shape.lt(x, y)] for x in shape.elements}
        self.below = {x: [y for y in shape.elements if y != x and pres.inverts(y, x)]
                      for x in shape.elements}
        self.covers = {x: shape.successors(x) for x in shape.elements}
        self.changed = False
        self.closed = False
        self.names = {}
        self.root = self._new(source)
        self._enumerate()

    def __len__(self):
        return sum(1 for cell in range(len(self.at)) if self.parent[cell] == cell)

    def _new(self, x):
        self.at.append(x)
        self.parent.append(len(self.parent))
        self.fwd.append({})
        self.back.append({})
        return len(self.at) - 1

    def find(self, cell):
        while self.parent[cell] != cell:
            self.parent[cell] = self.parent[self.parent[cell]]
            cell = self.parent[cell]
        return cell

    def _merge(self, a, b):
        pending = [(a, b)]
        while pending:
            a, b = (self.find(cell) for cell in pending.pop())
            if a == b:
                continue
            if b < a:
                a, b = b, a
            self.parent[b] = a
            for table in (self.fwd, self.back):
                kept = table[a]
                for key, cell in table[b].items():
                    if key in kept:
                        pending.append((kept[key], cell))
                    else:
                        kept[key] = cell
                table[b] = {}
            self.changed = True

    def _agree(self, table, cell, key, value):
        known = table[cell].get(key)
        if known is None:
            table[cell][key] = value
            self.changed = True
        elif self.find(known) != self.find(value):
            self._merge(known, value)

    def _scan(self, cell):
        y = self.at[cell]
        # functoriality: checking the covers of y is enough
        for z in self.covers[y]:
            for w in self.above[z]:
                cell = self.find(cell)
                t = self.fwd[cell].get(z)
                if t is None:
                    break
                t = self.find(t)
                direct = self.fwd[cell].get(w)
                if direct is not None:
                    self._agree(self.fwd, t, w, direct)
                elif w in self.fwd[t]:
                    self.fwd[cell][w] = self.fwd[t][w]
                    self.changed = True
        for z in self.above[y]:
            if self.pres.inverts(y, z):
                cell = self.find(cell)
                t = self.fwd[cell].get(z)
                if t is not None:
                    self._agree(self.back, self.find(t), y, cell)
        for w in self.below[y]:
            cell = self.find(cell)
            c = self.back[cell].get(w)
            if c is not None:
                self._agree(self.fwd, self.find(c), y, cell)

    def _fill(self, cell):
        y = self.at[cell]
        for z in self.above[y]:
            if z not in self.fwd[cell]:
                self.fwd[cell][z] = self._new(z)
        for w in self.below[y]:
            if w not in self.back[cell]:
                c = self._new(w)
                self.back[cell][w] = c
                self.fwd[c][y] = cell

    def _enumerate(self):
        cell = 0
        while cell < len(self.at):
            if len(self.at) > self.budget:
                logger.debug('cell table over budget', extra={'source': self.source, 'cells': len(self.at)})
                return
            if self.find(cell) == cell:
                self._scan(cell)
                if self.find(cell) == cell:
                    self._fill(cell)
                    self._scan(cell)
            cell += 1
        self.changed = True
        while self.changed:
            self.changed = False
            for cell in range(len(self.at)):
                if self.find(cell) == cell:
                    self._scan(cell)
        self.closed = True

    def walk(self, cell, word):
        """Cell reached from ``cell`` along the steps of ``word``, or None."""
        for j in range(1, len(word), 2):
            table = self.fwd if word[j] == FORWARD else self.back
            cell = table[self.find(cell)].get(word[j + 1])
            if cell is None:
                return None
        return self.find(cell)

    def shortest_words(self):
        """Shortlex-least zigzag reaching each cell, breadth first from the root."""
        root = self.find(self.root)
        best = {root: (self.source,)}
        frontier = [root]
        while frontier:
            found = {}
            for cell in frontier:
                for table, direction in ((self.fwd, FORWARD), (self.back, BACKWARD)):
                    for y, target in table[cell].items():
                        target = self.find(target)
                        if target in best:
                            continue
                        candidate = best[cell] + (direction, y)
                        if target not in found or candidate < found[target]:
                            found[target] = candidate
            best.update(found)
            frontier = sorted(found)
        return best


def _check_moves(report, words):
    """Every move out of a representative must land in its own class."""
    for word in words:
        table = report.tables[word[0]]
        cell = table.walk(table.root, word)
        for moved in slide_moves(report.presentation, word):
            other = table.walk(table.root, moved)
            if other is not None and other != cell:
                raise InvariantViolation(
                    f"move from '{word_id(word)}' to '{word_id(moved)}' changes the class")


def localize_hocat(pres, depth=None, require_certified=False, budget=None):
    """Homotopy category of the presentation, named by zigzags of at most ``depth`` steps."""
    depth = settings['DEFAULT_DEPTH'] if depth is None else depth
    if depth < 2:
        raise ValidationError(f'search depth must be at least 2, got {depth}')
    budget = budget or settings['LOCALIZE_BUDGET']
    per_source = max(budget // max(len(pres.shape), 1), 256)

    tables = {x: CellTable(pres, x, per_source) for x in pres.shape.elements}
    closed = all(table.closed for table in tables.values())
    words = {x: table.shortest_words() for x, table in tables.items()}
    class_counts = {
        d: sum(1 for found in words.values() for w in found.values() if word_length(w) <= d)
        for d in range(1, depth + 1)
    }
    logger.debug('zigzag classes', extra={'classes': class_counts, 'closed': closed})

    homs = {}
    for x, table in tables.items():
        table.names = {cell: word_id(w) for cell, w in words[x].items() if word_length(w) <= depth}
        for cell, w in words[x].items():
            if word_length(w) <= depth:
                homs.setdefault((x, w[-1]), []).append(w)
    homs = {key: tuple(sorted(reps, key=shortlex)) for key, reps in sorted(homs.items())}

    composition, complete = {}, closed
    for (x, y), fs in homs.items():
        table = tables[x]
        for f in fs:
            start = table.walk(table.root, f)
            for z in pres.shape.elements:
                for g in homs.get((y, z), ()):
                    h = table.names.get(table.walk(start, g))
                    if h is None:
                        complete = False
                        continue
                    composition[(word_id(g), word_id(f))] = h
    stable = all(word_length(w) < depth for found in words.values() for w in found.values())
    certified = closed and complete and stable

    category = FinCategory(
        objects=tuple(pres.shape.elements),
        homs={key: tuple(word_id(w) for w in reps) for key, reps in homs.items()},
        composition=composition,
        identities={x: x for x in pres.shape.elements},
    )
    report = LocalizationReport(
        category=category,
        certified=certified,
        search_depth=depth,
        witness={f'{x}->{y}': [word_id(w) for w in reps] for (x, y), reps in homs.items()},
        class_counts=class_counts,
        complete=complete,
        closed=closed,
        presentation=pres,
        tables=tables,
    )

    if certified:
        problems = category.check_axioms()
        if problems:
            raise InvariantViolation(f'localized category breaks an axiom: {problems[0]}')
        if not category.is_layered():
            raise InvariantViolation('localized category has a non-invertible endomorphism')
        if category.nontrivial_idempotents():
            raise InvariantViolation('localized category has a nontrivial idempotent')
        _check_moves(report, [w for reps in homs.values() for w in reps])
        logger.info('localization certified', extra={'depth': depth, 'morphisms': len(category.ends)})
    else:
        logger.warning('localization not certified',
                       extra={'depth': depth, 'closed': closed, 'complete': complete})
        if require_certified:
            reason = 'cell budget exhausted' if not closed else f'zigzag classes still changing at depth {depth}'
            raise DepthExhausted(reason, report=report)
    return report


def check_conservative_over_P(report, pres):
    """True when every morphism between objects over the same stratum is invertible."""
    category = report.category
    for f in category.morphisms():
        x, y = category.ends[f]
        if pres.strat(x) == pres.strat(y) and not category.is_invertible(f):
            return False
    return True
