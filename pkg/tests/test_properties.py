"""Randomized checks of the structural identities the calculator relies on."""
import random
from itertools import combinations

import networkx as nx
import pytest

from exitcalc.core.complex import (
    SimplicialComplex, StratifiedComplex, face_key, simplicial_homology,
)
from exitcalc.core.counting import enumerate_functors, enumerate_representations
from exitcalc.core.exit import (
    ExitPresentation, coarsen, env_homology, is_finite_presentation, presentation_of,
    product, restrict_to,
)
from exitcalc.core.hocat import FinCategory, check_conservative_over_P, find_isomorphism, localize_hocat
from exitcalc.core.homlin import Field
from exitcalc.core.poset import (
    MonotoneMap, chain, classify_subposet, complement, validate_poset,
)
from exitcalc.core.rep import (
    LOWER_SHRIEK, LOWER_STAR, constant_rep, is_P_constructible, kan_extend_closed,
    kan_extend_open, random_rep, reassemble, recollement_decompose, restrict_rep,
)
from exitcalc.errors import NotLocallyClosed
from exitcalc.utils.serialize import CORPUS_PREFIX, decode_presentation, load_document


def bundled(name):
    return load_document(CORPUS_PREFIX + name).decode(decode_presentation)


def identity_presentation(shape):
    return ExitPresentation(shape, MonotoneMap.identity(shape))


def random_complex(rng, max_vertices=10):
    vertices = [f'v{i}' for i in range(rng.randint(3, max_vertices))]
    facets = [rng.sample(vertices, rng.randint(1, 3)) for _ in range(rng.randint(1, 5))]
    return SimplicialComplex.from_facets(facets)


def by_dimension(c):
    """Stratify each face by its dimension."""
    top = max(len(face) for face in c.faces) - 1
    return StratifiedComplex.from_complex(c, chain(top), {face_key(f): str(len(f) - 1) for f in c.faces})


def random_shape(rng, size):
    labels = [f'e{i}' for i in range(size)]
    edges = [(a, b) for a, b in combinations(labels, 2) if rng.random() < 0.5]
    return validate_poset(labels, edges)


def random_presentation(rng, size):
    """Random shape, stratified by a monotone level function onto a chain."""
    shape = random_shape(rng, size)
    level = {}
    for x in shape.topological_order():
        level[x] = max((level[y] for y in shape.predecessors(x)), default=0) + rng.choice((0, 0, 1))
    used = sorted(set(level.values()))
    strat = MonotoneMap(shape, chain(len(used) - 1), {x: str(used.index(level[x])) for x in shape.elements})
    return ExitPresentation(shape, strat)


def random_coarsening(rng, strata):
    """Monotone surjection of a chain onto a shorter one, collapsing random steps."""
    image = [0]
    for _ in range(len(strata) - 1):
        image.append(image[-1] + (rng.random() < 0.5))
    return MonotoneMap(strata, chain(image[-1]), {str(i): str(v) for i, v in enumerate(image)})


def locally_closed_subsets(poset):
    for k in range(1, len(poset) + 1):
        for members in combinations(poset.elements, k):
            try:
                yield classify_subposet(poset, members).members
            except NotLocallyClosed:
                continue


def strip(betti):
    betti = list(betti)
    while betti and betti[-1] == 0:
        betti.pop()
    return betti


def tensor(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def tiny_presentations():
    diamond = validate_poset(['0', 'a', 'b', '1'], [('0', 'a'), ('0', 'b'), ('a', '1'), ('b', '1')])
    two = validate_poset(['p', 'q'], [('p', 'q')])
    vee = validate_poset(['a', 'b', 'c'], [('a', 'b'), ('a', 'c')])
    point = validate_poset(['*'], [])
    circle_coarse = bundled('circle_coarse.presentation')
    circle_refined = bundled('circle_refined.presentation')
    return {
        'marked_interval': bundled('marked_interval.presentation'),
        'circle_coarse': circle_coarse,
        'point': bundled('point.presentation'),
        'half_collapsed_chain': ExitPresentation(
            chain(2), MonotoneMap(chain(2), chain(1), {'0': '0', '1': '0', '2': '1'})),
        'collapsed_chain': ExitPresentation(chain(2), MonotoneMap.constant(chain(2), point, '*')),
        'diamond': ExitPresentation(
            diamond, MonotoneMap(diamond, two, {'0': 'p', 'a': 'p', 'b': 'q', '1': 'q'})),
        'circle_two_strata': coarsen(circle_refined, MonotoneMap(
            circle_refined.target, two, {'k': 'p', 'y': 'p', 'b': 'q', 'r': 'q'})),
        'circle_to_point': coarsen(circle_coarse, MonotoneMap.constant(circle_coarse.target, point, '*')),
        'vee_to_point': ExitPresentation(vee, MonotoneMap.constant(vee, point, '*')),
        'interval': identity_presentation(chain(1)),
    }


class TestLocalizationOfComplexes:

    @pytest.mark.parametrize('seed', range(50))
    def test_identity_stratification_gives_face_poset(self, seed):
        c = random_complex(random.Random(seed))
        pres = presentation_of(StratifiedComplex.identity(c))
        report = localize_hocat(pres)
        assert report.certified
        faces = FinCategory.from_poset(pres.shape)
        assert find_isomorphism(report.category, faces, {x: x for x in faces.objects}) is not None

    @pytest.mark.parametrize('seed', range(50))
    def test_env_is_the_underlying_space(self, seed):
        rng = random.Random(seed)
        c = random_complex(rng)
        pres = presentation_of(by_dimension(c))
        top = len(pres.target) - 1
        if top > 0:
            cut = rng.randint(1, top)
            psi = MonotoneMap(pres.target, chain(1),
                              {str(i): '0' if i < cut else '1' for i in range(top + 1)})
            pres = coarsen(pres, psi)
        assert env_homology(pres) == simplicial_homology(c)

    @pytest.mark.parametrize('name', [
        'circle_coarse.presentation', 'circle_refined.presentation',
        'marked_interval.presentation', 'point.presentation',
    ])
    def test_restriction_is_a_full_subcategory(self, name):
        pres = bundled(name)
        whole = localize_hocat(pres).category
        for members in locally_closed_subsets(pres.target):
            restricted = restrict_to(pres, members)
            report = localize_hocat(restricted)
            assert report.certified
            assert check_conservative_over_P(report, restricted)
            sub = whole.full_subcategory(restricted.shape.elements)
            objects = {x: x for x in sub.objects}
            assert find_isomorphism(sub, report.category, objects) is not None


class TestLocalizationOracle:
    """W-inverting functors R -> Vect biject with functors out of the localization."""

    def assert_counts_agree(self, pres):
        report = localize_hocat(pres)
        if not report.certified:
            # infinite hom-sets: the tables cannot close
            assert not report.closed
            return
        f3 = Field(3)
        dims = {x: 1 for x in pres.shape.elements}
        _, through_shape = enumerate_functors(pres, f3, dims)
        _, through_category = enumerate_functors(report.category, f3, dims)
        assert sum(1 for _ in through_shape) == sum(1 for _ in through_category)

    @pytest.mark.parametrize('seed', range(300))
    def test_random_presentations_localize(self, seed):
        rng = random.Random(seed)
        pres = random_presentation(rng, rng.randint(3, 6))
        report = localize_hocat(pres)
        if report.certified:
            assert report.category.check_axioms() == []
            assert check_conservative_over_P(report, pres)
        else:
            assert not report.closed

    @pytest.mark.parametrize('seed', range(60))
    def test_functor_counts_agree(self, seed):
        rng = random.Random(seed)
        self.assert_counts_agree(random_presentation(rng, rng.randint(3, 4)))

    @pytest.mark.parametrize('name', sorted(tiny_presentations()))
    def test_functor_counts_agree_on_tiny_presentations(self, name):
        self.assert_counts_agree(tiny_presentations()[name])

    def test_collapsed_diamond_has_the_counts_of_a_point(self):
        shape = validate_poset(['0', 'a', 'b', '1'], [('0', 'a'), ('0', 'b'), ('a', '1'), ('b', '1')])
        point = validate_poset(['*'], [])
        pres = ExitPresentation(shape, MonotoneMap.constant(shape, point, '*'))
        self.assert_counts_agree(pres)
        _, functors = enumerate_functors(pres, Field(3), {x: 1 for x in shape.elements})
        # a nonzero scalar on 0 -> a, 0 -> b and a -> 1; b -> 1 is forced
        assert sum(1 for _ in functors) == 8


class TestCoarsening:

    @staticmethod
    def inverted(pres):
        return {(x, y) for x, y in pres.shape.relations() if pres.inverts(x, y)}

    @pytest.mark.parametrize('seed', range(40))
    def test_coarsening_only_adds_inverted_relations(self, seed):
        rng = random.Random(seed)
        pres = random_presentation(rng, rng.randint(3, 6))
        psi = random_coarsening(rng, pres.target)
        before, after = self.inverted(pres), self.inverted(coarsen(pres, psi))
        assert before <= after
        separated = all(
            psi(pres.strat(x)) != psi(pres.strat(y))
            for x, y in pres.shape.relations() if pres.strat(x) != pres.strat(y)
        )
        assert (before == after) == separated

    def test_collapsing_a_used_step_adds_relations(self):
        shape = chain(2)
        pres = ExitPresentation(shape, MonotoneMap.identity(shape))
        psi = MonotoneMap(shape, chain(1), {'0': '0', '1': '0', '2': '1'})
        assert self.inverted(pres) == set()
        assert self.inverted(coarsen(pres, psi)) == {('0', '1')}


class TestKunneth:

    @pytest.mark.parametrize('seed', range(25))
    def test_field_homology_of_products(self, seed):
        rng = random.Random(seed)
        f2 = Field(2)
        if rng.random() < 0.3:
            first = bundled('circle_refined.presentation')
        else:
            first = identity_presentation(random_shape(rng, rng.randint(1, 3)))
        second = identity_presentation(random_shape(rng, rng.randint(1, 3)))
        expected = tensor(env_homology(first, f2).betti, env_homology(second, f2).betti)
        assert strip(env_homology(product(first, second), f2).betti) == strip(expected)


class TestConstructibility:

    @pytest.mark.parametrize('name', sorted(tiny_presentations()))
    def test_marked_reps_are_the_inverting_shape_reps(self, name):
        pres = tiny_presentations()[name]
        f2 = Field(2)
        refined = identity_presentation(pres.shape)
        rng = random.Random(name)
        vectors = [{x: 1 for x in pres.shape.elements}]
        for _ in range(3):
            dims = {x: rng.randint(0, 2) for x in pres.shape.elements}
            exponent = sum(dims[x] * dims[y] for x, y in pres.shape.hasse)
            if exponent <= 12:
                vectors.append(dims)
        for dims in vectors:
            inverting = [
                rep for rep in enumerate_representations(refined, f2, dims)
                if all(rep.mats[edge].is_invertible() for edge in pres.marks)
            ]
            _, functors = enumerate_functors(pres, f2, dims)
            assert sum(1 for _ in functors) == len(inverting)
            for rep in enumerate_representations(pres, f2, dims):
                assert is_P_constructible(rep).constructible

    @pytest.mark.parametrize('name', sorted(tiny_presentations()))
    def test_constant_is_constructible_under_coarsening(self, name):
        pres = tiny_presentations()[name]
        point = validate_poset(['*'], [])
        for target in (pres, coarsen(pres, MonotoneMap.constant(pres.target, point, '*'))):
            assert is_P_constructible(constant_rep(target, Field(2))).constructible

    @pytest.mark.parametrize('seed', range(40))
    def test_constructible_iff_fibers_act_invertibly(self, seed):
        rng = random.Random(seed)
        pres = random_presentation(rng, rng.randint(2, 5))
        rep = random_rep(pres, Field(2), max_dim=2, rng=rng)
        singular = set()
        for p in pres.target.elements:
            fiber = restrict_rep(rep, classify_subposet(pres.target, {p}))
            singular.update(edge for edge, m in fiber.mats.items() if not m.is_invertible())
        verdict = is_P_constructible(rep)
        assert verdict.constructible == (not singular)
        assert set(verdict.offenders) == singular


class TestRecollementIdentities:

    OPEN_SETS = [{'b'}, {'r'}, {'b', 'r'}, {'b', 'r', 'k'}, {'b', 'r', 'y'}]

    @pytest.mark.parametrize('seed', range(100))
    def test_random_representation(self, circle_refined, seed):
        rng = random.Random(seed)
        rep = random_rep(circle_refined, Field(2), max_dim=2, rng=rng)
        open_spec = classify_subposet(circle_refined.target, rng.choice(self.OPEN_SETS))
        closed_spec = complement(open_spec)
        rep_U = restrict_rep(rep, open_spec)
        rep_Z = restrict_rep(rep, closed_spec)

        shriek = kan_extend_open(rep_U, circle_refined, open_spec, LOWER_SHRIEK)
        assert restrict_rep(shriek, closed_spec).is_zero()
        pushed = kan_extend_closed(rep_Z, circle_refined, closed_spec)
        assert restrict_rep(pushed, open_spec).is_zero()
        assert restrict_rep(pushed, closed_spec) == rep_Z
        for mode in (LOWER_STAR, LOWER_SHRIEK):
            assert restrict_rep(kan_extend_open(rep_U, circle_refined, open_spec, mode), open_spec) == rep_U

        data = recollement_decompose(rep, open_spec)
        assert reassemble(data, circle_refined) == rep


class TestFiniteness:

    def recount(self, pres):
        graph = nx.DiGraph()
        graph.add_nodes_from(pres.shape.elements)
        graph.add_edges_from(pres.shape.relations())
        covers = list(nx.transitive_reduction(graph).edges())
        marks = [(x, y) for x, y in covers if pres.strat(x) == pres.strat(y)]
        return len(graph), len(covers), len(marks)

    def test_operations_keep_counts_honest(self, circle_coarse, circle_refined):
        point = validate_poset(['*'], [])
        results = [
            circle_coarse,
            restrict_to(circle_coarse, {'p1', 'p2'}),
            restrict_to(circle_coarse, {'p1'}),
            coarsen(circle_coarse, MonotoneMap.constant(circle_coarse.target, point, '*')),
            product(circle_coarse, circle_refined),
            product(circle_coarse, circle_coarse),
        ]
        for pres in results:
            report = is_finite_presentation(pres)
            assert report.finite
            assert report.counts == self.recount(pres)
            assert sum(report.fibers.values()) == len(pres.shape)
