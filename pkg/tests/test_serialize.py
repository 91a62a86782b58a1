import json

import pytest

from exitcalc.core.counting import count_reps_Fq
from exitcalc.core.exit import env_homology, product
from exitcalc.core.hocat import localize_hocat
from exitcalc.core.rep import constant_rep
from exitcalc.errors import MalformedIdentifier, UnknownElement, ValidationError
from exitcalc.utils.cache import ResultCache
from exitcalc.utils.dot import hocat_dot, presentation_dot
from exitcalc.utils.reports import COUNT_COLUMNS, ReportEngine
from exitcalc.utils.serialize import (
    CORPUS_PREFIX, corpus_names, decode_category, decode_complex, decode_poset, decode_presentation,
    decode_representation, dumps, encode_category, encode_complex, encode_presentation,
    encode_representation, kind_of, load_document, parse_edge_key,
)

BAD_STRAT = """{
  "shape": {"elements": ["x"], "hasse": []},
  "strat": {
    "target": {"elements": ["p"], "hasse": []},
    "assignment": {"x": "q"}
  }
}
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def reencode(encode, decode, data):
    return dumps(encode(decode(json.loads(dumps(data)))))


class TestCanonicalForm:

    @pytest.mark.parametrize('name, encode, decode', [
        ('circle_coarse.presentation', encode_presentation, decode_presentation),
        ('torus_product.presentation', encode_presentation, decode_presentation),
        ('noncommutative_triangle.category', encode_category, decode_category),
        ('circle_coarse', encode_complex, decode_complex),
        ('rp2', encode_complex, decode_complex),
    ])
    def test_encoding_is_a_fixed_point(self, name, encode, decode):
        once = dumps(encode(load_document(CORPUS_PREFIX + name).decode(decode)))
        assert reencode(encode, decode, json.loads(once)) == once

    def test_representation_round_trip(self, circle_coarse, f2):
        rep = constant_rep(circle_coarse, f2)
        assert decode_representation(json.loads(dumps(encode_representation(rep)))) == rep

    def test_edge_keys(self):
        assert parse_edge_key('k->b') == ('k', 'b')
        with pytest.raises(ValidationError):
            parse_edge_key('kb')


class TestDocuments:

    def test_kinds_of_bundled_files(self):
        kinds = {name: kind_of(load_document(CORPUS_PREFIX + name).data) for name in corpus_names()}
        assert kinds['circle4'] == 'complex'
        assert kinds['circle_coarse.presentation'] == 'presentation'
        assert kinds['constant.rep'] == 'representation'
        assert kinds['noncommutative_triangle.category'] == 'category'

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            kind_of({'colour': 'blue'})

    def test_unknown_bundled_name(self):
        with pytest.raises(ValidationError):
            load_document(CORPUS_PREFIX + 'klein_bottle')

    def test_invalid_json_reports_line(self, tmp_path):
        path = write(tmp_path, 'broken.json', '{\n  "elements": \n}\n')
        with pytest.raises(ValidationError) as err:
            load_document(path)
        assert err.value.location == f'{path}:3'

    def test_decode_error_reports_line_of_anchor(self, tmp_path):
        path = write(tmp_path, 'bad.json', BAD_STRAT)
        with pytest.raises(UnknownElement) as err:
            load_document(path).decode(decode_presentation)
        assert err.value.location == f'{path}:5'
        assert err.value.exit_code == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError) as err:
            load_document(str(tmp_path / 'absent.json'))
        assert err.value.location.endswith(':1')

    def test_undecodable_bytes_report_line_one(self, tmp_path):
        path = tmp_path / 'latin.json'
        path.write_bytes(b'\xff\xfe{"elements": []}')
        with pytest.raises(ValidationError) as err:
            load_document(str(path))
        assert err.value.location == f'{path}:1'
        assert err.value.exit_code == 2

    def test_category_units_are_implied(self):
        triangle = load_document(CORPUS_PREFIX + 'noncommutative_triangle.category').decode(decode_category)
        assert triangle.homs[('b', 'b')] == ('b',)
        assert triangle.compose('k>b', 'k') == 'k>b'
        assert triangle.compose('b<y>r', 'k>b') == 'k>b<y>r'

    def test_category_without_identity(self):
        with pytest.raises(ValidationError):
            decode_category({'objects': ['a'], 'homs': {}, 'identities': {}})

    def test_representation_over_other_presentation(self, circle_coarse, point, f2):
        data = encode_representation(constant_rep(point, f2))
        with pytest.raises(ValidationError) as err:
            decode_representation(data, circle_coarse)
        assert err.value.anchor == 'pres'

    def test_representation_needs_a_presentation(self):
        with pytest.raises(ValidationError):
            decode_representation({'field': {'p': 2}, 'dims': {}, 'mats': {}})


class TestIdentifiers:

    def test_separator_in_poset_element(self):
        with pytest.raises(MalformedIdentifier) as err:
            decode_poset({'elements': ['a,b', 'c'], 'hasse': []})
        assert err.value.anchor == 'a,b'
        assert err.value.exit_code == 2

    def test_unbalanced_parenthesis(self):
        with pytest.raises(MalformedIdentifier):
            decode_poset({'elements': ['(a'], 'hasse': []})

    @pytest.mark.parametrize('data', [
        {'facets': [['a|b', 'c']]},
        {'vertices': ['a|b'], 'faces': [['a|b']]},
        {'facets': [['(a,b)']]},
    ])
    def test_vertices_must_be_atoms(self, data):
        with pytest.raises(MalformedIdentifier) as err:
            decode_complex(data)
        assert err.value.anchor in ('a|b', '(a,b)')

    def test_cells_may_be_compound(self):
        sc = decode_complex({'cells': {'elements': ['a', 'a|b', '(a,b)'], 'hasse': [['a', 'a|b']]}})
        assert len(sc.cells) == 3

    def test_products_decode_again(self, circle_coarse):
        square = product(circle_coarse, circle_coarse)
        data = json.loads(dumps(encode_presentation(square)))
        assert decode_presentation(data) == square
        assert '(k,b)' in decode_presentation(data).shape


class TestCache:

    def test_put_then_get(self, tmp_path):
        cache = ResultCache(str(tmp_path / 'cache'))
        payload = {'q': 2, 'dims': [[1, 1, 1]]}
        assert cache.get('count', payload) is None
        cache.put('count', payload, [{'classes': 8}])
        assert cache.get('count', payload) == [{'classes': 8}]
        assert cache.get('count', {'q': 3, 'dims': [[1, 1, 1]]}) is None

    def test_disabled_without_directory(self):
        cache = ResultCache()
        assert not cache.enabled
        cache.put('count', {}, [1])
        assert cache.get('count', {}) is None

    def test_unreadable_entry_is_ignored(self, tmp_path):
        cache = ResultCache(str(tmp_path))
        cache.put('count', {'q': 2}, [1])
        path = tmp_path / f"count-{cache.key('count', {'q': 2})}.json"
        path.write_text('{not json')
        assert cache.get('count', {'q': 2}) is None


class TestOutput:

    def test_presentation_dot_dashes_marks(self, circle_coarse):
        source = presentation_dot(circle_coarse)
        assert source.count('dashed') == 1
        assert 'digraph presentation' in source

    def test_hocat_dot(self, circle_coarse):
        source = hocat_dot(localize_hocat(circle_coarse))
        assert 'k>b<y>r' in source
        assert 'dashed' in source

    def test_count_table(self, point):
        rows = [count_reps_Fq(point, 3, (d,)).to_row() for d in (0, 1)]
        table = ReportEngine.count_table(rows)
        assert list(table.columns) == COUNT_COLUMNS
        text = ReportEngine.render(table, 'csv')
        assert text.splitlines()[0] == 'dims,q,functors,classes,cardinality'
        assert text.splitlines()[2] == '1,3,1,1,1/2'
        assert json.loads(ReportEngine.render(table, 'json'))[1]['cardinality'] == '1/2'

    def test_invariants_of_the_circle(self, circle_coarse):
        report = ReportEngine.invariants_report(circle_coarse)
        assert report['contractible_fibers'] == ['p0', 'p1', 'p2']
        assert report['conservative'] == 'yes'
        assert report['finite']
        assert len(ReportEngine.invariants_table(report)) == 5
        document = ReportEngine.invariants_document(report)
        assert document['counts'] == {'elements': 4, 'hasse': 4, 'marks': 1}
        assert document['env_homology'] == str(env_homology(circle_coarse))

    def test_invariants_when_the_localization_stops_short(self, circle_coarse):
        assert ReportEngine.invariants_report(circle_coarse, depth=3)['conservative'] == 'uncertified'
        square = load_document(CORPUS_PREFIX + 'marked_square.presentation').decode(decode_presentation)
        assert ReportEngine.invariants_report(square)['conservative'] == 'budget'
