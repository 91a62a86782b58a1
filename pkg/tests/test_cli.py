import json
import logging

import pytest
from click.testing import CliRunner

from exitcalc import ContextFormatter, create_cli
from exitcalc.utils.serialize import decode_presentation

BAD_STRAT = """{
  "shape": {"elements": ["x"], "hasse": []},
  "strat": {
    "target": {"elements": ["p"], "hasse": []},
    "assignment": {"x": "q"}
  }
}
"""


@pytest.fixture
def run():
    cli = create_cli('testing')
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(cli, list(args), catch_exceptions=False)
    return invoke


def presentation_from(result):
    return decode_presentation(json.loads(result.output))


class TestPresentationCommands:

    def test_build(self, run, circle_coarse):
        result = run('build', 'corpus:circle_coarse')
        assert result.exit_code == 0
        assert presentation_from(result) == circle_coarse

    def test_build_to_files(self, run, tmp_path):
        out, dot = tmp_path / 'circle.json', tmp_path / 'circle.dot'
        result = run('build', 'corpus:circle_coarse', '-o', str(out), '--dot', str(dot))
        assert result.exit_code == 0
        assert 'counts (4, 4, 1)' in result.output
        assert decode_presentation(json.loads(out.read_text())).counts == (4, 4, 1)
        assert 'dashed' in dot.read_text()

    def test_restrict(self, run):
        result = run('restrict', 'corpus:circle_coarse.presentation', '--members', 'p1,p2')
        assert presentation_from(result).counts == (3, 2, 1)

    def test_restrict_to_gap(self, run):
        result = run('restrict', 'corpus:circle_coarse.presentation', '--members', 'p0,p2')
        assert result.exit_code == 2

    def test_coarsen(self, run, tmp_path):
        psi = tmp_path / 'psi.json'
        psi.write_text(json.dumps({
            'target': {'elements': ['*'], 'hasse': []},
            'assignment': {'p0': '*', 'p1': '*', 'p2': '*'},
        }))
        result = run('coarsen', 'corpus:circle_coarse.presentation', str(psi))
        assert presentation_from(result).counts == (4, 4, 4)

    def test_product(self, run):
        result = run('product', 'corpus:circle_coarse.presentation', 'corpus:circle_coarse.presentation')
        assert presentation_from(result).counts == (16, 32, 8)

    def test_corpus_listing(self, run):
        result = run('corpus')
        assert 'corpus:noncommutative_triangle.category\tcategory' in result.output
        assert 'corpus:rp2\tcomplex' in result.output


class TestInvariantCommands:

    def test_hocat_of_the_circle(self, run):
        result = run('hocat', 'corpus:circle_coarse.presentation')
        assert result.exit_code == 0
        assert '4 objects, 3 skeletal objects' in result.output
        assert 'hom(k→r)=2' in result.output
        assert 'certified at depth 8' in result.output

    def test_hocat_json(self, run):
        result = run('hocat', 'corpus:circle_coarse.presentation', '--format', 'json')
        assert json.loads(result.output)['hom_sizes']['k->r'] == 2

    def test_uncertified_square(self, run):
        result = run('hocat', 'corpus:marked_square.presentation', '--depth', '4', '--require-certified')
        assert result.exit_code == 3

    def test_uncertified_square_is_reported(self, run):
        result = run('hocat', 'corpus:marked_square.presentation', '--depth', '4')
        assert result.exit_code == 0
        assert 'not certified at depth 4' in result.output

    def test_strict_mode(self, run):
        assert run('--strict', 'hocat', 'corpus:circle_coarse.presentation').exit_code == 0

    def test_depth_too_small(self, run):
        result = run('hocat', 'corpus:circle_coarse.presentation', '--depth', '1')
        assert result.exit_code == 2
        assert '--depth must be at least 2' in result.output

    def test_malformed_input_names_the_line(self, run, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text(BAD_STRAT)
        result = run('hocat', str(path))
        assert result.exit_code == 2
        assert f'{path}:5:' in result.output

    def test_invariants(self, run):
        result = run('invariants', 'corpus:circle_coarse.presentation')
        assert 'contractible fibers: p0, p1, p2' in result.output
        assert 'conservative: yes' in result.output
        assert 'finite: yes (4 elements, 4 covers, 1 marks)' in result.output

    def test_invariants_csv(self, run):
        result = run('invariants', 'corpus:circle_coarse.presentation', '--format', 'csv')
        assert result.output.splitlines()[0] == 'scope,degree,rank,torsion'

    def test_invariants_of_the_pinned_torus_stop_at_the_budget(self, run, tmp_path):
        out = tmp_path / 'pinned.json'
        assert run('build', 'corpus:pinned_torus', '-o', str(out)).exit_code == 0
        result = run('invariants', str(out))
        assert result.exit_code == 0
        assert 'conservative: budget' in result.output

    def test_hocat_of_the_pinned_torus_names_the_budget(self, run, tmp_path):
        out = tmp_path / 'pinned.json'
        run('build', 'corpus:pinned_torus', '-o', str(out))
        result = run('hocat', str(out))
        assert 'cell budget exhausted' in result.output

    def test_undecodable_input_is_a_validation_error(self, run, tmp_path):
        path = tmp_path / 'latin.json'
        path.write_bytes(b'\xff\xfe{}')
        result = run('build', str(path))
        assert result.exit_code == 2
        assert f'{path}:1:' in result.output


class TestRepresentationCommands:

    def test_constant_is_constructible(self, run):
        result = run('check-rep', 'corpus:circle_coarse.presentation', 'corpus:constant.rep')
        assert result.output.splitlines() == ['constructible']

    def test_lower_star_is_not(self, run):
        result = run('check-rep', 'corpus:circle_coarse.presentation', 'corpus:jstar_constant.rep')
        assert result.exit_code == 0
        assert result.output.splitlines() == ['not constructible', '  y->b: 0x1 matrix is not invertible']

    def test_recollement(self, run):
        result = run('check-rep', 'corpus:circle_coarse.presentation', 'corpus:constant.rep',
                     '--recollement', 'p1,p2')
        lines = result.output.splitlines()
        assert 'open part: b=1, r=1, y=1' in lines
        assert 'closed part: k=1' in lines
        assert lines[-1] == 'reassembly ok'

    def test_count_triangle(self, run):
        result = run('count', 'corpus:noncommutative_triangle.category', '--q', '2', '--dims', '1,1,1')
        assert result.exit_code == 0
        assert '2,8,8,8' in result.output

    def test_count_point(self, run):
        result = run('count', 'corpus:point.presentation', '--q', '3', '--dims', '0;1')
        lines = result.output.splitlines()
        assert lines == ['dims,q,functors,classes,cardinality', '0,3,1,1,1', '1,3,1,1,1/2']

    def test_count_named_dims_json(self, run):
        result = run('count', 'corpus:noncommutative_triangle.category', '--field', '2',
                     '--dims', 'k=1,b=1,r=1', '--format', 'json')
        assert json.loads(result.output)[0]['classes'] == 8

    def test_count_over_budget(self, run):
        result = run('count', 'corpus:circle_coarse.presentation', '--q', '2', '--dims', '2,2,2,2',
                     '--budget', '10')
        assert result.exit_code == 4

    def test_count_bad_dims(self, run):
        result = run('count', 'corpus:point.presentation', '--q', '3', '--dims', 'one')
        assert result.exit_code == 2

    def test_count_needs_a_prime(self, run):
        result = run('count', 'corpus:point.presentation', '--q', '4', '--dims', '1')
        assert result.exit_code == 2

    def test_count_of_a_complex(self, run):
        result = run('count', 'corpus:rp2', '--q', '2', '--dims', '1')
        assert result.exit_code == 2
        assert 'rp2.json:1:' in result.output


class TestLogging:

    def test_extra_fields_are_rendered(self, caplog):
        with caplog.at_level(logging.INFO, logger='exitcalc'):
            logging.getLogger('exitcalc.core.hocat').info('localized', extra={'depth': 4, 'classes': 5})
        line = ContextFormatter('%(levelname)s %(message)s').format(caplog.records[-1])
        assert line == 'INFO localized classes=5 depth=4'

    def test_plain_records_are_unchanged(self):
        record = logging.LogRecord('exitcalc', logging.WARNING, __file__, 1, 'no context', None, None)
        assert ContextFormatter('%(levelname)s %(message)s').format(record) == 'WARNING no context'
