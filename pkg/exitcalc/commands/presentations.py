"""Commands that build and transform exit-path presentations."""
import logging

import click

from exitcalc.commands.base import RunConfig, emit, load, output_option, parse_members
from exitcalc.core import exit as presentations
from exitcalc.utils.dot import presentation_dot
from exitcalc.utils.serialize import (
    decode_complex, decode_map, decode_presentation, dumps, encode_presentation,
)

logger = logging.getLogger(__name__)


def _write(pres, run):
    elements, hasse, marks = pres.counts
    logger.info('presentation ready', extra={'command': run.command, 'elements': elements,
                                             'hasse': hasse, 'marks': marks})
    emit(dumps(encode_presentation(pres)), run.output)
    if run.output:
        click.echo(f'counts ({elements}, {hasse}, {marks})', err=True)
    if run.emit_dot:
        with open(run.emit_dot, 'w', encoding='utf-8') as handle:
            handle.write(presentation_dot(pres))


@click.command()
@click.argument('complex_ref', metavar='COMPLEX')
@output_option
@click.option('--dot', 'dot_path', type=click.Path(dir_okay=False), help='Also write the shape as Graphviz.')
def build(complex_ref, output, dot_path):
    """Exit-path presentation of a stratified complex."""
    run = RunConfig('build', (complex_ref,), output=output, emit_dot=dot_path)
    sc = load(complex_ref, decode_complex)
    _write(presentations.presentation_of(sc), run)


@click.command()
@click.argument('pres_ref', metavar='PRESENTATION')
@click.option('--members', required=True, help='Comma-separated elements of the stratifying poset.')
@output_option
def restrict(pres_ref, members, output):
    """Restrict to a locally closed subposet of the strata."""
    run = RunConfig('restrict', (pres_ref,), output=output)
    pres = load(pres_ref, decode_presentation)
    _write(presentations.restrict_to(pres, parse_members(members)), run)


@click.command()
@click.argument('pres_ref', metavar='PRESENTATION')
@click.argument('map_ref', metavar='MAP')
@output_option
def coarsen(pres_ref, map_ref, output):
    """Push the stratification forward along a monotone map."""
    run = RunConfig('coarsen', (pres_ref, map_ref), output=output)
    pres = load(pres_ref, decode_presentation)
    psi = load(map_ref, decode_map, pres.target)
    _write(presentations.coarsen(pres, psi), run)


@click.command()
@click.argument('first_ref', metavar='A')
@click.argument('second_ref', metavar='B')
@output_option
def product(first_ref, second_ref, output):
    """Product of two presentations over the product of their strata."""
    run = RunConfig('product', (first_ref, second_ref), output=output)
    a = load(first_ref, decode_presentation)
    b = load(second_ref, decode_presentation)
    _write(presentations.product(a, b), run)
