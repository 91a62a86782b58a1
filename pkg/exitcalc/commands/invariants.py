import logging

import click

from exitcalc import settings
from exitcalc.commands.base import RunConfig, emit, load, output_option
from exitcalc.core.hocat import localize_hocat
from exitcalc.utils.dot import hocat_dot
from exitcalc.utils.reports import ReportEngine
from exitcalc.utils.serialize import decode_presentation, dumps

logger = logging.getLogger(__name__)

depth_option = click.option('--depth', type=int, default=None,
                            help='Longest zigzag searched when localizing.')


def hocat_summary(report):
    category = report.category
    lines = [f'{len(category.objects)} objects, {report.skeletal_objects()} skeletal objects']
    for (x, y), n in sorted(category.hom_sizes().items()):
        if n and (x != y or n > 1):
            lines.append(f'hom({x}→{y})={n}')
    if report.certified:
        lines.append(f'certified at depth {report.search_depth}')
    else:
        counts = ', '.join(f'{d}:{n}' for d, n in sorted(report.class_counts.items()))
        budget = '' if report.closed else 'cell budget exhausted; '
        lines.append(f'not certified at depth {report.search_depth} ({budget}classes by depth {counts})')
    return '\n'.join(lines) + '\n'


@click.command()
@click.argument('pres_ref', metavar='PRESENTATION')
@depth_option
@click.option('--dot', 'dot_path', type=click.Path(dir_okay=False),
              help='Write the localized category as Graphviz.')
@click.option('--require-certified', is_flag=True, help='Fail with exit code 3 when not certified.')
@click.option('--format', 'fmt', type=click.Choice(['text', 'json']), default='text', show_default=True)
@output_option
def hocat(pres_ref, depth, dot_path, require_certified, fmt, output):
    """Homotopy category of the exit-path category."""
    run = RunConfig('hocat', (pres_ref,), output=output, depth=depth, emit_dot=dot_path)
    pres = load(pres_ref, decode_presentation)
    require = require_certified or settings['REQUIRE_CERTIFIED']
    report = localize_hocat(pres, run.depth, require_certified=require)
    if run.emit_dot:
        with open(run.emit_dot, 'w', encoding='utf-8') as handle:
            handle.write(hocat_dot(report))
    if fmt == 'json':
        emit(dumps(report.to_dict()), run.output)
    else:
        emit(hocat_summary(report), run.output)


def invariants_text(report):
    elements, hasse, marks = report['counts']
    lines = [f"env: {report['env_homology']}"]
    for p, result in sorted(report['fiber_homology'].items()):
        lines.append(f'fiber {p}: {result}')
    lines.append('contractible fibers: ' + (', '.join(report['contractible_fibers']) or 'none'))
    lines.append(f"conservative: {report['conservative']}")
    finite = 'yes' if report['finite'] else 'no'
    lines.append(f'finite: {finite} ({elements} elements, {hasse} covers, {marks} marks)')
    return '\n'.join(lines) + '\n'


@click.command()
@click.argument('pres_ref', metavar='PRESENTATION')
@depth_option
@click.option('--format', 'fmt', type=click.Choice(['text', 'csv', 'json']), default='text',
              show_default=True)
@output_option
def invariants(pres_ref, depth, fmt, output):
    """Homology of the presentation and its fibers, conservativity, finiteness."""
    run = RunConfig('invariants', (pres_ref,), output=output, depth=depth)
    pres = load(pres_ref, decode_presentation)
    report = ReportEngine.invariants_report(pres, run.depth)
    if fmt == 'csv':
        emit(ReportEngine.render(ReportEngine.invariants_table(report), 'csv'), run.output)
    elif fmt == 'json':
        emit(dumps(ReportEngine.invariants_document(report)), run.output)
    else:
        emit(invariants_text(report), run.output)
