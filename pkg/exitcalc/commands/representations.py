"""Commands on representations: constructibility checks and counting over F_q."""
import logging

import click

from exitcalc.commands.base import RunConfig, emit, load, output_option, parse_members
from exitcalc.core.counting import count_reps_Fq
from exitcalc.core.poset import classify_subposet
from exitcalc.core.rep import is_P_constructible, recollement_decompose
from exitcalc.errors import ValidationError
from exitcalc.utils.cache import ResultCache
from exitcalc.utils.reports import ReportEngine
from exitcalc.utils.serialize import (
    decode_category, decode_presentation, decode_representation, encode_category,
    encode_presentation, kind_of, load_document,
)

logger = logging.getLogger(__name__)


def _dims_text(dims):
    return ', '.join(f'{x}={n}' for x, n in sorted(dims.items()))


@click.command('check-rep')
@click.argument('pres_ref', metavar='PRESENTATION')
@click.argument('rep_ref', metavar='REPRESENTATION')
@click.option('--recollement', 'open_members', default=None,
              help='Comma-separated open subset of the strata to decompose along.')
def check_rep(pres_ref, rep_ref, open_members):
    """Check that a representation inverts the marked edges."""
    RunConfig('check-rep', (pres_ref, rep_ref))
    pres = load(pres_ref, decode_presentation)
    rep = load(rep_ref, decode_representation, pres)

    result = is_P_constructible(rep)
    if result.constructible:
        click.echo('constructible')
    else:
        click.echo('not constructible')
        for x, y in result.offenders:
            m = rep.mats[(x, y)]
            click.echo(f'  {x}->{y}: {m.rows}x{m.cols} matrix is not invertible')

    if open_members is not None:
        spec = classify_subposet(pres.target, parse_members(open_members))
        data = recollement_decompose(rep, spec)
        click.echo(f'open part: {_dims_text(data.open_part.dims)}')
        click.echo(f'closed part: {_dims_text(data.closed_part.dims)}')
        click.echo('reassembly ok')


def parse_dims(value, objects):
    """Dimension vectors: 'k=1,b=1' or '1,1' per vector, vectors separated by ';'."""
    vectors = []
    for chunk in value.split(';'):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(',')]
        try:
            if any('=' in p for p in parts):
                named = {}
                for p in parts:
                    x, _, n = p.partition('=')
                    named[x.strip()] = int(n)
                vectors.append(named)
            else:
                if len(parts) != len(objects):
                    raise ValidationError(f'expected {len(objects)} dimensions in "{chunk}", got {len(parts)}')
                vectors.append(dict(zip(objects, (int(p) for p in parts))))
        except ValueError:
            raise ValidationError(f'dimension vector "{chunk}" is not made of integers') from None
    if not vectors:
        raise ValidationError('--dims needs at least one dimension vector')
    return vectors


def _load_target(ref):
    document = load_document(ref)
    kind = document.decode(kind_of)
    if kind == 'category':
        return document.decode(decode_category), encode_category
    if kind == 'presentation':
        return document.decode(decode_presentation), encode_presentation
    raise ValidationError(f'can only count representations of a presentation or a category, got a {kind}'
                          ).located(document.path, 1)


@click.command()
@click.argument('target_ref', metavar='TARGET')
@click.option('--q', '--field', 'q', type=int, required=True, help='Prime size of the finite field.')
@click.option('--dims', required=True, help="Dimension vectors, e.g. 'k=1,b=1,r=1;k=2,b=1,r=1'.")
@click.option('--budget', type=int, default=None, help='Most functors enumerated per vector.')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True)
@output_option
def count(target_ref, q, dims, budget, fmt, output):
    """Count representations and their isomorphism classes over F_q."""
    run = RunConfig('count', (target_ref,), output=output, field=q, budget=budget)
    target, encode = _load_target(target_ref)
    objects = target.shape.elements if hasattr(target, 'shape') else target.objects
    cache = ResultCache()

    rows = []
    for vector in parse_dims(dims, objects):
        payload = {'target': encode(target), 'q': run.field, 'dims': vector, 'budget': run.budget}
        row = cache.get('count', payload)
        if row is None:
            row = count_reps_Fq(target, run.field, vector, run.budget).to_row()
            cache.put('count', payload, row)
        logger.info('counted', extra={'q': run.field, 'dims': row['dims'], 'classes': row['classes']})
        rows.append(row)
    emit(ReportEngine.render(ReportEngine.count_table(rows), fmt), run.output)
