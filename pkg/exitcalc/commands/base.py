import logging
from dataclasses import dataclass

import click

from exitcalc import configure, settings
from exitcalc.errors import ExitCalcError, ValidationError
from exitcalc.utils.serialize import load_document

logger = logging.getLogger(__name__)


class ExitCalcGroup(click.Group):
    """Command group that turns calculator errors into exit codes"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ExitCalcError as e:
            where = e.location or 'error'
            click.echo(f'{where}: {e}', err=True)
            logger.debug('command failed', extra={'exit_code': e.exit_code, 'error': type(e).__name__})
            ctx.exit(e.exit_code)


GLOBAL_OPTIONS = [
    click.Option(['--strict'], is_flag=True,
                 help='Verify every Smith normal form and require certified localizations.'),
    click.Option(['-v', '--verbose'], is_flag=True, help='Log at DEBUG level.'),
]


def configure_run(strict, verbose):
    if strict:
        configure('strict')
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logging.getLogger('exitcalc').setLevel(logging.DEBUG)


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple
    output: str = None
    depth: int = None
    field: int = None
    budget: int = None
    emit_dot: str = None

    def __post_init__(self):
        if self.depth is None:
            object.__setattr__(self, 'depth', settings['DEFAULT_DEPTH'])
        if self.budget is None:
            object.__setattr__(self, 'budget', settings['COUNT_BUDGET'])
        if self.depth < 2:
            raise ValidationError(f'--depth must be at least 2, got {self.depth}')
        if self.budget <= 0:
            raise ValidationError(f'--budget must be positive, got {self.budget}')


def load(ref, decoder, *args):
    """Read a JSON input and decode it, anchoring errors to its lines"""
    return load_document(ref).decode(decoder, *args)


def emit(text, output=None):
    if output:
        with open(output, 'w', encoding='utf-8') as handle:
            handle.write(text)
        click.echo(f'Written to {output}', err=True)
    else:
        click.echo(text, nl=False)


output_option = click.option('-o', '--output', type=click.Path(dir_okay=False),
                             help='Write to a file instead of standard output.')


def parse_members(value):
    return [m.strip() for m in value.split(',') if m.strip()]
