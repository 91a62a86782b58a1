import click

from exitcalc.utils.serialize import CORPUS_PREFIX, corpus_names, kind_of, load_document


@click.command()
def corpus():
    """List the bundled examples, usable as corpus:NAME."""
    for name in corpus_names():
        document = load_document(CORPUS_PREFIX + name)
        click.echo(f'{CORPUS_PREFIX}{name}\t{document.decode(kind_of)}')
