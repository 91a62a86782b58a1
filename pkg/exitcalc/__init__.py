import logging

from config import config


class Settings(dict):
    """Active configuration, loaded from one of the classes in config.py"""

    def from_object(self, obj):
        for key in dir(obj):
            if key.isupper():
                self[key] = getattr(obj, key)


settings = Settings()
settings.from_object(config['default'])

# Attributes every LogRecord has; anything else came in through ``extra``
_RECORD_FIELDS = frozenset(vars(logging.LogRecord('', 0, '', 0, '', None, None))) | {'message', 'asctime'}


class ContextFormatter(logging.Formatter):
    """Appends the ``extra`` fields of a record as sorted key=value pairs"""

    def format(self, record):
        line = super().format(record)
        context = ' '.join(
            f'{key}={value}' for key, value in sorted(vars(record).items()) if key not in _RECORD_FIELDS
        )
        return f'{line} {context}' if context else line


def configure(config_name='default'):
    settings.from_object(config[config_name])
    logging.getLogger('exitcalc').setLevel(settings['LOG_LEVEL'])
    return settings


def create_cli(config_name='default'):
    configure(config_name)
    handler = logging.StreamHandler()
    handler.setFormatter(ContextFormatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
    logging.basicConfig(level=settings['LOG_LEVEL'], handlers=[handler])

    # Register command groups
    from exitcalc.commands.base import ExitCalcGroup, GLOBAL_OPTIONS, configure_run
    from exitcalc.commands.presentations import build, restrict, coarsen, product
    from exitcalc.commands.invariants import hocat, invariants
    from exitcalc.commands.representations import check_rep, count
    from exitcalc.commands.corpus import corpus

    cli = ExitCalcGroup(
        name='exitcalc',
        help='Exit-path category calculator',
        params=list(GLOBAL_OPTIONS),
        callback=configure_run,
    )
    for command in (build, restrict, coarsen, product, hocat, invariants, check_rep, count, corpus):
        cli.add_command(command)
    return cli
