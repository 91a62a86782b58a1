"""On-disk cache for count tables, enabled by EXITCALC_CACHE_DIR."""
import hashlib
import json
import logging
import os

from exitcalc import settings
from exitcalc.utils.serialize import dumps

logger = logging.getLogger(__name__)


class ResultCache:

    def __init__(self, directory=None):
        self.directory = directory if directory is not None else settings['CACHE_DIR']

    @property
    def enabled(self):
        return bool(self.directory)

    def key(self, kind, payload):
        digest = hashlib.sha256(dumps({'kind': kind, 'payload': payload}).encode('utf-8'))
        return digest.hexdigest()

    def _path(self, kind, payload):
        return os.path.join(self.directory, f'{kind}-{self.key(kind, payload)}.json')

    def get(self, kind, payload):
        if not self.enabled:
            return None
        path = self._path(kind, payload)
        if not os.path.exists(path):
            return None
        try:
            with open(path, encoding='utf-8') as handle:
                value = json.load(handle)
        except (OSError, json.JSONDecodeError):
            logger.warning('ignoring unreadable cache entry', extra={'cache_path': path})
            return None
        logger.info('cache hit', extra={'cache_path': path})
        return value

    def put(self, kind, payload, value):
        if not self.enabled:
            return
        os.makedirs(self.directory, exist_ok=True)
        with open(self._path(kind, payload), 'w', encoding='utf-8') as handle:
            handle.write(dumps(value))
