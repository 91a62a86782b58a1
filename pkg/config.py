import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    # Only environment variable the calculator reads
    CACHE_DIR = os.environ.get('EXITCALC_CACHE_DIR') or None
    LOG_LEVEL = 'WARNING'

    # Posets up to this size keep a dense comparability matrix
    POSET_DENSE_LIMIT = 4096

    # Localization
    DEFAULT_DEPTH = 8
    REQUIRE_CERTIFIED = False
    # Cells a localization may create, shared out over the source objects
    LOCALIZE_BUDGET = 20_000

    # Representation counting
    COUNT_BUDGET = 2_000_000
    ORBIT_DIM_LIMIT = 3

    # Re-check U*m*V == D after every Smith normal form
    VERIFY_SNF = False


class DefaultConfig(Config):
    pass


class StrictConfig(Config):
    VERIFY_SNF = True
    REQUIRE_CERTIFIED = True
    LOG_LEVEL = 'INFO'


class TestingConfig(Config):
    VERIFY_SNF = True
    COUNT_BUDGET = 200_000
    LOCALIZE_BUDGET = 8_000
    CACHE_DIR = None


config = {
    'default': DefaultConfig,
    'strict': StrictConfig,
    'testing': TestingConfig,
}
