import os

import pytest

from exitcalc import configure
from exitcalc.core.homlin import Field
from exitcalc.utils.serialize import CORPUS_PREFIX, decode_presentation, load_document


@pytest.fixture(autouse=True)
def testing_settings():
    configure('testing')
    yield
    configure('testing')


def corpus_presentation(name):
    return load_document(CORPUS_PREFIX + name).decode(decode_presentation)


@pytest.fixture
def circle_coarse():
    """Circle with cells k, y < b, r over p0 < p1 < p2; the one mark is y -> b."""
    return corpus_presentation('circle_coarse.presentation')


@pytest.fixture
def circle_refined():
    return corpus_presentation('circle_refined.presentation')


@pytest.fixture
def marked_interval():
    return corpus_presentation('marked_interval.presentation')


@pytest.fixture
def point():
    return corpus_presentation('point.presentation')


@pytest.fixture
def f2():
    return Field(2)


@pytest.fixture
def corpus_path():
    def path(name):
        return os.path.join(os.path.dirname(os.path.dirname(__file__)), 'exitcalc', 'corpus', name + '.json')
    return path
