import os

import pytest

from amcost.machine import FsFileGetter

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")


@pytest.fixture
def fixtures_fg():
    return FsFileGetter(FIXTURES)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
