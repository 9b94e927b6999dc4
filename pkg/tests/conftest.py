import functools

import pytest
from hypothesis import settings

from curvespine.invariants import analyze
from curvespine.parser import parse_poly

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

CORPUS = [
    "x*y",
    "y^2+x^3",
    "y^2+x^5",
    "y^3+x^4",
    "y^3+x^4+x^3*y",
    "y^4+x^6+x^5*y",
    "y^4+x^3*y^2+x^6+x^5*y",
    "y^7+x^3*y^4+x^7*y^2+x^12",
    "(y^2+x^3)*(y-x)",
    "y^3+x^5",
]

WORKED = "y^3+x^4+x^3*y"


@functools.lru_cache(maxsize=None)
def table_for(text, seed=0):
    return analyze(parse_poly(text), seed=seed)


@pytest.fixture(scope="session")
def worked_table():
    return table_for(WORKED)
