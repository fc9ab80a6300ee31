import sys
from pathlib import Path

import pytest

from fractal_martin.config import load

sys.path.insert(0, str(Path(__file__).parent))


def W(text: str) -> bytes:
    """Word from a digit string; '' or '-' is the empty word."""
    return b"" if text in ("", "-") else bytes(int(c) for c in text)


_cache = {}


def cached(name):
    if name not in _cache:
        cfg = load(name)
        _cache[name] = (cfg, cfg.chain())
    return _cache[name]


@pytest.fixture(scope="session")
def gasket():
    return cached("gasket-2d")[1]


@pytest.fixture(scope="session")
def gasket_uniform():
    return cached("gasket-2d:uniform")[1]


@pytest.fixture(scope="session")
def gasket_cfg():
    return cached("gasket-2d")[0]


@pytest.fixture(scope="session")
def carpet_cfg():
    return cached("carpet")[0]


@pytest.fixture(scope="session")
def carpet_ext():
    return cached("carpet-extended")[1]


@pytest.fixture(scope="session")
def tetra():
    return cached("tetrahedron")[1]
