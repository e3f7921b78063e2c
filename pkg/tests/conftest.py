import pytest

from otoclab.evolution import diagonalize
from otoclab.fock import FockDim, HihoParams, build_hiho, build_iho

# Heavy diagonalizations are shared across the whole session.
_iho_cache = {}
_hiho_cache = {}


@pytest.fixture(scope="session")
def iho_prop():
    def get(n_p):
        if n_p not in _iho_cache:
            _iho_cache[n_p] = diagonalize(build_iho(FockDim(n_p)))
        return _iho_cache[n_p]

    return get


@pytest.fixture(scope="session")
def hiho_prop():
    def get(n_p, gamma=3.0, g=0.04):
        key = (n_p, gamma, g)
        if key not in _hiho_cache:
            _hiho_cache[key] = diagonalize(
                build_hiho(FockDim(n_p), HihoParams(gamma, g))
            )
        return _hiho_cache[key]

    return get
