import time

import pytest

from bispectral import store


@pytest.fixture(scope="session")
def d3_construction():
    """A fresh n=3 solve, timed, shared by the whole session.

    The result is written to the operator cache and the in-process memo,
    so ``store.get_dn(3)`` afterwards is free.
    """
    t0 = time.perf_counter()
    c = store.construct_dn(3)
    seconds = time.perf_counter() - t0
    try:
        store.save_construction(c, store.cache_path(3))
    except OSError:
        pass
    store._MEMO[3] = c.op
    return c, seconds


@pytest.fixture(scope="session")
def d3(d3_construction):
    return d3_construction[0].op


@pytest.fixture(scope="session")
def d2():
    return store.get_dn(2)
