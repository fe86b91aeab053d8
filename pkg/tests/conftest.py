import pytest

from gdkkt.grid import GridModel, GridSpec
from gdkkt.tfnp import (
    eol_from_edges,
    iter_from_map,
    preprocess_eol,
    preprocess_iter,
)

# the running example instances: End-of-Line edges (1,4), (2,8), (4,6),
# (6,2), (7,3) on 8 vertices and an Iter map with fixed points {2, 6, 8}
DESK_EDGES = [(1, 4), (2, 8), (4, 6), (6, 2), (7, 3)]
DESK_ITER = {1: 3, 3: 6, 4: 5, 5: 7, 7: 8}


@pytest.fixture(scope="session")
def desk_eol_raw():
    return eol_from_edges(3, DESK_EDGES)


@pytest.fixture(scope="session")
def desk_iter_raw():
    return iter_from_map(3, DESK_ITER)


@pytest.fixture(scope="session")
def desk_eol(desk_eol_raw):
    return preprocess_eol(desk_eol_raw)


@pytest.fixture(scope="session")
def desk_iter(desk_iter_raw):
    return preprocess_iter(desk_iter_raw)


@pytest.fixture(scope="session")
def desk_model(desk_eol, desk_iter):
    return GridModel(GridSpec(3, 3), desk_eol, desk_iter)


@pytest.fixture(scope="session")
def tiny_model():
    eol = preprocess_eol(eol_from_edges(1, [(1, 2)]))
    it = preprocess_iter(iter_from_map(1, {1: 2}))
    return GridModel(GridSpec(1, 1), eol, it)


@pytest.fixture(scope="session")
def desk_tables(desk_model):
    import gdkkt._core as core

    return core.build_tables(desk_model)


@pytest.fixture(scope="session")
def desk_kkt(desk_eol, desk_iter):
    from gdkkt.emit import emit_instance

    return emit_instance(desk_eol, desk_iter)
