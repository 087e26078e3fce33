import numpy as np
import pytest

from ot12.configuration import Weights
from ot12.lattice import Torus, Window


@pytest.fixture
def torus2():
    return Torus(2)


@pytest.fixture
def torus3():
    return Torus(3)


@pytest.fixture
def torus4():
    return Torus(4)


@pytest.fixture
def w111():
    return Weights(1.0, 1.0, 1.0)


@pytest.fixture
def w215():
    return Weights(2.0, 1.0, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def random_valid_config(g, w, seed, sweeps=60):
    """A valid configuration drawn by a short heat-bath run."""
    from ot12.sampler import heat_bath_sweep, init_chain

    st = init_chain(g, w, seed)
    for _ in range(sweeps):
        heat_bath_sweep(st)
    return st.config


def _pin_vertical(frozen, X, ylo, yhi):
    from ot12.lattice import EdgeId, KIND_A, KIND_B, KIND_C

    for y in range(ylo, yhi + 1):
        frozen[EdgeId(X, y, KIND_A)] = True
        frozen[EdgeId(X, y, KIND_B)] = False
        frozen[EdgeId(X, y, KIND_C)] = False
        frozen[EdgeId(X + 1, y, KIND_C)] = False
    frozen[EdgeId(X, yhi + 1, KIND_B)] = False


def _pin_horizontal(frozen, xlo, xhi, Y):
    from ot12.lattice import EdgeId, KIND_A, KIND_B, KIND_C

    for x in range(xlo, xhi + 1):
        frozen[EdgeId(x, Y, KIND_A)] = True
        frozen[EdgeId(x, Y, KIND_B)] = False
        frozen[EdgeId(x, Y + 1, KIND_B)] = False
        frozen[EdgeId(x, Y, KIND_C)] = False
    frozen[EdgeId(xhi + 1, Y, KIND_C)] = False


def ribbon_frozen_edges(g, cx=8, cy=8):
    """Pinned edges forcing three code-1 ribbons through the B_4 box at
    (cx, cy): south along column cx, north along column cx-1 (with its
    in-box hook), east along row cy-1.  Used to sample admissible inputs
    for the encounter construction."""
    frozen = {}
    hi = (g.L if g.mode == "torus" else g.h) - 2
    _pin_vertical(frozen, cx, 0, cy - 2)
    _pin_vertical(frozen, cx - 1, cy + 1, hi)
    _pin_horizontal(frozen, cx + 1, hi, cy - 1)
    return {g.canon_edge(e): v for e, v in frozen.items()}
