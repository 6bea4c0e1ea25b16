import numpy as np
import pytest

from corpus import DAExample, DialogTurn, LabelInventory, SRLExample, Vocabulary, srl_roles
from synthetic import generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def acts():
    return LabelInventory(["statement", "question", "hold", "complaint"])


@pytest.fixture
def roles():
    return srl_roles()


@pytest.fixture
def turn():
    return DialogTurn("system", ("do", "you", "like", "dogs"))


@pytest.fixture
def tiny_vocab():
    return Vocabulary(["do", "you", "like", "dogs", "yes", "i", "cats"])


@pytest.fixture
def da_example(turn):
    return DAExample((turn,), ("yes",), frozenset({0}), completed=("yes", "i", "like", "dogs"))


@pytest.fixture(scope="session")
def synthetic_corpora():
    return generate_synthetic(seed=3, n=24)


@pytest.fixture
def srl_example(synthetic_corpora) -> SRLExample:
    return synthetic_corpora[2][0]
