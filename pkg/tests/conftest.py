import os

import pytest

from memsched.graph import Graph, Node, load_graph

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fixture(name: str) -> Graph:
    return load_graph(os.path.join(FIXTURES, f"{name}.json"))


def plain_graph(sizes: dict[int, int], edges, name="g") -> Graph:
    nodes = [
        Node(id=i, op="opaque", output_shape=(s,), dtype_bytes=1)
        for i, s in sizes.items()
    ]
    return Graph(name, nodes, edges)


@pytest.fixture
def chain():
    return fixture("chain")


@pytest.fixture
def twochain():
    return fixture("twochain")


@pytest.fixture
def diamond():
    return fixture("diamond")


@pytest.fixture
def stacked_diamonds():
    return fixture("stacked_diamonds")


@pytest.fixture
def cellnet():
    return fixture("cellnet")
