import pytest

from crnkit import CountVector, Network, Transition, parse_network


@pytest.fixture
def net_bd() -> Network:
    """Birth-death: 0 -> A @ 3, A -> 0 @ 1; equilibrium c = 3."""
    return parse_network("species: A\n0 -> A @ 3\nA -> 0 @ 1")


@pytest.fixture
def net_diatomic() -> Network:
    """Dissociation/recombination: X1 -> 2 X2 @ 2, 2 X2 -> X1 @ 1."""
    return parse_network("X1 -> 2 X2 @ 2\n2 X2 -> X1 @ 1")


@pytest.fixture
def net_catalyst() -> Network:
    """Catalytic chain over species A, B, C, AC with four labeled transitions."""
    return Network(
        ("A", "B", "C", "AC"),
        (
            Transition(CountVector((0, 0, 0, 0)), CountVector((1, 0, 0, 0)), 1.0, "alpha"),
            Transition(CountVector((0, 1, 0, 0)), CountVector((0, 0, 0, 0)), 2.0, "beta"),
            Transition(CountVector((1, 0, 1, 0)), CountVector((0, 0, 0, 1)), 0.5, "gamma"),
            Transition(CountVector((0, 0, 0, 1)), CountVector((0, 2, 1, 0)), 1.25, "delta"),
        ),
    )
