import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deontic_mc import rss
from deontic_mc.automaton import StitAutomaton


def make_t0(root_label=("p",)):
    """Two-branch bottleneck automaton used throughout the suites."""
    return StitAutomaton(
        ["q0", "q1", "q2"], "q0", ["K1", "K2", "stay"], [],
        [("q0", "K1", "q1", 4), ("q1", "stay", "q1", 5),
         ("q0", "K2", "q2", 3), ("q2", "stay", "q2", 2)],
        {"q0": set(root_label), "q1": {"p"}, "q2": set()})


@pytest.fixture
def t0():
    return make_t0()


@pytest.fixture
def fig1():
    return rss.fig1_model()


@pytest.fixture
def fig2():
    return rss.fig2_model()


@pytest.fixture
def fig3():
    return rss.fig3_model()


@pytest.fixture
def unavoidable():
    return rss.unavoidable_model()


@pytest.fixture
def merge():
    return rss.merge_automaton()
