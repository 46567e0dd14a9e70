import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ltc.inference import derive
from ltc.parser import parse
from ltc.validate import check_ltc_theory

PROGRAMS = os.path.join(os.path.dirname(__file__), "..", "programs")


def program_path(name: str) -> str:
    return os.path.join(PROGRAMS, name)


def load(name: str, vocabularies=()):
    with open(program_path(name), encoding="utf-8") as fh:
        return parse(fh.read(), vocabularies=vocabularies)


@pytest.fixture(scope="session")
def pacman():
    return load("pacman.ltc")


@pytest.fixture(scope="session")
def pacman_theory(pacman):
    return pacman.theories["T"]


@pytest.fixture(scope="session")
def pacman_derivation(pacman_theory):
    return derive(check_ltc_theory(pacman_theory))


@pytest.fixture(scope="session")
def pacman_play():
    return load("pacman_play.ltc")


@pytest.fixture(scope="session")
def play_derivation(pacman_play):
    return derive(check_ltc_theory(pacman_play.theories["T"]))


@pytest.fixture(scope="session")
def corridor3(pacman):
    return pacman.structures["Corridor3"]


@pytest.fixture(scope="session")
def deadlock_program():
    return load("deadlock.ltc")


@pytest.fixture(scope="session")
def deadlock_derivation(deadlock_program):
    return derive(check_ltc_theory(deadlock_program.theories["T"]))


@pytest.fixture(scope="session")
def grid2x2(pacman):
    prog = load("grid2x2.ltc", vocabularies=[pacman.vocabularies["P"]])
    return prog.structures["Grid2x2"]


@pytest.fixture(scope="session")
def corridor_plan():
    return load("corridor_plan.ltc")


@pytest.fixture(scope="session")
def plan_derivation(corridor_plan):
    return derive(check_ltc_theory(corridor_plan.theories["T"]))


@pytest.fixture(scope="session")
def deadend():
    return load("deadend.ltc")


@pytest.fixture(scope="session")
def deadend_derivation(deadend):
    return derive(check_ltc_theory(deadend.theories["T"]))
