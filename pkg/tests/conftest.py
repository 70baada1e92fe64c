"""Shared helpers: seeded random states and golden-file parsing."""

from __future__ import annotations

import math
import random
from pathlib import Path

import pytest

from spincavity.circuits import QubitState
from spincavity.hilbert import (
    BasisKet,
    PhotonLabel,
    Polarization,
    Propagation,
    SpinBasis,
    StateVector,
    deserialize,
)

GOLDEN_DIR = Path(__file__).parent / "golden"


def random_qubit(rng: random.Random) -> QubitState:
    theta = rng.uniform(0.0, math.pi)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return QubitState(math.cos(theta / 2.0), math.sin(theta / 2.0) * complex(math.cos(phi), math.sin(phi)))


def random_state(
    rng: random.Random,
    photon_modes: list[list[int]],
    with_spin: bool = True,
) -> StateVector:
    """Random normalized state over all (pol, dir, mode) x spin combinations."""
    kets = []
    def labels(modes):
        return [
            PhotonLabel(pol, prop, mode)
            for pol in Polarization
            for prop in Propagation
            for mode in modes
        ]

    def build(prefix, remaining):
        if not remaining:
            if with_spin:
                for spin in SpinBasis:
                    kets.append(BasisKet(tuple(prefix), spin))
            else:
                kets.append(BasisKet(tuple(prefix), None))
            return
        for label in labels(remaining[0]):
            build(prefix + [label], remaining[1:])

    build([], photon_modes)
    amps = {
        ket: complex(rng.gauss(0.0, 1.0), rng.gauss(0.0, 1.0)) for ket in kets
    }
    norm = math.sqrt(sum(abs(v) ** 2 for v in amps.values()))
    return StateVector({k: v / norm for k, v in amps.items()})


def lincomb(pairs) -> StateVector:
    """alpha*a + beta*b as a raw amplitude sum (caller keeps the norm under one)."""
    amps = {}
    first = pairs[0][1]
    for coeff, state in pairs:
        for ket, value in state.items():
            amps[ket] = amps.get(ket, 0j) + coeff * value
    return StateVector(amps, photon_count=first.photon_count, has_spin=first.has_spin)


def parse_golden(name: str) -> dict[str, StateVector]:
    """Parse a golden trace file into named states.

    Blocks start with a ``# <name>`` header and hold serialized kets.
    """
    text = (GOLDEN_DIR / name).read_text(encoding="utf-8")
    states: dict[str, StateVector] = {}
    current: str | None = None
    block: list[str] = []
    for line in text.splitlines() + ["# end"]:
        if line.startswith("#"):
            if current is not None and block:
                states[current] = deserialize("\n".join(block))
            current = line[1:].strip()
            block = []
        elif line.strip():
            block.append(line)
    return states


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20130717)
