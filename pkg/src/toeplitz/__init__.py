"""Toeplitz subshifts: hole filling, (p,q)-Toeplitz automorphisms, odometers,
word complexity, block constructions and product realizations."""

from .holewords import (
    HOLE,
    ConstantWordSystem,
    HoleWord,
    PerLevelSystem,
    PeriodicSequence,
    SequenceWindow,
    fill,
    iterate,
    skeleton,
)
from .odometer import OdometerElement, Scale, multiplicity, torsion_structure
from .pq_toeplitz import WindowMap, compose, extensional_equal, make_phi, power, root_of_shift, shift_map

__all__ = [
    "HOLE", "ConstantWordSystem", "HoleWord", "PerLevelSystem", "PeriodicSequence",
    "SequenceWindow", "fill", "iterate", "skeleton", "OdometerElement", "Scale",
    "multiplicity", "torsion_structure", "WindowMap", "compose", "extensional_equal",
    "make_phi", "power", "root_of_shift", "shift_map",
]
