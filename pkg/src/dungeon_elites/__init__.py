"""Quality-diversity dungeon generator.

Evolves tree-encoded dungeon levels with locked-door missions and enemy
placement, illuminating a 5x5 MAP-Elites archive over leniency and
exploration descriptors.
"""

from .archive import ElitesArchive, OfferOutcome
from .decoder import LevelGrid, decode, resolve_goal
from .evolution import EvolutionConfig, run
from .fitness import (DescriptorPair, FitnessBreakdown, GenerationGoals,
                      bin_descriptors, evaluate)
from .model import Direction, IndividualTree, RoomNode, RoomType

__all__ = [
    "Direction", "DescriptorPair", "ElitesArchive", "EvolutionConfig",
    "FitnessBreakdown", "GenerationGoals", "IndividualTree", "LevelGrid",
    "OfferOutcome", "RoomNode", "RoomType", "bin_descriptors", "decode",
    "evaluate", "resolve_goal", "run",
]

__version__ = "0.1.0"
