"""Lattice navigation through ambiguous disk fields, and obstacle-layout experiments built on it."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .lattice import Lattice, LatticeSpec, WeightedPath, build_lattice, shortest_walk
from .scene import MarkModel, Scene, SceneDisk, Truth, State, assign_marks, disambiguate, load_scene, save_scene
from .ard import navigate, zero_risk_length
from .placement import make_window, sample_obstacles
from .pointproc import sample, sample_conditioned

__all__ = [
    "BACKEND", "Lattice", "LatticeSpec", "WeightedPath", "build_lattice", "shortest_walk",
    "MarkModel", "Scene", "SceneDisk", "Truth", "State", "assign_marks", "disambiguate",
    "load_scene", "save_scene", "navigate", "zero_risk_length", "make_window", "sample_obstacles",
    "sample", "sample_conditioned",
]
