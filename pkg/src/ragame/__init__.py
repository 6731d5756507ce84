"""Competitive ratios of finite request-answer games under stochastic input models."""

from __future__ import annotations

__version__ = "0.1.0"

from .cr_models import (
    Bracket,
    CrOptions,
    CrResult,
    Exact,
    Infinite,
    check_minimax,
    compute,
    compute_all,
    cr_iid_double_oracle,
    cr_vertex_lp,
    known_cr_fixed,
    verify_theorem1,
)
from .distributions import ALL_MODELS, DistClass, Knowledge, ModelClass, densify
from .game import Game, build_game, opt

__all__ = [
    "ALL_MODELS",
    "Bracket",
    "CrOptions",
    "CrResult",
    "DistClass",
    "Exact",
    "Game",
    "Infinite",
    "Knowledge",
    "ModelClass",
    "build_game",
    "check_minimax",
    "compute",
    "compute_all",
    "cr_iid_double_oracle",
    "cr_vertex_lp",
    "densify",
    "known_cr_fixed",
    "opt",
    "verify_theorem1",
]
