"""Toy one-street poker: equilibrium solving, defense-frequency datasets and
the 100-50-25 MIN calling rule."""

from .game import CardDistribution, GameSpec, GameSpecError, GameTree, build_game, payoff, pot_odds_threshold
from .metrics import GameMetrics, mdf, odf, range_advantage
from .solver import (BehavioralStrategy, SolveReport, SolverConfig, best_response_value,
                     exploitability, solve, solve_batch)
from .datagen import DatasetRow, GenConfig, generate_dataset, read_csv, sample_simplex, write_csv
from .regress import (FittedModel, ModelSpec, fit_ols, kfold_cv, mse, predict, rule_100_50_25,
                      rule_signed, run_model_zoo)

__version__ = "0.1.0"
