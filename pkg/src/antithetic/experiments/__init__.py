"""Configs, sweeps, figure datasets and the command-line front end."""

from .config import DESK_N, FULL_N, ExperimentConfig, load_config, parse_config
from .reproduce import CATALOG, figure_config, run_figure
from .sweep import Cell, SweepResult, run_cell, run_sweep
