"""Continuous tracking of heavy hitters and quantiles over k distributed streams.

A coordinator and k sites exchange messages; every protocol here counts its
communication in a shared ``CostLedger`` and is checked against an exact
oracle by the simulator.
"""
from .adversary import (HHChangeCounter, HHLowerBoundPlan, MedianChangeCounter,
                        MedianLowerBoundPlan, WhiteboxAttack, gen_hh_lb_stream,
                        gen_median_lb_stream, whitebox_attack)
from .allq import AllQuantilesTracker
from .core import ArrivalEvent, CostLedger, Direction, Kind, Message, TrackerConfig
from .experiments import RunSpec, fit_scaling, run_experiments
from .hh import HHTracker
from .oracle import ExactOracle
from .quantile import QuantileTracker
from .simulator import SimulationRun, StreamSource, simulate
from .sketches import GKSketch, SpaceSaving

__version__ = "0.1.0"

__all__ = [
    "AllQuantilesTracker", "ArrivalEvent", "CostLedger", "Direction", "ExactOracle",
    "GKSketch", "HHChangeCounter", "HHLowerBoundPlan", "HHTracker", "Kind",
    "MedianChangeCounter", "MedianLowerBoundPlan", "Message", "QuantileTracker",
    "RunSpec", "SimulationRun", "SpaceSaving", "StreamSource", "TrackerConfig",
    "WhiteboxAttack", "fit_scaling", "gen_hh_lb_stream", "gen_median_lb_stream",
    "run_experiments", "simulate", "whitebox_attack",
]
