"""Dynamic ridesharing simulation: demand learning, correlated pooling,
adjacency ride-matching, greedy idle movement and a Scaled MaxWeight baseline."""

from .core import CityMap, ScenarioConfig, TaxiState, TripRequest, ValidationError
from .demand import ValueTable, build_value_table, lookup
from .engine import PIPELINES, PipelineConfig, Simulation, plan_route, run
from .metrics import MetricsLedger, summarize

__all__ = [
    "CityMap", "ScenarioConfig", "TaxiState", "TripRequest", "ValidationError",
    "ValueTable", "build_value_table", "lookup",
    "PIPELINES", "PipelineConfig", "Simulation", "plan_route", "run",
    "MetricsLedger", "summarize",
]

__version__ = "0.1.0"
