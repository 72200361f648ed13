"""Hybrid solver and benchmark harness for truck-drone routing with recharge."""

from .core import (Instance, Point, TravelMatrices, build_matrices,
                   euclidean_distance, generate_uniform_instance,
                   read_instance, write_instance)
from .simulator import (SimReport, Solution, Sortie, simulate,
                        sortie_feasible, sortie_flight_time,
                        truck_only_makespan, validate_solution)

__all__ = [
    "Instance", "Point", "TravelMatrices", "build_matrices",
    "euclidean_distance", "generate_uniform_instance", "read_instance",
    "write_instance", "SimReport", "Solution", "Sortie", "simulate",
    "sortie_feasible", "sortie_flight_time", "truck_only_makespan",
    "validate_solution",
]
