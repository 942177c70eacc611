"""Stochastic pump currents on finite multigraphs.

Simulates the master equation of a periodically driven Markov process on a
graph, computes the adiabatic current map, and evaluates the exact integer
(topological) current that the low-temperature adiabatic current converges to.
"""

from .adiabatic import analytic_current, solve_A, tree_A
from .dynamics import (
    average_current,
    decay_constants,
    evolve,
    instantaneous_current,
    master_operator,
    monodromy,
    periodic_solution,
)
from .errors import *  # noqa: F401,F403
from .formats import parse_graph, parse_protocol, serialize_graph, serialize_protocol
from .graph_core import Graph, boundary, coboundary, cycle_basis, to_cycle_coords, validate_graph
from .holonomy import ground_holonomy_probe, ground_state, holonomy_of_chain, twisted_master
from .params import (
    HeightFunction,
    ParamPoint,
    barrier_resolutions,
    boltzmann,
    boltzmann_derivative,
    enumerate_essential_cells,
    forest_of,
    height_function,
    is_inessential,
    top_cell_current,
)
from .protocol import Fourier, FourierProtocol, evaluate_protocol
from .sweep import sweep
from .topo import arc_decompose, check_loop_robust, topological_current
from .trees import enumerate_spanning_trees, path_chain, sigma_tree, tree_boltzmann, tree_weight

__version__ = "0.1.0"
