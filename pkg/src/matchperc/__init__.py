"""Matching graphs, non-self-touching paths and site percolation on plane lattices."""

from .hypgeo import EUCLIDEAN, HYPERBOLIC, Geodesic, Isometry, distance, project
from .metric import (assemble_two_sided, find_weak_certificate, is_maximal, select_diagonal,
                     trace_geodesic_path, two_sided, weak_criterion)
from .nst import (Verdict, annulus_cycle, check_pi_A, check_pi_hat_A, is_nst,
                  remove_oxbows_cycle, remove_oxbows_path)
from .percolation import (enhancement_ratio, estimate_pc, make_instance, pivotal_sets,
                          russo_derivatives, sample_theta, sweep)
from .planegraph import (HatGraph, MatchingGraph, PlaneGraph, build_hat, build_matching,
                         constants)
from .tilings import TilingSpec, framed_square_tiling, generate, generate_tube

__all__ = [
    "EUCLIDEAN", "HYPERBOLIC", "Geodesic", "Isometry", "distance", "project",
    "assemble_two_sided", "find_weak_certificate", "is_maximal", "select_diagonal",
    "trace_geodesic_path", "two_sided", "weak_criterion",
    "Verdict", "annulus_cycle", "check_pi_A", "check_pi_hat_A", "is_nst",
    "remove_oxbows_cycle", "remove_oxbows_path",
    "enhancement_ratio", "estimate_pc", "make_instance", "pivotal_sets",
    "russo_derivatives", "sample_theta", "sweep",
    "HatGraph", "MatchingGraph", "PlaneGraph", "build_hat", "build_matching", "constants",
    "TilingSpec", "framed_square_tiling", "generate", "generate_tube",
]
