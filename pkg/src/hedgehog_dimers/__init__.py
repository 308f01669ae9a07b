"""Dimer model on hedgehog domains: Kasteleyn coupling, s-holomorphic boundary problem,
exact sampling and convergence experiments."""
from .kasteleyn import KasteleynSystem, assemble
from .lattice import Domain, approximate_disk, build_domain, build_hedgehog, rectangle_cells
from .rbvp import solve_rbvp, verify_rbvp
from .suite import identity_suite
from .tiling import Tiling, enumerate_tilings, sample_exact

__version__ = "0.1.0"

__all__ = ["Domain", "KasteleynSystem", "Tiling", "approximate_disk", "assemble", "build_domain",
           "build_hedgehog", "enumerate_tilings", "identity_suite", "rectangle_cells",
           "sample_exact", "solve_rbvp", "verify_rbvp"]
