"""Adiabatic-evolution spectra for hard-problem Hamiltonians.

Builds transverse-field interpolations H(s) = (1-s) H_init + s H_problem
for Ising encodings of maximum-weight independent set, exact cover, and
3SAT instances, and analyzes them: minimum spectral gap location and
size, transition matrix elements, adiabatic runtime estimates, and
diagonal-ensemble weight traces. Exhaustive rational-arithmetic oracles
back every fast path.
"""

from .graphs import CKParams, WeightedGraph, appendix_ec_graph, generate_ck, load_graph, save_graph
from .hamiltonian import SystemHamiltonian, build
from .reductions import (
    CNF,
    ECInstance,
    IsingModel,
    appendix_ec_instance,
    ay_hamiltonian,
    decode_ground_bitstring,
    default_coupling,
    ec3_to_1in3sat,
    ec_to_mis,
    load_cnf,
    load_ec,
    load_ising,
    mis_to_ising,
    pseudo_boolean_value,
    save_cnf,
    save_ec,
    save_ising,
    scaled_ising,
    threesat_to_mis,
)
from .spectra import (
    ArtReport,
    EigenResult,
    EigensolverError,
    GapProfile,
    MatrixElement,
    art_report,
    gap_sweep,
    lowest_eigenpairs,
    matrix_element,
    norm_max,
    refine_min_gap,
    refine_profile,
    second_order_correction,
)
from .desev import GammaTrace, LevelTable, gamma_trace, group_levels
from .oracle import (
    OracleReport,
    brute_force_ising_min,
    brute_force_mis,
    check_1in3,
    check_exact_cover,
    dense_eigs,
    ising_energy,
)

__version__ = "0.1.0"
