"""Spectra of magnetic Schrodinger operators on metric graphs, exact trace
formulas over periodic orbits, and inverse recovery from Bloch-spectrum
data (homology lengths, Albanese torus, blocks, planarity, duals, and full
3-connected planar quantum graphs)."""

from .errors import InconclusiveError, InputError, NumericError, QGraphError
from .graphs import (
    BlockTree,
    CombinatorialGraph,
    OrientedCycle,
    block_decomposition,
    canonical_cycle,
    enumerate_simple_cycles,
    geometric_dual,
    incidence_vector,
    is_isomorphic,
    is_k_connected,
    nonpositive_basis_search,
    overlap,
    spanning_tree_cycle_basis,
    two_isomorphic,
    walk_homology,
)
from .metric import (
    MetricGraph,
    MetricTree,
    OneForm,
    VertexPotential,
    add_exact_form,
    albanese_gram,
    flux,
    generic_one_form,
    hodge_project,
    homology_inner_product,
    jacobian_gram,
    leaf_distance_matrix,
    split_loops,
    suppress_degree_two,
    tree_from_leaf_distances,
)
from .spectral import (
    SecularMatrix,
    SpectrumSlice,
    combinatorial_laplacian,
    combinatorial_spectrum,
    counting_function_check,
    eigenvalues,
    equilateral_correspondence_check,
    graph_isospectral,
    secular_det,
    secular_matrix,
    weyl_check,
    zero_mode_multiplicity,
)
from .orbits import (
    LengthSpectrum,
    MinimalLengthOracle,
    PeriodicOrbit,
    enumerate_orbits,
    length_spectrum,
    minimal_length_oracle,
    orbit_coefficient,
    sign_check,
    trace_check,
)
from .blochinv import (
    ExactBlochSource,
    FrequencyTable,
    LengthOracle,
    NumericBlochSource,
    RecoveredBlockTree,
    RecoveredDual,
    complexity_equilateral,
    count_shared_edges,
    cycle_generator_basis,
    extract_frequencies,
    gram_determinant,
    is_cycle_class,
    recover_albanese,
    recover_blocks,
    recover_dual,
    recover_homology_lengths,
    recover_planarity,
    recover_quantum_graph,
)
from .isospec import (
    IsospectralFamily,
    SwitchingScheme,
    edge_count_bound,
    edge_length_lists,
    family_size_bound,
    min_edge_length_from_orbits,
    quantum_isospectral_search,
    seidel_switch,
    verify_family_invariants,
)
from .fileio import emit_graph_text, parse_graph_file, parse_graph_text, write_graph_file

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
