"""Masked sparse-sparse matrix multiplication: C = M (.) (A B).

Push-based row algorithms over four accumulators (dense MSA, hash, mask-
compressed, heap multiway merge), a pull-based inner-product algorithm,
one-phase and two-phase execution, graph kernels built on them (triangle
counting, k-truss, betweenness centrality), and a benchmark CLI.
"""

from .accumulators import (HashAccumulator, McaAccumulator, MsaAccumulator,
                           hash_spgevm, heap_insert, heap_spgevm, mca_spgevm,
                           msa_spgevm, spgevm)
from .bench import (ExperimentRecord, PerformanceProfile, density_sweep,
                    performance_profile, run_experiment, traffic_estimate)
from .generate import GeneratorSpec, generate
from .graphs import BcConfig, KernelResult, betweenness_centrality, k_truss, triangle_count
from .mmio import MatrixMarketError, read_matrix_market, write_matrix_market
from .multiply import (MultiplyPlan, MultiplyStats, PlanError, flops_of,
                       inner_product_multiply, masked_multiply,
                       masked_multiply_with_stats, one_phase_multiply,
                       symbolic_phase, two_phase_multiply)
from .semiring import Semiring, arithmetic_semiring, plus_pair_semiring, semiring_by_name
from .sparse import (CscMatrix, CsrMatrix, MaskView, SparseError,
                     degree_sort_relabel, diagonal_part, ewise_add, from_arrays,
                     from_triples, is_pattern_symmetric, permute_symmetric,
                     simple_undirected_graph, to_csc, to_csr, transpose,
                     tril_strict, triu_strict)

__version__ = "0.1.0"
