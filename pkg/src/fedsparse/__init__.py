"""Energy-aware gradient sparsification for federated learning.

Selection rules that weigh gradient magnitude against per-parameter energy
cost, the budgeted-projection oracles that certify them, Monte-Carlo checks
of their expected energy footprint, and a deterministic desk-scale FedAvg
simulator with CSV reporting.
"""

from .data import ClientDataset, Dataset, load_csv_dataset, make_synthetic_task, partition_dirichlet
from .errors import ConfigurationError, VerificationError
from .federation import FederationConfig, RoundMetrics, aggregate, client_update, run_federation
from .knapsack import (
    FractionalSolution,
    KktCertificate,
    KnapsackInstance,
    budgeted_cwmp,
    exact_01,
    greedy_fractional,
    verify_kkt,
)
from .model import (
    Batch,
    LayerSpec,
    ModelParams,
    backward,
    forward,
    init_params,
    mlp_layers,
    sgd_step,
)
from .sparsify import (
    EnergyReport,
    PruningMask,
    SparseUpdate,
    apply_mask,
    build_cost_vector,
    cwmp_mask,
    efficiency_scores,
    energy_of,
    k_from_fraction,
    random_k_mask,
    top_k_mask,
)
from .theory import (
    DistributionSpec,
    McReport,
    PhiEstimate,
    estimate_expected_energies,
    estimate_phi_monotonicity,
    per_index_selection_frequencies,
    sample_instance,
)

__version__ = "0.1.0"
