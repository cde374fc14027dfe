"""pyqkdchain

.. module:: pyqkdchain
:platform: Unix, Windows
:synopsis: Secret-key rates and simulation of QKD over repeater chains
  that are only partially corrupted by an adversary

.. moduleauthor:: "Open Science Team VLIZ vzw" <opsci@vliz.be>
"""

from .bell import (
    BellDiagonal,
    BellSymbol,
    BellWord,
    bt_weight,
    convolve,
    convolve_all,
    ph_weight,
    phase_error_prob,
    symbol_add,
    word_add,
)
from .build import ChainFamily, create_chain_spec
from .config import ConfigError, load_chain_config
from .keyrate import (
    RateParams,
    RateReport,
    asymptotic_rate,
    bb84_asymptotic,
    bb84_finite,
    binary_entropy,
    corrected_phase,
    finite_rate,
    h_bar,
    noise_tolerance,
)
from .montecarlo import (
    MCReport,
    TrialConfig,
    sample_round,
    simulate_e91,
    verify_concentration,
)
from .noise import (
    ChainSpec,
    create_uniform_chain,
    depolarizing_dist,
    end_to_end_dist,
    honest_marginals,
    noise_parameter,
    observed_qx,
)
from .sampling import (
    SamplingParams,
    delta_for_epsilon,
    delta_prime,
    empirical_failure,
    epsilon_cl,
    epsilon_ledger,
)

__all__ = [
    "BellSymbol",
    "BellWord",
    "BellDiagonal",
    "symbol_add",
    "word_add",
    "ph_weight",
    "bt_weight",
    "convolve",
    "convolve_all",
    "phase_error_prob",
    "ChainSpec",
    "ChainFamily",
    "create_chain_spec",
    "create_uniform_chain",
    "ConfigError",
    "load_chain_config",
    "depolarizing_dist",
    "end_to_end_dist",
    "observed_qx",
    "honest_marginals",
    "noise_parameter",
    "SamplingParams",
    "epsilon_cl",
    "delta_for_epsilon",
    "delta_prime",
    "epsilon_ledger",
    "empirical_failure",
    "RateParams",
    "RateReport",
    "binary_entropy",
    "h_bar",
    "corrected_phase",
    "finite_rate",
    "asymptotic_rate",
    "bb84_finite",
    "bb84_asymptotic",
    "noise_tolerance",
    "TrialConfig",
    "MCReport",
    "sample_round",
    "simulate_e91",
    "verify_concentration",
]
