"""Beam entropy of sparse mm-wave MIMO channels."""

from ._kernels import BACKEND
from .array import ArrayGeometry, Codebook, SteeringVector, beam_gain, dft_codebook, steering_vector
from .beamstats import (
    BeamHistogram,
    BeamPmf,
    EntropyReport,
    accumulate,
    arcsine_pmf_oracle,
    dft_arcsine_pmf,
    entropy,
    relative_entropy,
    to_pmf,
)
from .beamtrain import BeamSelection, GainMatrix, expected_probe_count, select_best, sweep
from .channel import (
    ChannelMatrix,
    ChannelRealization,
    PathCluster,
    Scenario,
    ScenarioConfig,
    apply_tx_power,
    draw_realization,
    realization_to_matrix,
    scenario_defaults,
    subcarrier_sweep,
)
from .montecarlo import ExperimentResult, ExperimentSpec, merge, run
from .specdecomp import SvdReport, analyze, singular_values

__version__ = "0.1.0"
