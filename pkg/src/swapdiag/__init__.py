"""Simulator and diagnostics for polarization entanglement swapping.

Computes a collective entanglement witness for the photon pair heralded
by a Bell-state measurement of limited visibility, emulates the
coincidence-counting experiment with shot noise, and classifies which
error channel corrupted the swap from the witness's probability
signature.
"""

from .channels import (QubitChannel, UnitaryMixture, apply_channel,
                       make_amplitude_damping, make_depolarizing,
                       make_identity, make_phase_damping,
                       unitary_mixture_form)
from .diagnose import ChannelDiagnosis, classify, estimate_parameter
from .qmat import (DensityState, ImpossibleBranchError, LinearOp, PureState,
                   partial_trace, project, tensor, validate_density)
from .sampler import (CoincidenceRecord, ExperimentData, HomCalibration,
                      MarginalRecord, calibrated_probabilities,
                      estimate_probabilities, estimate_witness, hom_calibrate,
                      simulate_counts, simulate_experiment, simulate_marginal,
                      subtract_noise)
from .swapnet import BsmModel, SwapOutcome, coincidence_operator, prepare_pairs, run_swap
from .witness import (CALIBRATED, CONDITIONED, ProbabilitySet, WitnessResult,
                      analytic_curve, collectibility, probabilities)

__version__ = "0.1.0"
