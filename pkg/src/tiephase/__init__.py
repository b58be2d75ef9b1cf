"""Phase retrieval from defocused electron micrographs, with a trainable cleanup stage.

The package simulates procedural specimens, propagates the exit wave to a
through-focus series, retrieves the in-focus phase from the transport of
intensity, and trains a two-layer network to strip the systematic and noise
errors off the retrieved maps.
"""

from .ann import (Gradients, Network, TrainConfig, TrainingDiverged, adjust,
                  apply_update, backward, forward, init_network, loss, train)
from .fields import (ComplexField, DiskMask, FrequencyGrid, ScalarField,
                     coordinate_grid, disk_mask, disk_window, frequency_grid,
                     spectral_forward, spectral_inverse)
from .io import load_field, load_network, save_field, save_network, write_pgm
from .metrics import UndefinedMetricError, error_map, offset_correct, rms_error
from .optics import (OpticsConfig, add_shot_noise, defocus_series,
                     electron_wavelength, interaction_constant, propagate)
from .pipeline import (ExperimentConfig, generate_dataset, load_manifest,
                       render, run_evaluation, run_training)
from .specimen import (Deformation, GenerationError, Ripple, SpecimenRanges,
                       SpecimenSpec, Taper, Twist, derive_seed, exact_phase,
                       exit_wave, sample_spec, thickness_map)
from .tie import (TieConfig, intensity_derivative, regularized_inverse_ksq,
                  retrieve_phase, solve_tie)

__version__ = "0.1.0"
