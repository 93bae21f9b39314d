"""Fermionic Gaussian circuit simulator with non-Gaussian extensions."""

import os as _os

# FGSIM_THREADS caps the BLAS pools; it only takes effect if numpy is not loaded yet
_threads = _os.environ.get("FGSIM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .errors import (FgsimError, InvalidArgument, InvalidState, ParseError,  # noqa: E402
                     ResourceLimit, ValidationError)
from .gaussian_core import (GaussianCircuit, GaussianGenerator, PhasedGaussianState,  # noqa: E402
                            amplitude, apply_circuit, evolve, measure_probability, overlap,
                            prepare_basis_state, project, random_gaussian_state)
from .decomp_unitary import (StateDecomposition, UnitaryDecomposition,  # noqa: E402
                             decompose_two_qubit_fermionic, optimal_unitary_decomposition)
from .decomp_channel import (ChannelDecomposition, DecompositionOracle,  # noqa: E402
                             equimagical_noisy_rotation)
from .sparsify import SparseSuperposition, choose_rank, sparsify_circuit, sparsify_state  # noqa: E402
from .norm_estimation import NormEstimate, exact_norm, fast_norm  # noqa: E402
from .sampler import (CircuitProgram, SampleReport, Sampler, sample_adaptive,  # noqa: E402
                      sample_approx, sample_exact)
from .kernels import BACKEND  # noqa: E402

__version__ = "0.1.0"
