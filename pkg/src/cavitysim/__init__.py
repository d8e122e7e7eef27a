"""Two qubits exchanging k photons with a single cavity mode.

Exact block-diagonal evolution, a dispersive closed form, reduced states,
population inversion, the Husimi Q function and two-qubit concurrence.
"""
__version__ = "0.1.0"

from .field import (  # noqa: E402
    FieldDensity, FieldState, TruncationError, binomial_amplitudes, coherent_amplitudes,
    fidelity, number_state,
)
from .model import (  # noqa: E402
    AtomPrep, BlockEigen, ExactEngine, JointDensity, ModelParams, build_block, eigen_blocks,
    evolve_exact, initial_joint,
)
from .dispersive import DispersiveEngine, dispersive_coefficients, dispersive_density  # noqa: E402
from .observables import (  # noqa: E402
    QGrid, husimi_q, inversion, reduce_to_field, reduce_to_qubit, reduce_to_qubits, total_inversion,
)
from .entanglement import (  # noqa: E402
    ConcurrenceResult, PureBipartiteState, concurrence_analytic, concurrence_mixed, concurrence_pure,
    entanglement_of_formation, spin_flip,
)
