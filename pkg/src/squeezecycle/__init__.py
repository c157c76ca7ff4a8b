"""Squeezing, work statistics and entropy production of a bosonic mode cycled to a critical point."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .closed_forms import (CriticalExponents, kz_exponent_b, kz_exponent_w,
                           nonclassicality_threshold, s_irr_universal, squeezing_universal,
                           w_irr_universal)
from .coherence import (DephasedPopulations, coherence_entropy, coherence_ratio,
                        dephased_populations, population_relative_entropy, thermal_von_neumann)
from .errors import (CapacityError, ConfigError, ConsistencyError, DomainError, IntegrationError,
                     NumericalError, PrecisionError, UnreliableResultError)
from .gaussian_dynamics import (CovarianceState, CycleOutcome, ThermalSpec, cycle_outcome,
                                evolve_cycle, extract_squeezing, trajectory)
from .protocol import RampSpec, coupling_at
from .work_statistics import (WorkDistribution, cumulants_from_distribution,
                              negative_work_probability, squeezed_number_overlap,
                              work_distribution)
