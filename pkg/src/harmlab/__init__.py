"""Discrete harmonic analysis on a uniform 1-D grid."""

from .errors import (DomainError, GridMismatchError, HarmlabError, InsufficientDataError,
                     IntervalRangeError, KernelError, LevelTooLowError, StructureError,
                     UnknownSpecError)
from .grid import (DyadicInterval, Grid, GridFunction, Interval, average, lp_norm,
                   read_csv, weak_lp_norm, write_csv)
from .maximal import (dyadic_maximal, hl_maximal, m_delta, m_r, m_squared, orlicz_maximal,
                      sharp_maximal, sharp_maximal_delta)
from .orlicz import PHI, PHI_PSI, PSI, ExpL, LLogL, Power, luxemburg_norm, rao_ren_norm
from .singular import (apply_kernel_operator, bmo_norm, commutator, hilbert_kernel,
                       synthetic_cz_kernel)
from .weights import a1_constant, ap_constant, rubio_de_francia, weight_report
from .czlab import cz_decompose
from .verify import fit_growth_exponent, run_verification, weak_endpoint_check

__version__ = "0.1.0"
