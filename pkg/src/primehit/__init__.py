"""Exact and certified moments of the first time a running dice sum is prime."""

from primehit.errors import (
    CapOverflowError,
    CertificationUnavailable,
    PreconditionError,
    PrimeHitError,
    ResourceLimitError,
    SizingError,
    TailCertificationError,
)
from primehit.exact_dp import (
    DpConfig,
    DpLayer,
    SurvivalSeries,
    dp_init,
    dp_step,
    iter_layers,
    render_decimal,
    run_dp,
    survival,
)
from primehit.primes import PrimeTable, build_prime_table, verify_pnt_lower_bound
from primehit.simulate import SimulationSummary, roll_until_prime, run_simulation
from primehit.tail_bounds import (
    TailReport,
    bound_r,
    bound_r2,
    bound_rv,
    certify,
    f_tail,
    g_tail,
    proposition_bound,
)

__version__ = "0.1.0"

__all__ = [
    "CapOverflowError",
    "CertificationUnavailable",
    "DpConfig",
    "DpLayer",
    "PreconditionError",
    "PrimeHitError",
    "PrimeTable",
    "ResourceLimitError",
    "SimulationSummary",
    "SizingError",
    "SurvivalSeries",
    "TailCertificationError",
    "TailReport",
    "bound_r",
    "bound_r2",
    "bound_rv",
    "build_prime_table",
    "certify",
    "dp_init",
    "dp_step",
    "f_tail",
    "g_tail",
    "iter_layers",
    "proposition_bound",
    "render_decimal",
    "roll_until_prime",
    "run_dp",
    "run_simulation",
    "survival",
    "verify_pnt_lower_bound",
]
