"""Ordered-eigenvalue distributions of complex noncentral Wishart matrices
and the MIMO multichannel-beamforming performance quantities built on them.

Layering (low to high):

- ``specfun``    scalar special functions (incomplete gammas, Bessel I,
                 Marcum/Nuttall Q, Laguerre, multivariate gamma)
- ``quadrature`` vectorized adaptive Gauss-Kronrod integration
- ``model``      Ricean channel -> Wishart noncentrality spectrum bridge
- ``eigdist``    exact and asymptotic ordered-eigenvalue CDFs/pdfs
- ``perf``       SER, diversity order, array gain, outage probability
- ``mcsim``      reproducible Monte Carlo oracle
- ``cli``        command-line front end (``ncwishart``)
"""

from .model import RiceanChannel, SubchannelSnr, WishartSpec, mean_from_singulars, spectrum_from_channel, subchannel_snr
from .eigdist import (
    AsymptoticCoeffs,
    SignedLogDet,
    asymptotic_coeffs,
    cdf_asymptotic,
    cdf_kth,
    cdf_max,
    cdf_min,
    joint_pdf,
    pdf_asymptotic,
    pdf_kth,
    singular_value_cdf,
)
from .perf import (
    MBConfig,
    Modulation,
    array_gain,
    diversity_order,
    outage,
    outage_asymptotic,
    ser_global,
    ser_global_high_snr,
    ser_high_snr,
    ser_subchannel,
)
from .mcsim import EmpiricalCdf, McRun, empirical_eig_cdfs, empirical_outage, empirical_ser, sample_channel

__version__ = "0.1.0"

__all__ = [
    "RiceanChannel",
    "WishartSpec",
    "SubchannelSnr",
    "spectrum_from_channel",
    "mean_from_singulars",
    "subchannel_snr",
    "SignedLogDet",
    "AsymptoticCoeffs",
    "cdf_min",
    "cdf_max",
    "cdf_kth",
    "joint_pdf",
    "asymptotic_coeffs",
    "cdf_asymptotic",
    "pdf_asymptotic",
    "pdf_kth",
    "singular_value_cdf",
    "Modulation",
    "MBConfig",
    "ser_subchannel",
    "ser_global",
    "diversity_order",
    "array_gain",
    "ser_high_snr",
    "ser_global_high_snr",
    "outage",
    "outage_asymptotic",
    "McRun",
    "EmpiricalCdf",
    "sample_channel",
    "empirical_eig_cdfs",
    "empirical_ser",
    "empirical_outage",
    "__version__",
]
