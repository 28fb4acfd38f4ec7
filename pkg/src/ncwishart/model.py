"""Physical-channel layer.

A Ricean MIMO channel H = eps*sqrt(K)*Hbar + eps*Htilde (eps = 1/sqrt(K+1),
Htilde i.i.d. standard complex Gaussian) induces a complex noncentral
Wishart Gram matrix whose noncentrality spectrum is K * sigma_j(Hbar)^2.
This module holds the channel/spec types and the bridges between them;
all distribution code downstream consumes only :class:`WishartSpec`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateSpectrumError",
    "RiceanChannel",
    "WishartSpec",
    "SubchannelSnr",
    "spectrum_from_channel",
    "mean_from_singulars",
    "subchannel_snr",
]

# Retained noncentrality eigenvalues must be pairwise separated by more
# than this relative gap: the Vandermonde denominators in the
# normalization constants blow up for near-equal lambdas.
DELTA_DISTINCT = 1e-6

# Numerical-rank cutoff: sigma_j^2 kept iff sigma_j^2 > RANK_TOL * sigma_1^2.
RANK_TOL = 1e-10


class DegenerateSpectrumError(ValueError):
    """Noncentrality eigenvalues too close together (or invalid order)."""


@dataclass(frozen=True)
class RiceanChannel:
    """Ricean MIMO channel description.

    Attributes
    ----------
    n, m : int
        Receive / transmit antenna counts.
    K : float
        Ricean factor, linear scale (>= 0).  dB conversion belongs to the
        CLI layer only.
    Hbar : complex ndarray, shape (n, m)
        Deterministic component, normalized so trace(Hbar Hbar^H) = n*m.
    """

    n: int
    m: int
    K: float
    Hbar: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("antenna counts must be positive")
        if self.K < 0:
            raise ValueError("Ricean K must be nonnegative")
        H = np.asarray(self.Hbar, dtype=complex)
        if H.shape != (self.n, self.m):
            raise ValueError(f"Hbar must be {self.n}x{self.m}, got {H.shape}")
        object.__setattr__(self, "Hbar", H)
        nm = self.n * self.m
        tr = float(np.real(np.trace(H @ H.conj().T)))
        if abs(tr - nm) > 1e-9 * nm:
            raise ValueError(
                f"trace(Hbar Hbar^H) = {tr:.12g} deviates from n*m = {nm} "
                "by more than 1e-9 relative"
            )
        H.setflags(write=False)

    @property
    def epsilon(self) -> float:
        """Normalization 1/sqrt(K+1)."""
        return 1.0 / np.sqrt(self.K + 1.0)

    def __hash__(self):
        return hash((self.n, self.m, self.K, self.Hbar.tobytes()))

    def __eq__(self, other):
        return (
            isinstance(other, RiceanChannel)
            and (self.n, self.m, self.K) == (other.n, other.m, other.K)
            and np.array_equal(self.Hbar, other.Hbar)
        )


@dataclass(frozen=True)
class WishartSpec:
    """Dimensions and noncentrality spectrum of the Wishart matrix.

    ``lambdas`` are the L strictly decreasing positive eigenvalues of the
    noncentrality matrix; L = 0 is the central case.
    """

    s: int
    t: int
    L: int
    lambdas: tuple = ()

    def __post_init__(self):
        if not (1 <= self.s <= self.t):
            raise ValueError(f"need 1 <= s <= t, got s={self.s}, t={self.t}")
        lam = tuple(float(v) for v in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if self.L != len(lam):
            raise ValueError(f"L={self.L} but {len(lam)} lambdas given")
        if self.L > self.s:
            raise ValueError(f"rank L={self.L} exceeds s={self.s}")
        if any(v <= 0 for v in lam):
            raise DegenerateSpectrumError("lambdas must be strictly positive")
        for i in range(1, len(lam)):
            if lam[i - 1] <= lam[i]:
                raise DegenerateSpectrumError("lambdas must be strictly decreasing")
            if (lam[i - 1] - lam[i]) <= DELTA_DISTINCT * lam[i - 1]:
                raise DegenerateSpectrumError(
                    f"lambdas {lam[i-1]:.9g} and {lam[i]:.9g} closer than the "
                    f"{DELTA_DISTINCT:g} relative gap; perturb the spectrum "
                    "explicitly if this is intended"
                )


@dataclass(frozen=True)
class SubchannelSnr:
    """Instantaneous SNR of one beamforming subchannel."""

    k: int
    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def spectrum_from_channel(ch: RiceanChannel) -> WishartSpec:
    """Reduce a Ricean channel to its Wishart noncentrality spectrum.

    Returns (s, t, L, {K * sigma_j^2}) with sigma_j the nonzero singular
    values of Hbar sorted descending; values below the rank tolerance are
    dropped.  K = 0 gives the central case (L = 0).
    """
    s, t = min(ch.n, ch.m), max(ch.n, ch.m)
    if ch.K == 0.0:
        return WishartSpec(s=s, t=t, L=0, lambdas=())
    sig = np.linalg.svd(ch.Hbar, compute_uv=False)
    sig2 = sig * sig
    keep = sig2 > RANK_TOL * sig2[0]
    lam = ch.K * sig2[keep]
    return WishartSpec(s=s, t=t, L=int(keep.sum()), lambdas=tuple(lam))


def mean_from_singulars(n: int, m: int, sigmas, seed: int) -> np.ndarray:
    """Construct an n x m deterministic channel mean with the given
    singular values.

    The unitary factors come from a seeded QR of a complex Ginibre draw
    (deterministic per seed).  Since every distribution downstream
    depends on the mean only through its singular values, the choice of
    unitaries is immaterial; the seed only pins the realization.

    The singular values are rescaled so that sum(sigma^2) = n*m exactly;
    a warning is emitted when that adjusts the inputs by more than 1e-9
    relative.
    """
    sigmas = np.sort(np.asarray(sigmas, dtype=float))[::-1]
    if sigmas.ndim != 1 or len(sigmas) > min(n, m):
        raise ValueError(f"need at most min(n,m)={min(n, m)} singular values")
    if np.any(sigmas <= 0):
        raise ValueError("singular values must be positive")
    nm = float(n * m)
    ss = float(np.sum(sigmas**2))
    factor = np.sqrt(nm / ss)
    if abs(factor - 1.0) > 1e-9:
        warnings.warn(
            f"rescaling singular values by {factor:.9g} to meet the "
            f"trace normalization (sum sigma^2 = {ss:.9g}, n*m = {nm:g})",
            stacklevel=2,
        )
    sigmas = sigmas * factor

    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    r = len(sigmas)
    U = _seeded_unitary(rng, n)[:, :r]
    V = _seeded_unitary(rng, m)[:, :r]
    return (U * sigmas) @ V.conj().T


def _seeded_unitary(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    # fix the phase convention so the result is a deterministic function
    # of the Ginibre draw, not of LAPACK's internal sign choices
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def subchannel_snr(phi_k: float, p_k: float, ch: RiceanChannel, k: int = 0) -> SubchannelSnr:
    """SNR of a subchannel carrying eigenvalue phi_k at power p_k:
    gamma = eps^2 * phi_k * p_k."""
    if phi_k < 0:
        raise ValueError("phi_k must be nonnegative")
    if p_k <= 0:
        raise ValueError("p_k must be positive")
    eps2 = 1.0 / (ch.K + 1.0)
    return SubchannelSnr(k=k, gamma=eps2 * phi_k * p_k)
