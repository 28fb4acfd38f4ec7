"""Exact and asymptotic marginal distributions of the ordered eigenvalues.

The exact CDFs are ratios of determinants of s x s matrices whose entries
are Nuttall Q-functions (noncentral columns) and incomplete gamma
functions (central columns):

  smallest eigenvalue:  F(x) = 1 - |Psi(x)| / |Psi(0)|
  largest eigenvalue:   F(x) = |Xi(x)| / |Psi(0)|
  k-th largest:         F_k(x) = sum over row subsets T, |T| < k, of
                        |Theta_T(x)| / |Psi(0)|, where Theta_T carries
                        Psi-rows on T and Xi-rows elsewhere.  (The |T| = 0
                        term is the largest-eigenvalue CDF; k = s
                        reproduces the smallest-eigenvalue CDF, which the
                        tests exploit as a cross-check.)

All determinants are formed in (sign, log-magnitude) space after row
equilibration; ratios are exponentiated only at the end.  The first-order
small-x expansions (pdf ~ a_k x^{d_k}) are computed from the same
spectrum, with every overflow-prone factor carried in logs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import special as sps

from .model import WishartSpec, RiceanChannel, spectrum_from_channel
from . import specfun
from .specfun import _nuttall_coeffs, _boundary_sum

__all__ = [
    "SignedLogDet",
    "AsymptoticCoeffs",
    "ConditioningWarning",
    "psi_entry",
    "xi_entry",
    "cdf_min",
    "cdf_max",
    "cdf_kth",
    "joint_pdf",
    "asymptotic_coeffs",
    "cdf_asymptotic",
    "pdf_asymptotic",
    "pdf_kth",
    "singular_value_cdf",
]

# Combinatorial guard: the k-th-eigenvalue sum enumerates C(s, k-1) row
# subsets; beyond s = 12 (924 determinants at worst) this is no longer a
# desk-scale computation.
MAX_S = 12

# Values outside [0,1] by more than this are left unclamped so tests can
# detect genuine failures; smaller excursions are rounding noise.
_CLAMP_EPS = 1e-9


class ConditioningWarning(UserWarning):
    """Determinant ratio estimated to lose more than 6 decimal digits."""


@dataclass(frozen=True)
class SignedLogDet:
    """A determinant as sign and log of absolute value."""

    sign: int
    logmag: float

    @classmethod
    def from_matrix(cls, a: np.ndarray) -> "SignedLogDet":
        sign, logmag = _slogdet_eq(np.asarray(a, dtype=float)[None, ...])
        return cls(int(sign[0]), float(logmag[0]))

    @property
    def value(self) -> float:
        return 0.0 if self.sign == 0 else self.sign * math.exp(self.logmag)


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """Leading-order expansion data for one ordered eigenvalue:
    pdf ~ a_k x^{d_k}, cdf ~ a_k x^{d_k+1}/(d_k+1) as x -> 0."""

    k: int
    d: int
    log_a: float

    @property
    def a(self) -> float:
        return math.exp(self.log_a)


# ---------------------------------------------------------------------------
# determinant plumbing
# ---------------------------------------------------------------------------

def _slogdet_eq(mats: np.ndarray):
    """Row-equilibrated slogdet over a batch (..., s, s) of real matrices."""
    scale = np.max(np.abs(mats), axis=-1)
    safe = np.where(scale > 0.0, scale, 1.0)
    sign, logdet = np.linalg.slogdet(mats / safe[..., None])
    logdet = logdet + np.sum(np.log(safe), axis=-1)
    sign = np.where(np.any(scale == 0.0, axis=-1), 0.0, sign)
    logdet = np.where(sign == 0.0, -np.inf, logdet)
    return sign, logdet


def _warn_if_ill_conditioned(mats: np.ndarray, where: str):
    """Sample a few matrices from the batch and flag heavy digit loss."""
    flat = mats.reshape(-1, mats.shape[-1], mats.shape[-1])
    idx = np.unique(np.linspace(0, len(flat) - 1, min(len(flat), 5)).astype(int))
    worst = 0.0
    for i in idx:
        a = flat[i]
        scale = np.max(np.abs(a), axis=-1)
        a = a / np.where(scale > 0, scale, 1.0)[:, None]
        try:
            c = np.linalg.cond(a, 1)
        except np.linalg.LinAlgError:
            c = np.inf
        worst = max(worst, float(c))
    if worst > 1e6:
        warnings.warn(
            f"{where}: determinant conditioning estimate {worst:.2e} "
            f"(~{math.log10(worst):.0f} digits lost); values in the deep "
            "tail may be dominated by rounding",
            ConditioningWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# matrix entries
# ---------------------------------------------------------------------------

def _gamma_order(spec: WishartSpec, i: int, j: int) -> int:
    # order of the incomplete-gamma entries for central columns
    return spec.t + spec.s - i - j + 1


def _nuttall_pq(spec: WishartSpec, i: int):
    return spec.s + spec.t - 2 * i + 1, spec.t - spec.s


def _entry_prefactor(spec: WishartSpec, i: int) -> float:
    return 2.0 ** (0.5 * (2 * i - spec.s - spec.t))


def _lambda_columns(spec: WishartSpec, x: np.ndarray, lower: bool):
    """Columns j <= L of Psi (lower=False) or Xi (lower=True) on a grid.

    Returns array (nx, s, L).  One Marcum series per column is shared by
    all rows of that column.
    """
    s, L = spec.s, spec.L
    out = np.empty((x.size, s, L))
    b = np.sqrt(2.0 * x)
    for j in range(L):
        a = math.sqrt(2.0 * spec.lambdas[j])
        base = specfun.marcum_p(1, a, b) if lower else specfun.marcum_q(1, a, b)
        for i in range(1, s + 1):
            p, q = _nuttall_pq(spec, i)
            mc, bd = _nuttall_coeffs(p, q)
            acc = np.zeros_like(b)
            for ap, c in mc.items():
                acc += float(c) * a**ap * base
            bsum = _boundary_sum(bd, a, b)
            acc = acc - bsum if lower else acc + bsum
            out[:, i - 1, j] = _entry_prefactor(spec, i) * acc
    return out


def _gamma_columns(spec: WishartSpec, x: np.ndarray, lower: bool):
    """Columns j > L (pure incomplete gamma), array (nx, s, s-L)."""
    s, L = spec.s, spec.L
    out = np.empty((x.size, s, s - L))
    fn = specfun.lower_incomplete_gamma if lower else specfun.upper_incomplete_gamma
    for j in range(L + 1, s + 1):
        for i in range(1, s + 1):
            out[:, i - 1, j - L - 1] = fn(_gamma_order(spec, i, j), x)
    return out


def _psi_matrix(spec: WishartSpec, x: np.ndarray) -> np.ndarray:
    return np.concatenate(
        [_lambda_columns(spec, x, lower=False), _gamma_columns(spec, x, lower=False)],
        axis=2,
    )


def _xi_matrix(spec: WishartSpec, x: np.ndarray) -> np.ndarray:
    return np.concatenate(
        [_lambda_columns(spec, x, lower=True), _gamma_columns(spec, x, lower=True)],
        axis=2,
    )


# ---------------------------------------------------------------------------
# divided-difference form of the largest-eigenvalue determinant
#
# At small x every noncentral column of Xi is the SAME row vector up to the
# column scale e^{-lam_j} lam_j^{q/2}: the determinant only survives at
# order x^{s t} through cancellation across columns, which a plain LU in
# doubles cannot resolve below ~1e-12 relative.  Rewriting the noncentral
# block in the Newton (divided-difference) basis performs that column
# antisymmetrization algebraically:
#
#   det[f_i(lam_j)] = det[f_i[lam_1..lam_j]] * prod_{i<j}(lam_j - lam_i)
#
# with f_i(lam) = e^{-lam} S_i(lam) and S_i a power series with positive
# coefficients: S_i(lam) = sum_m lam^m gaminc(t-i+1+m, x) / (m! (q+m)!).
# The Leibniz rule f[..] = sum_k e[..k] S[k..] then needs only divided
# differences of e^{-lam} (small table, scalar) and of monomials, which are
# complete homogeneous symmetric polynomials (all positive).  The result
# keeps full relative accuracy at any depth of the lower tail, up to a
# residual e^{lam-spread} cancellation inside the e^{-lam} table.
# ---------------------------------------------------------------------------

def _exp_dd_prefix(lams: tuple) -> np.ndarray:
    """Divided differences of e^{-lam} over prefixes: out[k] = e[lam_1..lam_{k+1}]."""
    n = len(lams)
    col = np.array([math.exp(-v) for v in lams])
    out = np.empty(n)
    out[0] = col[0]
    for width in range(1, n):
        col = (col[1:] - col[:-1]) / (np.array(lams[width:]) - np.array(lams[:-width]))
        out[width] = col[0]
    return out


def _homog_sym(vals: np.ndarray, dmax: int) -> np.ndarray:
    """Complete homogeneous symmetric polynomials h_0..h_dmax of vals."""
    h = np.zeros(dmax + 1)
    h[0] = 1.0
    for v in vals:
        for d in range(1, dmax + 1):
            h[d] += v * h[d - 1]
    return h


@lru_cache(maxsize=64)
def _dd_column_weights(spec: WishartSpec):
    """Scalar data of the divided-difference columns.

    Returns (mmax, W, sign_pre, log_pre): W[j, m] are the column weights
    such that the j-th Newton-basis entry is sum_m c_m Lam^m W[j, m]
    gaminc(t-i+1+m, x), and sign/log_pre restore det(Xi) from the
    transformed determinant.
    """
    lam = np.asarray(spec.lambdas, dtype=float)
    L, q = spec.L, spec.t - spec.s
    Lam = float(lam[0])
    mu = lam / Lam
    mmax = min(int(1.5 * math.sqrt(2.0 * Lam) + 60.0), 500)

    edd = _exp_dd_prefix(tuple(lam))  # e[lam_1..lam_k], k = 1..L
    W = np.zeros((L, mmax + 1))
    for j in range(1, L + 1):
        for k in range(1, j + 1):
            h = _homog_sym(mu[k - 1 : j], mmax)  # over mu_k..mu_j
            # the term carries Lam^{-(j-k)}; the column pulls out
            # Lam^{-(j-1)}, leaving Lam^{k-1} here
            shift = j - k
            W[j - 1, shift:] += edd[k - 1] * Lam ** (k - 1) * h[: mmax + 1 - shift]

    # det restore: column scales lam_j^{q/2} * Lam^{-(j-1)}, then the
    # Newton-basis Vandermonde (descending lambdas: each factor negative)
    log_pre = 0.5 * q * float(np.sum(np.log(lam)))
    log_pre -= 0.5 * L * (L - 1) * math.log(Lam)
    sign_pre = 1 if (L * (L - 1) // 2) % 2 == 0 else -1
    for i in range(L):
        for j in range(i + 1, L):
            log_pre += math.log(lam[i] - lam[j])
    W.setflags(write=False)
    return mmax, W, sign_pre, log_pre


def _gamma_ladder(nmax: int, y: np.ndarray) -> np.ndarray:
    """gaminc(n, y) for n = 1..nmax as rows, by the stable downward
    recurrence gaminc(n-1) = (gaminc(n) + y^{n-1} e^{-y})/(n-1); every
    quantity is positive."""
    out = np.empty((nmax, y.size))
    out[nmax - 1] = specfun.lower_incomplete_gamma(nmax, y)
    if nmax == 1:
        return out
    with np.errstate(divide="ignore"):
        ly = np.where(y > 0, np.log(np.where(y > 0, y, 1.0)), -np.inf)
    for n in range(nmax - 1, 0, -1):
        out[n - 1] = (out[n] + np.exp(n * ly - y)) / n
    return out


def _xi_dd_parts(spec: WishartSpec, x: np.ndarray):
    """(sign_pre, log_pre, mats): det(Xi(x)) = sign_pre e^{log_pre} det(mats),
    valid for x <= ~2 where the termwise series is short."""
    s, t, L = spec.s, spec.t, spec.L
    q = t - s
    mmax, W, sign_pre, log_pre = _dd_column_weights(spec)
    Lam = float(spec.lambdas[0])
    glad = _gamma_ladder(t + mmax + 1, x)

    mats = np.empty((x.size, s, s))
    # coefficient c_m Lam^m, rolled to avoid factorial overflow
    cl = np.empty(mmax + 1)
    cl[0] = 1.0 / math.factorial(q)
    for m in range(mmax):
        cl[m + 1] = cl[m] * Lam / ((m + 1.0) * (q + m + 1.0))
    for i in range(1, s + 1):
        n0 = t - i + 1
        block = glad[n0 - 1 : n0 + mmax]  # gaminc(n0+m) rows, m = 0..mmax
        for j in range(L):
            mats[:, i - 1, j] = np.tensordot(cl * W[j], block, axes=(0, 0))
    for j in range(L + 1, s + 1):
        for i in range(1, s + 1):
            mats[:, i - 1, j - 1] = glad[_gamma_order(spec, i, j) - 1]
    return sign_pre, log_pre, mats


@lru_cache(maxsize=128)
def _psi0_sld(spec: WishartSpec) -> SignedLogDet:
    mat = _psi_matrix(spec, np.zeros(1))[0]
    return SignedLogDet.from_matrix(mat)


def psi_entry(spec: WishartSpec, i: int, j: int, x: float) -> float:
    """Single entry of the smallest-eigenvalue matrix Psi(x).

    Noncentral columns (j <= L) are scaled Nuttall Q values; the rest are
    upper incomplete gammas.
    """
    _check_ij(spec, i, j)
    if j <= spec.L:
        p, q = _nuttall_pq(spec, i)
        a = math.sqrt(2.0 * spec.lambdas[j - 1])
        return _entry_prefactor(spec, i) * specfun.nuttall_q(p, q, a, math.sqrt(2.0 * x))
    return specfun.upper_incomplete_gamma(_gamma_order(spec, i, j), x)


def xi_entry(spec: WishartSpec, i: int, j: int, x: float) -> float:
    """Single entry of the largest-eigenvalue matrix Xi(x)."""
    _check_ij(spec, i, j)
    if j <= spec.L:
        p, q = _nuttall_pq(spec, i)
        a = math.sqrt(2.0 * spec.lambdas[j - 1])
        return _entry_prefactor(spec, i) * specfun.nuttall_dq(p, q, a, math.sqrt(2.0 * x))
    return specfun.lower_incomplete_gamma(_gamma_order(spec, i, j), x)


def _check_ij(spec, i, j):
    if not (1 <= i <= spec.s and 1 <= j <= spec.s):
        raise ValueError(f"indices must lie in 1..{spec.s}, got ({i}, {j})")


def _as_grid(x):
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    grid = np.atleast_1d(arr).ravel()
    if np.any(grid < 0):
        raise ValueError("x must be nonnegative")
    return grid, arr.shape, scalar


def _clamp_unit(v: np.ndarray) -> np.ndarray:
    v = np.where((v < 0.0) & (v > -_CLAMP_EPS), 0.0, v)
    v = np.where((v > 1.0) & (v < 1.0 + _CLAMP_EPS), 1.0, v)
    return v


def _shape_out(v, shape, scalar):
    return float(v[0]) if scalar else v.reshape(shape)


# ---------------------------------------------------------------------------
# exact CDFs
# ---------------------------------------------------------------------------

def cdf_min(spec: WishartSpec, x):
    """CDF of the smallest eigenvalue; scalar or array x."""
    grid, shape, scalar = _as_grid(x)
    psi = _psi_matrix(spec, grid)
    _warn_if_ill_conditioned(psi, "cdf_min")
    sgn, ld = _slogdet_eq(psi)
    p0 = _psi0_sld(spec)
    ratio_sign = sgn * p0.sign
    delta = ld - p0.logmag
    with np.errstate(over="ignore"):
        f = np.where(ratio_sign > 0, -np.expm1(delta), 1.0 - ratio_sign * np.exp(delta))
    return _shape_out(_clamp_unit(f), shape, scalar)


_DD_SWITCH = 2.0  # below this x the Newton-basis evaluation takes over


def cdf_max(spec: WishartSpec, x):
    """CDF of the largest eigenvalue; scalar or array x.

    Small arguments (x <= 2) go through the divided-difference form,
    which stays relatively accurate arbitrarily deep in the lower tail;
    larger arguments use the direct determinant.
    """
    grid, shape, scalar = _as_grid(x)
    p0 = _psi0_sld(spec)
    f = np.empty_like(grid)
    small = grid <= _DD_SWITCH
    if spec.L == 0:
        small = np.zeros_like(small)  # no noncentral columns: direct path exact
    if np.any(small):
        sign_pre, log_pre, mats = _xi_dd_parts(spec, grid[small])
        sgn, ld = _slogdet_eq(mats)
        with np.errstate(over="ignore"):
            f[small] = sign_pre * sgn * p0.sign * np.exp(log_pre + ld - p0.logmag)
    if np.any(~small):
        xi = _xi_matrix(spec, grid[~small])
        _warn_if_ill_conditioned(xi, "cdf_max")
        sgn, ld = _slogdet_eq(xi)
        f[~small] = sgn * p0.sign * np.exp(ld - p0.logmag)
    return _shape_out(_clamp_unit(f), shape, scalar)


def cdf_kth(spec: WishartSpec, k: int, x):
    """CDF of the k-th largest eigenvalue (k = 1 is the largest).

    Evaluates the row-subset determinant sum; k = 1 coincides with
    cdf_max and k = s agrees with cdf_min through an entirely different
    reduction, which the test suite checks.
    """
    if spec.s > MAX_S:
        raise ValueError(
            f"s = {spec.s} exceeds the supported cap {MAX_S} "
            "(combinatorial determinant sum)"
        )
    if not 1 <= k <= spec.s:
        raise ValueError(f"k must lie in 1..{spec.s}, got {k}")
    if k == 1:
        return cdf_max(spec, x)
    grid, shape, scalar = _as_grid(x)
    xi = _xi_matrix(spec, grid)
    psi = _psi_matrix(spec, grid)
    stacks = [xi[None, ...]]
    for nrows in range(1, k):
        for rows in combinations(range(spec.s), nrows):
            theta = xi.copy()
            theta[:, rows, :] = psi[:, rows, :]
            stacks.append(theta[None, ...])
    mats = np.concatenate(stacks, axis=0)
    _warn_if_ill_conditioned(mats, "cdf_kth")
    sgn, ld = _slogdet_eq(mats)
    p0 = _psi0_sld(spec)
    terms = sgn * p0.sign * np.exp(ld - p0.logmag)
    f = terms.sum(axis=0)
    return _shape_out(_clamp_unit(f), shape, scalar)


def singular_value_cdf(ch: RiceanChannel, k: int, x):
    """CDF of the k-th largest singular value of the physical channel H.

    Rides on the monotone bridge omega = eps * sqrt(phi):
    F_omega_k(x) = F_phi_k((K+1) x^2).
    """
    grid, shape, scalar = _as_grid(x)
    spec = spectrum_from_channel(ch)
    f = cdf_kth(spec, k, (ch.K + 1.0) * grid * grid)
    return float(f[0]) if scalar else np.asarray(f).reshape(shape)


# ---------------------------------------------------------------------------
# joint pdf (small-s oracle)
# ---------------------------------------------------------------------------

def joint_pdf(spec: WishartSpec, phis):
    """Joint density of the ordered eigenvalues, s <= 3 (oracle use).

    Accepts one point (length-s descending positive sequence) or a batch
    (..., s).  Internally evaluated in logs: the hypergeometric columns
    reach e^{2 sqrt(lambda phi)} scale long before the density itself
    leaves [0, 1).
    """
    if spec.s > 3:
        raise ValueError("joint_pdf is an oracle for s <= 3 only")
    phis = np.asarray(phis, dtype=float)
    scalar = phis.ndim == 1
    pts = np.atleast_2d(phis)
    if pts.shape[-1] != spec.s:
        raise ValueError(f"need {spec.s} eigenvalues per point")
    if np.any(pts <= 0) or np.any(np.diff(pts, axis=-1) >= 0):
        raise ValueError("eigenvalues must be strictly decreasing and positive")

    s, t, L = spec.s, spec.t, spec.L
    lam = np.asarray(spec.lambdas)

    # log of the Upsilon determinant, row-equilibrated
    logu = np.empty(pts.shape[:-1] + (s, s))
    for j in range(1, s + 1):
        if j <= L:
            logu[..., :, j - 1] = specfun.hyp0f1(t - s + 1, lam[j - 1] * pts, log=True)
        else:
            logu[..., :, j - 1] = (
                (s - j) * np.log(pts)
                + math.lgamma(t - s + 1)
                - math.lgamma(t - j + 1)
            )
    rowmax = logu.max(axis=-1)
    sign, ld = np.linalg.slogdet(np.exp(logu - rowmax[..., None]))
    log_udet = ld + rowmax.sum(axis=-1)

    # Vandermonde over the ordered point and the exponential weight
    diffs = pts[..., :, None] - pts[..., None, :]
    iu = np.triu_indices(s, k=1)
    log_vdm = np.log(diffs[..., iu[0], iu[1]]).sum(axis=-1)
    log_weight = ((t - s) * np.log(pts) - pts).sum(axis=-1)

    log_c1 = -_log_i0(spec)
    with np.errstate(over="ignore"):
        dens = sign * np.exp(log_c1 + log_udet + log_vdm + log_weight)
    dens = np.maximum(dens, 0.0)
    return float(dens[0]) if scalar else dens.reshape(phis.shape[:-1])


@lru_cache(maxsize=128)
def _log_i0(spec: WishartSpec) -> float:
    """log of the normalizing determinant |I(0)|.

    I(0) is Psi(0) with the per-column scale factors restored:
    (t-s)! e^{lambda} lambda^{(s-t)/2} for noncentral columns and
    (t-s)!/(t-j)! for central ones.
    """
    p0 = _psi0_sld(spec)
    if p0.sign <= 0:
        raise ArithmeticError("normalizing determinant must be positive")
    s, t, L = spec.s, spec.t, spec.L
    logscale = 0.0
    for j in range(1, s + 1):
        if j <= L:
            lam = spec.lambdas[j - 1]
            logscale += math.lgamma(t - s + 1) + lam + 0.5 * (s - t) * math.log(lam)
        else:
            logscale += math.lgamma(t - s + 1) - math.lgamma(t - j + 1)
    return p0.logmag + logscale


# ---------------------------------------------------------------------------
# first-order expansions
# ---------------------------------------------------------------------------

def asymptotic_coeffs(spec: WishartSpec, k: int) -> AsymptoticCoeffs:
    """Leading-order expansion pdf ~ a_k x^{d_k} near the origin.

    d_k = (s-k+1)(t-k+1) - 1 always; a_k comes from a closed-form
    constant times a mixed Laguerre/monomial/binomial determinant for
    k > 1, or the plain normalization constant for k = 1.
    """
    s, t, L = spec.s, spec.t, spec.L
    if not 1 <= k <= s:
        raise ValueError(f"k must lie in 1..{s}, got {k}")
    sk, tk = s - k + 1, t - k + 1
    d = sk * tk - 1
    lam = np.asarray(spec.lambdas)

    if k == 1:
        log_a = (
            math.log(s * t)
            + specfun.multivariate_gamma_norm(s, s)[1]
            - specfun.multivariate_gamma_norm(s, t + s)[1]
            - float(lam.sum())
        )
        return AsymptoticCoeffs(k=1, d=d, log_a=log_a)

    log_pref = (
        math.log(sk * tk)
        + specfun.multivariate_gamma_norm(k - 1, s)[1]
        + specfun.multivariate_gamma_norm(sk, sk)[1]
        - specfun.multivariate_gamma_norm(sk, tk + sk)[1]
    )
    # normalization constant over the noncentral spectrum
    log_c3 = -specfun.multivariate_gamma_norm(s - L, s - L)[1]
    if L:
        log_c3 += 0.5 * (2 * L - s - t) * float(np.log(lam).sum())
        diffs = lam[:, None] - lam[None, :]
        iu = np.triu_indices(L, k=1)
        log_c3 -= float(np.log(diffs[iu]).sum())
        log_lam_extra = 0.5 * (t - s) * float(np.log(lam).sum())
    else:
        log_lam_extra = 0.0

    sign_x, log_x = _slogdet_eq(_coeff_matrix(spec, k)[None, ...])
    if sign_x[0] <= 0:
        raise ArithmeticError(
            f"expansion determinant is not positive (sign {sign_x[0]:g}) "
            f"for k={k}; spectrum {spec.lambdas}"
        )
    log_a = log_pref + log_c3 + log_lam_extra + float(log_x[0])
    return AsymptoticCoeffs(k=k, d=d, log_a=log_a)


def _coeff_matrix(spec: WishartSpec, k: int) -> np.ndarray:
    """The s x s determinant entering a_k for k > 1.

    Rows above k mix Laguerre values (noncentral columns) with binomial
    coefficients; rows from k down mix decaying monomials with signed
    factorial ratios.
    """
    s, t, L = spec.s, spec.t, spec.L
    X = np.zeros((s, s))
    for i in range(1, s + 1):
        for j in range(1, s + 1):
            if i <= k - 1:
                if j <= L:
                    X[i - 1, j - 1] = specfun.laguerre(s - i, t - s, -spec.lambdas[j - 1])
                elif j >= i:
                    X[i - 1, j - 1] = math.comb(t - i, j - i)
            else:
                if j <= L:
                    lam = spec.lambdas[j - 1]
                    X[i - 1, j - 1] = lam ** (s - i) * math.exp(-lam)
                elif j <= i:
                    X[i - 1, j - 1] = (-1.0) ** (i - j) * math.factorial(s - j) / math.factorial(i - j)
    return X


def cdf_asymptotic(spec: WishartSpec, k: int, x):
    """Leading-order CDF a_k x^{d_k+1}/(d_k+1); valid for small x."""
    co = asymptotic_coeffs(spec, k)
    grid, shape, scalar = _as_grid(x)
    with np.errstate(divide="ignore"):
        v = np.exp(co.log_a - math.log(co.d + 1) + (co.d + 1) * np.log(grid))
    v = np.where(grid > 0, v, 0.0)
    return _shape_out(v, shape, scalar)


def pdf_asymptotic(spec: WishartSpec, k: int, x):
    """Leading-order pdf a_k x^{d_k}; valid for small x."""
    co = asymptotic_coeffs(spec, k)
    grid, shape, scalar = _as_grid(x)
    with np.errstate(divide="ignore"):
        v = np.exp(co.log_a + co.d * np.log(grid))
    v = np.where(grid > 0, v, np.exp(co.log_a) if co.d == 0 else 0.0)
    return _shape_out(v, shape, scalar)


def pdf_kth(spec: WishartSpec, k: int, x):
    """Density of the k-th largest eigenvalue by Richardson-extrapolated
    central differences of the exact CDF (the closed-form derivative is
    not carried here)."""
    grid, shape, scalar = _as_grid(x)
    if np.any(grid <= 0):
        raise ValueError("x must be positive")
    h = np.minimum(np.maximum(1e-6, 1e-4 * grid), 0.5 * grid)
    pts = np.concatenate([grid + h, grid - h, grid + 0.5 * h, grid - 0.5 * h])
    f = np.asarray(cdf_kth(spec, k, pts)).reshape(4, -1)
    d_h = (f[0] - f[1]) / (2.0 * h)
    d_h2 = (f[2] - f[3]) / h
    v = (4.0 * d_h2 - d_h) / 3.0
    return _shape_out(v, shape, scalar)
