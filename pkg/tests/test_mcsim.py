import numpy as np
import pytest
from scipy import stats

from ncwishart._accel import eig_descending, jacobi_eigvals_numpy, active_backend
from ncwishart.mcsim import (
    BLOCK_SIZE,
    EmpiricalCdf,
    McRun,
    eig_samples,
    empirical_eig_cdfs,
    empirical_outage,
    empirical_ser,
    sample_channel,
)
from ncwishart.model import RiceanChannel, spectrum_from_channel
from ncwishart.perf import MBConfig, bpsk, ser_subchannel, outage

from conftest import make_channel


# ---------------------------------------------------------------------------
# eigensolver backends
# ---------------------------------------------------------------------------

def _random_hermitian(rng, nb, s):
    g = rng.standard_normal((nb, s, s)) + 1j * rng.standard_normal((nb, s, s))
    return g + g.conj().transpose(0, 2, 1)


@pytest.mark.parametrize("s", [1, 2, 3, 5])
def test_jacobi_matches_lapack(s):
    rng = np.random.default_rng(5)
    mats = _random_hermitian(rng, 300, s)
    ref = np.sort(np.linalg.eigvalsh(mats), axis=1)[:, ::-1]
    got = eig_descending(mats)
    scale = np.abs(ref).max()
    assert np.max(np.abs(got - ref)) < 1e-12 * scale


def test_backends_agree():
    rng = np.random.default_rng(6)
    mats = _random_hermitian(rng, 200, 4)
    a = jacobi_eigvals_numpy(mats.copy())
    b = eig_descending(mats, backend="numpy")
    assert np.array_equal(a, b)
    if active_backend() == "numba":
        c = eig_descending(mats, backend="numba")
        scale = np.abs(a).max()
        assert np.max(np.abs(c - a)) < 1e-12 * scale


def test_eig_descending_shape_errors():
    with pytest.raises(ValueError):
        eig_descending(np.zeros((4, 2, 3)))


# ---------------------------------------------------------------------------
# sampling reproducibility
# ---------------------------------------------------------------------------

def test_worker_count_never_changes_samples(ch_3x5_k10):
    n = BLOCK_SIZE + 4321  # straddle a block boundary
    base = eig_samples(McRun(ch_3x5_k10, seed=11, n_samples=n, workers=1))
    multi = eig_samples(McRun(ch_3x5_k10, seed=11, n_samples=n, workers=4))
    assert base.shape == (n, 3)
    assert np.array_equal(base, multi)


def test_blocks_are_stable_prefixes(ch_3x5_k10):
    short = eig_samples(McRun(ch_3x5_k10, seed=11, n_samples=BLOCK_SIZE, workers=1))
    longer = eig_samples(McRun(ch_3x5_k10, seed=11, n_samples=2 * BLOCK_SIZE, workers=2))
    assert np.array_equal(longer[:BLOCK_SIZE], short)


def test_different_seeds_differ(ch_3x5_k10):
    a = eig_samples(McRun(ch_3x5_k10, seed=1, n_samples=1000, workers=1))
    b = eig_samples(McRun(ch_3x5_k10, seed=2, n_samples=1000, workers=1))
    assert not np.allclose(a, b)


def test_samples_are_readonly(ch_3x5_k10):
    phi = eig_samples(McRun(ch_3x5_k10, seed=3, n_samples=256, workers=1))
    with pytest.raises(ValueError):
        phi[0, 0] = 0.0


def test_sample_channel_moments():
    ch = make_channel(K=4.0)
    rng = np.random.default_rng(0)
    acc = 0.0
    n = 4000
    for _ in range(n):
        H = sample_channel(ch, rng)
        acc += float(np.sum(np.abs(H) ** 2))
    # E||H||^2 = eps^2 (K nm + nm) = nm
    assert acc / n == pytest.approx(ch.n * ch.m, rel=0.05)


def test_eigenvalue_mean_matches_trace_identity(ch_3x5_k10):
    # E[sum phi] = s*t + sum lambda for the scaled Gram matrix
    spec = spectrum_from_channel(ch_3x5_k10)
    phi = eig_samples(McRun(ch_3x5_k10, seed=17, n_samples=200_000, workers=2))
    tr = phi.sum(axis=1)
    expected = spec.s * spec.t + sum(spec.lambdas)
    se = tr.std(ddof=1) / np.sqrt(tr.size)
    assert abs(tr.mean() - expected) < 4.0 * se


# ---------------------------------------------------------------------------
# empirical statistics
# ---------------------------------------------------------------------------

def test_empirical_cdf_step_function():
    cdf = EmpiricalCdf(np.array([1.0, 2.0, 3.0]))
    assert cdf(0.5) == 0.0
    assert cdf(1.0) == pytest.approx(1.0 / 3.0)
    assert cdf(2.5) == pytest.approx(2.0 / 3.0)
    assert cdf(3.0) == 1.0
    assert cdf.n == 3


def test_ks_statistic_definition():
    vals = np.sort(np.random.default_rng(1).uniform(size=2000))
    cdf = EmpiricalCdf(vals)
    ks = cdf.ks_statistic(lambda v: v)  # true CDF of U(0,1)
    ref = stats.kstest(vals, "uniform").statistic
    assert ks == pytest.approx(ref, abs=1e-12)


def test_empirical_cdfs_are_ordered(ch_3x5_k10):
    run = McRun(ch_3x5_k10, seed=5, n_samples=20_000, workers=2)
    cdfs = empirical_eig_cdfs(run)
    x = 60.0
    # k = 1 is the largest eigenvalue: smallest CDF at fixed x
    assert cdfs[0](x) <= cdfs[1](x) <= cdfs[2](x)


def test_semianalytic_ser_matches_exact_siso():
    ch = RiceanChannel(1, 1, 0.0, np.ones((1, 1), dtype=complex))
    spec = spectrum_from_channel(ch)
    cfg = MBConfig.uniform(1, 5.0, bpsk())
    run = McRun(ch, seed=29, n_samples=400_000, workers=2)
    mc = empirical_ser(run, cfg)
    exact = ser_subchannel(spec, ch, cfg, 1)
    assert abs(mc.combined - exact) < 4.0 * mc.combined_se
    assert mc.per_k.shape == (1,)


def test_outage_wilson_interval(ch_3x5_k10):
    spec = spectrum_from_channel(ch_3x5_k10)
    run = McRun(ch_3x5_k10, seed=31, n_samples=100_000, workers=2)
    gammas = np.array([0.05, 0.1, 0.3])
    mc = empirical_outage(run, 1, 1.0, gammas)
    exact = outage(spec, ch_3x5_k10, 1, 1.0, gammas)
    assert np.all(mc.lo <= exact) and np.all(exact <= mc.hi)
    assert np.all(mc.lo <= mc.freq) and np.all(mc.freq <= mc.hi)


def test_outage_r_validation(ch_3x5_k10):
    run = McRun(ch_3x5_k10, seed=1, n_samples=100, workers=1)
    with pytest.raises(ValueError):
        empirical_outage(run, 5, 1.0, 0.1)


def test_run_validation(ch_3x5_k10):
    with pytest.raises(ValueError):
        McRun(ch_3x5_k10, seed=1, n_samples=0)
    with pytest.raises(ValueError):
        McRun(ch_3x5_k10, seed=1, n_samples=10, workers=0)
