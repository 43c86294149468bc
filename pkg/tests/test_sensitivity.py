import math

import numpy as np
import pytest

from stringsens import (
    ClosedLoopPoleError,
    ConditioningError,
    DomainError,
    FrequencyGrid,
    RationalTF,
    StringLaplacian,
    eig_dirichlet,
    eig_pinned,
    log_abs_sensitivity,
    mobius_root,
    sensitivity_auto,
    sensitivity_eigenproduct,
    sensitivity_linsolve,
    sensitivity_mobius,
    sweep,
)

from oracles import dense_dirichlet_eigenvalues, dense_pinned_eigenvalues, inverse_3x3_entry11


# ---------------------------------------------------------------------------
# Coupling spectra
# ---------------------------------------------------------------------------

def test_eig_pinned_single_agent():
    assert np.allclose(eig_pinned(1), [1.0])


def test_eig_pinned_two_agents_matches_dense():
    dense = np.sort(np.linalg.eigvalsh(np.array([[1.0, -1.0], [-1.0, 2.0]])))
    assert np.allclose(eig_pinned(2), dense, atol=1e-12)
    expected = [2 * (1 - math.cos(math.pi / 5)), 2 * (1 - math.cos(3 * math.pi / 5))]
    assert np.allclose(eig_pinned(2), expected, atol=1e-12)


def test_eig_dirichlet_small():
    assert eig_dirichlet(0).size == 0
    assert np.allclose(eig_dirichlet(1), [2.0])


def test_spectra_match_dense_eigensolver_up_to_16():
    for n in range(1, 17):
        assert np.max(np.abs(eig_pinned(n) - dense_pinned_eigenvalues(n))) < 1e-10
        if n >= 1:
            assert np.max(np.abs(eig_dirichlet(n) - dense_dirichlet_eigenvalues(n))) < 1e-10


def test_spectra_strictly_inside_zero_four():
    for n in (1, 2, 5, 12, 50, 400):
        lam = eig_pinned(n)
        mu = eig_dirichlet(n)
        assert np.all(lam > 0) and np.all(lam < 4)
        assert np.all(mu > 0) and np.all(mu < 4)


def test_laplacian_banded_matches_dense():
    lap = StringLaplacian.pinned(5)
    assert lap.diag[0] == 1.0 and np.all(lap.diag[1:] == 2.0)
    assert np.all(lap.offdiag == -1.0)
    want = lap.to_dense()
    assert np.allclose(np.sort(np.linalg.eigvalsh(want)), lap.eigenvalues(), atol=1e-12)
    bar = StringLaplacian.dirichlet(4)
    assert np.all(bar.diag == 2.0)


# ---------------------------------------------------------------------------
# Mobius root
# ---------------------------------------------------------------------------

def test_mobius_root_large_loop_value_tends_to_one():
    z = mobius_root(1e12)
    assert abs(z - 1.0) < 1e-5


def test_mobius_root_boundary_double_root():
    assert mobius_root(-0.25) == -1.0


def test_mobius_root_rejects_zero():
    with pytest.raises(DomainError):
        mobius_root(0.0)


def test_mobius_root_vieta_and_modulus():
    rng = np.random.default_rng(13)
    for _ in range(200):
        v = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        if v == 0:
            continue
        z = mobius_root(v)
        b = 1.0 / v + 2.0
        other = b - z
        assert abs(z * other - 1.0) <= 1e-12 * max(1.0, abs(b))
        assert abs(z + other - b) <= 1e-12 * max(1.0, abs(b))
        assert abs(z) <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# Sensitivity evaluation routes
# ---------------------------------------------------------------------------

def test_mobius_unit_sensitivity_when_loop_rolls_off(platoon):
    # relative degree 3: loop value is ~1e-18 at omega = 1e6
    val = sensitivity_mobius(platoon, 7, 1j * 1e6)
    assert abs(val - 1.0) < 1e-9


def test_zero_loop_gives_unit_sensitivity():
    zero_loop = RationalTF([0], [1])
    assert sensitivity_mobius(zero_loop, 5, 1j * 2.0) == 1.0
    assert sensitivity_linsolve(zero_loop, 5, 1j * 2.0) == 1.0


def test_single_agent_reduces_to_scalar_sensitivity(platoon, oscillator):
    rng = np.random.default_rng(14)
    for loop in (platoon, oscillator):
        for _ in range(20):
            s = complex(rng.uniform(0.1, 3), rng.uniform(0.05, 3))
            direct = 1.0 / (1.0 + loop.eval(s))
            assert abs(sensitivity_mobius(loop, 1, s) - direct) < 1e-10 * abs(direct)
            assert abs(sensitivity_eigenproduct(loop, 1, s) - direct) < 1e-10 * abs(direct)
            assert abs(sensitivity_linsolve(loop, 1, s) - direct) < 1e-10 * abs(direct)


def test_linsolve_identity_when_loop_vanishes(platoon):
    # at a zero of the loop the matrix is the identity
    val = sensitivity_linsolve(platoon, 4, -0.5)
    assert abs(val - 1.0) < 1e-12


def test_linsolve_matches_cofactor_inverse(platoon):
    rng = np.random.default_rng(15)
    lap = StringLaplacian.pinned(3).to_dense()
    for _ in range(10):
        s = complex(rng.uniform(0.1, 2), rng.uniform(0.1, 2))
        v = platoon.eval(s)
        m = np.eye(3, dtype=complex) + v * lap
        want = inverse_3x3_entry11(m)
        got = sensitivity_linsolve(platoon, 3, s)
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_linsolve_cap():
    with pytest.raises(DomainError):
        sensitivity_linsolve(RationalTF([1], [1, 1]), 3, 1j, cap=2)


def test_three_method_agreement(platoon, oscillator):
    rng = np.random.default_rng(16)
    worst = 0.0
    for loop in (platoon, oscillator):
        for n in (1, 2, 3, 5, 10, 20, 50):
            for w in 10.0 ** rng.uniform(-2, 2, 20):
                s = 1j * w
                ref = sensitivity_linsolve(loop, n, s)
                eig = sensitivity_eigenproduct(loop, n, s)
                worst = max(worst, abs(eig - ref) / abs(ref))
                try:
                    mob = sensitivity_mobius(loop, n, s)
                except ConditioningError:
                    mob = None  # guard band next to a pole: fallback territory
                if mob is not None:
                    worst = max(worst, abs(mob - ref) / abs(ref))
    assert worst <= 1e-7


def test_eigenproduct_matches_linsolve_near_pole(oscillator):
    s = 1j * 1.05
    ref = sensitivity_linsolve(oscillator, 40, s)
    got = sensitivity_eigenproduct(oscillator, 40, s)
    assert abs(got - ref) <= 1e-9 * abs(ref)


def test_conjugate_symmetry(platoon, oscillator):
    for loop in (platoon, oscillator):
        for w in (0.03, 0.4, 2.2, 17.0):
            plus = sensitivity_eigenproduct(loop, 8, 1j * w)
            minus = sensitivity_eigenproduct(loop, 8, -1j * w)
            assert abs(minus - plus.conjugate()) < 1e-12 * max(1.0, abs(plus))


def test_log_abs_matches_direct_value(platoon):
    for w in (0.05, 0.3, 1.7, 40.0):
        direct = math.log(abs(sensitivity_eigenproduct(platoon, 6, 1j * w)))
        assert abs(log_abs_sensitivity(platoon, 6, w) - direct) < 1e-10


def test_auto_falls_back_inside_guard_band(oscillator):
    # just above the open-loop pole the Mobius root sits against |z| = 1
    s = 1j * (1.0 + 1e-9)
    with pytest.raises(ConditioningError):
        sensitivity_mobius(oscillator, 10, s)
    val = sensitivity_auto(oscillator, 10, s)
    ref = sensitivity_linsolve(oscillator, 10, s)
    assert abs(val - ref) <= 1e-8 * abs(ref)


# ---------------------------------------------------------------------------
# Frequency grids and sweeps
# ---------------------------------------------------------------------------

def test_grid_validation():
    with pytest.raises(DomainError):
        FrequencyGrid(1.0, 0.5)
    with pytest.raises(DomainError):
        FrequencyGrid(0.0, 1.0, scale="log")
    with pytest.raises(DomainError):
        FrequencyGrid(0.1, 1.0, scale="banana")
    lin = FrequencyGrid(0.0, 1.0, 11, scale="linear")
    assert len(lin.omegas()) == 11
    assert lin.omegas()[0] == 0.0


def test_sweep_single_agent_has_no_low_frequency_peak(platoon):
    sw = sweep(platoon, 1, FrequencyGrid(1e-2, 1e2, 400))
    low = sw.log_mags[sw.omegas < 0.1]
    assert np.all(np.diff(low) > 0)  # monotone rise, no bump
    assert sw.gap_count == 0


def test_sweep_ten_agents_grows_a_low_frequency_peak(platoon):
    sw = sweep(platoon, 10, FrequencyGrid(1e-2, 1e2, 600))
    low_mask = sw.omegas < 0.5
    i = int(np.argmax(np.where(low_mask, sw.log_mags, -np.inf)))
    assert 0 < i < len(sw.omegas) - 1
    assert sw.log_mags[i] > sw.log_mags[i - 1] and sw.log_mags[i] > sw.log_mags[i + 1]
    # peak height: ln of roughly 4/(pi * 1.85), read against the plateau
    assert -0.45 < sw.log_mags[i] < -0.25


def test_sweep_oscillator_peak_emerges_with_size(oscillator):
    from stringsens import probe_peak
    found = {n: probe_peak(oscillator, 1j, n) for n in (2, 10, 40)}
    freqs = {n: w for n, (w, _) in found.items()}
    peaks = {n: m for n, (_, m) in found.items()}
    bound = 4.0 / (math.pi * math.sqrt(5.0))
    assert peaks[10] > peaks[2] * 0.999
    for n in (2, 10, 40):
        assert peaks[n] >= 0.9 * bound
    # the peak concentrates at the pole frequency as the string grows
    assert freqs[2] > freqs[10] > freqs[40] > 1.0


def test_sweep_gap_markers_for_mobius_only(oscillator):
    grid = FrequencyGrid(0.999, 1.001, 50, scale="linear")
    strict = sweep(oscillator, 10, grid, method="mobius")
    assert strict.gap_count > 0
    assert np.isnan(strict.values[np.argmax(np.isnan(strict.values.real))])
    relaxed = sweep(oscillator, 10, grid, method="auto")
    assert relaxed.gap_count == 0
    assert relaxed.fallback_count > 0


def test_sweep_perturbs_exact_pole_hits(oscillator):
    grid = FrequencyGrid(0.5, 1.0, 6, scale="linear")  # last point is the pole
    sw = sweep(oscillator, 3, grid)
    assert sw.gap_count == 0
    assert sw.omegas[-1] != 1.0
    assert abs(sw.omegas[-1] - 1.0) < 1e-8


def test_sweep_rejects_unknown_method(platoon):
    with pytest.raises(DomainError):
        sweep(platoon, 2, FrequencyGrid(0.1, 1.0, 10), method="simpson")


def test_sweep_log_mag_consistency(platoon):
    sw = sweep(platoon, 4, FrequencyGrid(1e-1, 1e1, 50))
    finite = np.isfinite(sw.log_mags)
    assert np.allclose(sw.log_mags[finite], np.log(np.abs(sw.values[finite])))


def test_eigenproduct_detects_closed_loop_pole():
    # 1/(1 + k/s^2) has poles at +/- j sqrt(k): drive evaluation onto one
    g = RationalTF([1], [0, 0, 1])
    with pytest.raises(ClosedLoopPoleError):
        sensitivity_linsolve(g, 1, 1j)
