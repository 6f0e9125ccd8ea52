import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pvspdc.modes import ModeKind, gaussian, pv_approx
from pvspdc.spdc import (
    OPTIMAL_PUMP_WIDTH,
    PumpFamily,
    PumpSpec,
    SignalGeometry,
    amplitude_limited,
    joint_spectrum,
    overlap_amplitude,
    peak_pump_width,
    scan_pump_width,
)

from conftest import RR, oracle_norm, scipy_pv, trapezoid_oracle


@pytest.fixture(scope="module")
def spec_l0():
    return joint_spectrum(PumpSpec.pv(0), (-40, 40))


# -- overlap_amplitude -------------------------------------------------------

@pytest.mark.parametrize("l1,l2,ell", [(2, 1, 0), (0, 0, 1), (6, 6, 11), (-3, 3, 1)])
def test_selection_rule_is_exact_zero(l1, l2, ell):
    pump = PumpSpec.pv(ell).mode(ell)
    assert overlap_amplitude(l1, l2, (ell, pump)) == 0.0


def test_gaussian_pump_against_trapezoid():
    g = gaussian(5.0)
    got = overlap_amplitude(3, -3, (0, g))
    r_max = RR + 12 * 5.0
    n3 = oracle_norm(lambda r: scipy_pv(3, r), r_max)
    ng = math.sqrt(2 / (math.pi * 25.0))
    ref = 2 * math.pi * trapezoid_oracle(
        lambda r: r * (n3 * scipy_pv(3, r)) ** 2 * ng * np.exp(-r * r / 25.0), r_max)
    assert got == pytest.approx(ref, rel=1e-8)


def test_amplitude_non_negative(spec_l0):
    assert all(a >= 0 for a in spec_l0.entries.values())


def test_unnormalised_pump_rejected():
    from pvspdc.modes import RadialMode
    with pytest.raises(ValueError):
        overlap_amplitude(0, 0, (0, RadialMode(ModeKind.PV_APPROX, 0, RR, 0.7)))


# -- amplitude_limited -------------------------------------------------------

def _limited(w, ring=RR):
    return amplitude_limited(pv_approx(0, ring, w))


def test_limited_maximal_at_optimal_width():
    best = _limited(OPTIMAL_PUMP_WIDTH)
    for w in (0.5, 0.6, 0.68, 0.74, 0.8, 1.0, 1.5):
        assert _limited(w) < best


def test_limited_vanishes_for_broad_pump():
    vals = [_limited(w) for w in (10.0, 100.0, 1000.0)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-2 * _limited(OPTIMAL_PUMP_WIDTH)


def test_limited_small_ring_peak_lower():
    widths = np.linspace(0.2, 4.0, 77)
    small = max(_limited(w, ring=2.0) for w in widths)
    assert small < _limited(OPTIMAL_PUMP_WIDTH)


@pytest.mark.parametrize("l1", range(-6, 7))
def test_limited_consistent_with_exact(l1):
    pump = PumpSpec.pv(0, kind=ModeKind.PV_APPROX).mode(0)
    exact = overlap_amplitude(l1, -l1, (0, pump))
    assert amplitude_limited(pump) == pytest.approx(exact, rel=0.05)


# -- scan --------------------------------------------------------------------

def test_scan_argmax_at_optimal_width():
    grid = np.round(np.arange(0.1, 4.0 + 1e-9, 0.02), 10)
    scan = scan_pump_width(PumpFamily.PV_OPT, grid)
    w = scan[int(np.argmax([a for _, a in scan]))][0]
    assert abs(w - 1 / math.sqrt(2)) <= 0.02


def test_peak_ratio():
    _, a_opt = peak_pump_width(PumpFamily.PV_OPT)
    _, a_g = peak_pump_width(PumpFamily.GAUSSIAN)
    assert 2.5 <= a_opt / a_g <= 3.1


def test_small_ring_family_peaks_lower():
    _, a_opt = peak_pump_width(PumpFamily.PV_OPT)
    _, a_57 = peak_pump_width(PumpFamily.PV_057)
    assert a_57 < a_opt


@pytest.mark.parametrize("family", list(PumpFamily))
def test_single_point_scan(family):
    out = scan_pump_width(family, [1.3])
    assert len(out) == 1 and out[0][0] == 1.3 and out[0][1] > 0


def test_scan_rejects_bad_grid():
    with pytest.raises(ValueError):
        scan_pump_width(PumpFamily.PV_OPT, [])
    with pytest.raises(ValueError):
        scan_pump_width(PumpFamily.PV_OPT, [1.0, -0.5])


# -- joint spectrum ----------------------------------------------------------

def test_entries_obey_selection_rule():
    js = joint_spectrum(PumpSpec.superposition({3: 1, -5: 1j}), (-10, 10))
    assert all(l1 + l2 in (3, -5) for l1, l2 in js.entries)
    assert len(js.entries) == 42


@pytest.mark.parametrize("ell", [0, 3, -7, 12])
def test_exchange_symmetry(ell):
    js = joint_spectrum(PumpSpec.pv(ell), (-30, 30))
    for (l1, l2), a in js.entries.items():
        if (l2, l1) in js.entries:
            assert a == pytest.approx(js.entries[(l2, l1)], rel=1e-9, abs=1e-300)


@settings(max_examples=10, deadline=None)
@given(ell=st.integers(-20, 20), l1=st.integers(-25, 25))
def test_exchange_symmetry_direct(ell, l1):
    pump = PumpSpec.pv(ell).mode(ell)
    a = overlap_amplitude(l1, ell - l1, (ell, pump))
    b = overlap_amplitude(ell - l1, l1, (ell, pump))
    assert a == pytest.approx(b, rel=1e-9, abs=1e-300)


def test_reference_is_ell_zero_amplitude(spec_l0):
    assert spec_l0.ref_amp_sq == pytest.approx(spec_l0.amplitude(0, 0) ** 2, rel=1e-14)
    js = joint_spectrum(PumpSpec.pv(5), (0, 5))
    assert js.ref_amp_sq == pytest.approx(spec_l0.ref_amp_sq, rel=1e-14)


def test_flat_for_low_orders(spec_l0):
    p = [spec_l0.amplitude(l, -l) ** 2 for l in range(-6, 7)]
    assert max(p) / min(p) <= 1.2


def test_vanishes_by_thirty(spec_l0):
    rel = spec_l0.normalized(0)
    assert all(rel[l] < 0.01 for l in rel if abs(l) >= 30)


def test_gaussian_pump_still_populated_at_fifty():
    js = joint_spectrum(PumpSpec.gaussian(5.0), [-50, 50])
    rel = js.normalized(0)
    assert rel[50] > 0.01 and rel[-50] > 0.01


def test_spectrum_symmetric_about_half_ell():
    js = joint_spectrum(PumpSpec.pv(7), (-30, 37))
    p = js.slice_probs(7)
    for l1 in range(-30, 38):
        assert p[l1] == pytest.approx(p[7 - l1], rel=1e-9)


def _shift_gap(ell, spec_l0, span=30):
    js = joint_spectrum(PumpSpec.pv(ell), (-60, 60))
    rel = js.normalized(ell)
    base = spec_l0.normalized(0)
    peak = max(base.values())
    c = ell / 2
    gaps = []
    for k in range(-span, span + 1):
        l1 = c + k
        if l1 == int(l1):
            gaps.append(abs(rel[int(l1)] - base[k]))
        else:
            lo, hi = int(math.floor(l1)), int(math.ceil(l1))
            mid = 0.5 * (rel[lo] + rel[hi])
            gaps.append(abs(mid - base[k]))
    return max(gaps) / peak


@pytest.mark.parametrize("ell", [3, -3])
def test_shift_similarity_small_pump_oam(ell, spec_l0):
    assert _shift_gap(ell, spec_l0) <= 0.10


@pytest.mark.parametrize("ell", [12, -12])
def test_shift_similarity_large_pump_oam(ell, spec_l0):
    assert _shift_gap(ell, spec_l0) <= 0.10


def test_range_forms():
    a = joint_spectrum(PumpSpec.pv(0), (-3, 3))
    b = joint_spectrum(PumpSpec.pv(0), [3, -3, 0, 1, 2, -1, -2])
    assert a.entries == b.entries
    with pytest.raises(ValueError):
        joint_spectrum(PumpSpec.pv(0), (3, -3))


# -- PumpSpec ----------------------------------------------------------------

def test_pump_validation():
    with pytest.raises(ValueError):
        PumpSpec(())
    with pytest.raises(ValueError):
        PumpSpec(((0, 1.0), (0, 0.0)))
    with pytest.raises(ValueError):
        PumpSpec(((0, 0.9),))
    with pytest.raises(ValueError):
        PumpSpec(((1, 1.0),), 0.0, 5.0, ModeKind.GAUSSIAN)
    with pytest.raises(ValueError):
        PumpSpec.pv(0, width=0.0)
    with pytest.raises(ValueError):
        PumpSpec.superposition({1: 0, 2: 0})
    with pytest.raises(ValueError):
        SignalGeometry(kind=ModeKind.GAUSSIAN)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(-20, 20),
                       st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                          allow_infinity=False),
                       min_size=1, max_size=5))
def test_superposition_normalised(coeffs):
    if all(abs(c) < 1e-100 for c in coeffs.values()):
        return
    p = PumpSpec.superposition(coeffs)
    assert sum(abs(c) ** 2 for _, c in p.components) == pytest.approx(1.0, abs=1e-12)
