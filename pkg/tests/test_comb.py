import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from pmblockade.comb import (C_LIGHT, MoleculeSpec, comb_json, find_triplets, free_spectral_range,
                             hybridize, molecule_spectrum, ring_resonances)


def test_resonance_formula():
    (m, w), = ring_resonances(2.0, 100e-6, [7])
    assert m == 7 and w == pytest.approx(7 * 299792458.0 / (2.0 * 100e-6), rel=1e-15)
    assert free_spectral_range(2.0, 100e-6) == pytest.approx(C_LIGHT / 2e-4)
    with pytest.raises(ValueError):
        ring_resonances(2.0, 1e-4, [])


def test_small_ring_aligns_with_even_modes():
    # small ring of radius R/2 has mode k at 2k c / (n R), i.e. the even large-ring modes
    big = dict(ring_resonances(2.0, 1e-4, range(1, 11)))
    small = dict(ring_resonances(2.0, 0.5e-4, range(1, 6)))
    for k, w in small.items():
        assert w == pytest.approx(big[2 * k], rel=1e-15)


def test_doublet_splitting_is_2J():
    lo, hi = hybridize(1e15, 3e10)
    assert hi - lo == 2 * 3e10
    with pytest.raises(ValueError):
        hybridize(1.0, -1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.4, 4.0), st.floats(5e-6, 500e-6), st.floats(0, 1e11), st.integers(1, 50))
def test_triplets_equally_spaced(n_eff, R, J, m_min):
    spec = MoleculeSpec(n_eff, R, J, m_min, m_min + 12)
    trips = find_triplets(spec)
    assert trips
    for t in trips:
        assert abs(t.omega_p + t.omega_i - 2 * t.omega_s) <= 1e-9 * t.omega_s
        assert {t.p_branch, t.i_branch} == {"-", "+"}
        assert t.m_s % 2 == 1


def test_two_triplets_per_bare_mode():
    spec = MoleculeSpec(2.0, 1e-4, 2 * math.pi * 5e9, 1, 10)
    trips = find_triplets(spec)
    assert sorted({t.m_s for t in trips}) == [3, 5, 7, 9]
    assert len(trips) == 8


def test_spectrum_labels_and_doublets():
    J = 2 * math.pi * 4e9
    spec = MoleculeSpec(2.0, 1e-4, J, 1, 6)
    lines = molecule_spectrum(spec)
    by_m = {}
    for w, lab, m in lines:
        by_m.setdefault(m, {})[lab] = w
    for m, d in by_m.items():
        if m % 2 == 0:
            assert d["+"] - d["-"] == pytest.approx(2 * J, rel=1e-12)
        else:
            assert set(d) == {"0"}


def test_zero_coupling_not_isolated():
    trips = find_triplets(MoleculeSpec(2.0, 1e-4, 0.0, 1, 6))
    assert trips and not any(t.isolated for t in trips)


def test_dispersion_hook_skips_invariant():
    spec = MoleculeSpec(lambda m: 2.0 + 1e-3 * m, 1e-4, 1e9, 1, 8)
    trips = find_triplets(spec)
    assert any(abs(t.mismatch) > 1e-9 * t.omega_s for t in trips)


def test_validation_and_ratio():
    with pytest.raises(ValueError):
        MoleculeSpec(0.9, 1e-4, 1e9)
    with pytest.raises(ValueError):
        MoleculeSpec(2.0, -1e-4, 1e9)
    with pytest.raises(ValueError):
        MoleculeSpec(2.0, 1e-4, 1e9, 5, 2)
    with pytest.raises(NotImplementedError):
        find_triplets(MoleculeSpec(2.0, 1e-4, 1e9, radius_ratio=0.3))


def test_json_export():
    doc = json.loads(comb_json(MoleculeSpec(2.0, 1e-4, 1e9, 1, 6)))
    assert len(doc["resonances"]) == 9
    t = doc["triplets"][0]
    assert t["f_s_hz"] == pytest.approx(t["omega_s_rad_s"] / (2 * math.pi))
