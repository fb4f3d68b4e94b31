import numpy as np
import pytest

from chiralcl.fdtd import (
    DipoleSource,
    FrequencyMonitor,
    PlacementError,
    Simulation,
    TimeProbe,
    circular_pair,
    drude_equivalent,
)
from chiralcl.materials import (
    eval_permittivity,
    gold,
    make_synthetic_metal,
)

C0 = 299792458.0


def test_waveform_windowed_and_band_limited():
    src = DipoleSource(position_nm=(0, 0, 0), wavelength_nm=600.0,
                       envelope="gaussian", duration_fs=4.0)
    assert src.waveform(-1e-15) == 0.0
    assert src.waveform(src.end_time_s + 1e-15) == 0.0
    # the carrier is present: peak close to the envelope amplitude
    ts = np.linspace(0, src.end_time_s, 4001)
    peak = max(abs(src.waveform(t)) for t in ts)
    assert 0.9 < peak <= 1.0
    # spectrum peaks on the carrier and decays off-band
    assert src.spectral_amplitude(600.0) == pytest.approx(1.0)
    assert src.spectral_amplitude(640.0) < src.spectral_amplitude(610.0)
    with pytest.raises(ValueError, match="below"):
        src.check_band([300.0])


def test_circular_pair_phase_quadrature():
    a, b = circular_pair((0, 0, 0), 600.0, handedness="left")
    assert abs((a.phase_deg - b.phase_deg) % 180) == 90
    for s in (a, b):
        assert s.orientation[1] == 0.0      # both lie in the x-z plane
    assert np.dot(a.orientation, b.orientation) == pytest.approx(0.0)


def test_source_in_absorber_rejected():
    sim = Simulation(((-200, 200),) * 3, 10.0)
    with pytest.raises(PlacementError, match="absorbing"):
        sim.run([DipoleSource(position_nm=(0, 0, -185))])


def test_grid_node_round_trip():
    sim = Simulation(((-200, 200),) * 3, 10.0)
    # Ez nodes sit half a cell up in z: -15 nm is on-node
    idx = sim.grid.e_node_index(2, (0.0, 0.0, -15.0))
    back = sim.grid.e_node_position_nm(2, idx)
    assert back == (0.0, 0.0, -15.0)


def test_vacuum_pulse_is_absorbed():
    sim = Simulation(((-200, 200),) * 3, 10.0)
    src = DipoleSource(position_nm=(0, 0, -15), wavelength_nm=600.0,
                       duration_fs=2.0)
    result = sim.run([src], settle_fs=8.0)
    assert result.peak_energy > 0
    assert result.final_energy < 1e-6 * result.peak_energy


def test_frequency_monitor_matches_direct_dft():
    """The monitor's running DFT equals a post-hoc DFT of a probe trace."""
    sim = Simulation(((-200, 200),) * 3, 10.0)
    src = DipoleSource(position_nm=(0, 0, -15), wavelength_nm=600.0,
                       duration_fs=2.0)
    mon = FrequencyMonitor("m", ((-5, 5), (-5, 5), (-20, -10)), (600.0,))
    probe = TimeProbe(position_nm=(0.0, 0.0, -15.0), component=2)
    result = sim.run([src], monitors=[mon, probe], settle_fs=6.0)
    e_raw, _ = mon.raw(600.0)
    local = tuple(g - r[0] for g, r in
                  zip(probe.index, mon.ranges))
    ez_mon = e_raw[2][local]
    t_fs, ez = probe.series()
    w = 2 * np.pi * C0 / 600e-9
    ez_dft = 2.0 / len(ez) * np.sum(ez * np.exp(1j * w * t_fs * 1e-15))
    assert ez_mon == pytest.approx(ez_dft, rel=1e-9)
    assert abs(ez_mon) > 0


def test_drude_equivalent_reproduces_target_permittivity():
    m = make_synthetic_metal(0.16, 2.9096, name="syn")
    fit = drude_equivalent(m, 600.0)
    want = eval_permittivity(m, 600.0)
    got = eval_permittivity(fit, 600.0)
    assert got == pytest.approx(want, rel=1e-9)


def test_drude_equivalent_allows_lossless_metal():
    # n = 0 gives a purely real negative permittivity; the stand-in
    # degenerates to an undamped plasma pole rather than failing
    m = make_synthetic_metal(1e-12, 2.9096, name="lossless")
    fit = drude_equivalent(m, 600.0)
    got = eval_permittivity(fit, 600.0)
    assert got.real == pytest.approx(-2.9096 ** 2, rel=1e-6)
    assert abs(got.imag) < 1e-9


def test_gold_is_a_lossy_metal_at_600nm():
    eps = eval_permittivity(gold(), 600.0)
    assert eps.real < -5 and eps.imag > 0
