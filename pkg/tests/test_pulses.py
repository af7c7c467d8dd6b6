import math

import numpy as np
import pytest

from oracles import dzt_sum
from otfs.config import make_config
from otfs.pulses import (
    Pulse, ambiguity, ambiguity_rect, parse_pulse, pulse_dzt, pulse_to_str, rect,
    sample_pulse, sampled_ambiguity,
)

T = 1 / 15e3


def test_rect_samples_are_flat():
    cfg = make_config(4, 2)
    s = sample_pulse(rect(cfg.T), cfg)
    np.testing.assert_allclose(s, np.full(4, 1 / math.sqrt(cfg.T)), rtol=1e-12)
    s2 = sample_pulse(rect(cfg.T), cfg, Q=2)
    assert s2.size == 8
    np.testing.assert_allclose(s2, s2[0], rtol=1e-12)


@pytest.mark.parametrize("spec", ["rect", "rc:0.25", "rc:0.5", "rc:1"])
@pytest.mark.parametrize("Q", [1, 2, 3])
def test_sampled_pulse_unit_energy(spec, Q):
    cfg = make_config(16, 2, oversampling=Q)
    s = sample_pulse(parse_pulse(spec, cfg.T), cfg)
    assert abs(np.sum(np.abs(s) ** 2) / (cfg.M * Q * cfg.delta_f) - 1) <= 1e-9


@pytest.mark.parametrize("beta", [0.0, 0.2, 0.5, 1.0])
def test_continuous_pulse_unit_energy(beta):
    g = Pulse("rc", T, beta) if beta else rect(T)
    assert abs(g.energy() - 1) <= 1e-9


def test_pulse_support_is_causal():
    g = rect(T)
    assert g(0.0) > 0
    assert g(T) == 0
    assert g(-1e-12) == 0


def test_pulse_strings():
    assert pulse_to_str(parse_pulse("rect", T)) == "rect"
    g = parse_pulse("rc:0.3", T)
    assert g.kind == "rc" and g.beta == 0.3
    assert pulse_to_str(g) == "rc:0.3"
    for bad in ("gauss", "rc:x", "rc:1.5"):
        with pytest.raises(ValueError):
            parse_pulse(bad, T)


@pytest.mark.parametrize("M,N", [(4, 2), (8, 4), (16, 8), (5, 3)])
def test_rect_zak_is_constant(M, N):
    cfg = make_config(M, N)
    dz = pulse_dzt(rect(cfg.T), cfg)
    assert np.max(np.abs(dz - 1 / math.sqrt(M * N))) <= 1e-12


def test_zero_pulse_zak_is_zero():
    cfg = make_config(4, 2)
    assert np.all(pulse_dzt(Pulse("rect", cfg.T, scale=0.0), cfg) == 0)


def test_general_pulse_zak_matches_composition():
    cfg = make_config(8, 4)
    g = Pulse("rc", cfg.T, 0.4)
    t = np.arange(cfg.M) * cfg.T / cfg.M
    raw = g(t)
    raw = raw / math.sqrt(np.sum(raw**2) * cfg.T / cfg.M)
    seq = np.zeros(cfg.M * cfg.N, dtype=complex)
    seq[: cfg.M] = raw * math.sqrt(cfg.T / cfg.M)
    assert np.max(np.abs(pulse_dzt(g, cfg) - dzt_sum(seq, cfg.M, cfg.N))) <= 1e-12


def test_ambiguity_origin():
    g = rect(T)
    assert abs(ambiguity(g, g, 0.0, 0.0) - 1) <= 1e-12
    assert abs(ambiguity(g, g, 0.0, 0.0, method="quad") - 1) <= 1e-12


def test_rect_ambiguity_zero_doppler_is_triangle():
    g = rect(T)
    for tau in np.linspace(-1.5 * T, 1.5 * T, 41):
        expected = max(T - abs(tau), 0) / T
        assert abs(ambiguity(g, g, tau, 0.0) - expected) <= 1e-12
        assert abs(ambiguity(g, g, tau, 0.0, method="quad") - expected) <= 1e-9


def test_rect_ambiguity_quadrature_cross_check():
    g = rect(T)
    closed = ambiguity(g, g, T / 4, 1 / (2 * T), method="closed")
    quad = ambiguity(g, g, T / 4, 1 / (2 * T), method="quad")
    assert abs(closed - quad) <= 1e-9
    # int_{T/4}^{T} exp(-j pi (t - T/4) / T) dt / T, by hand
    expected = (1 - np.exp(-0.75j * np.pi)) / (1j * np.pi)
    assert abs(closed - expected) <= 1e-12


def test_ambiguity_bounded_and_consistent_on_grid():
    g = rect(T)
    taus = np.linspace(-T, T, 17)
    nus = np.linspace(-2 / T, 2 / T, 17)
    for tau in taus:
        for nu in nus:
            closed = ambiguity(g, g, tau, nu)
            assert abs(closed) <= 1 + 1e-12
            assert abs(closed - ambiguity(g, g, tau, nu, method="quad")) <= 1e-9


def test_ambiguity_continuity():
    eps = 1e-9 * T
    for tau, nu in [(0.3 * T, 0.7 / T), (-0.6 * T, -1.2 / T)]:
        a = ambiguity_rect(T, tau, nu)
        assert abs(ambiguity_rect(T, tau + eps, nu) - a) < 1e-7
        assert abs(ambiguity_rect(T, tau, nu + 1e-3 / T) - a) < 1e-2


def test_ambiguity_zero_pulse():
    z = Pulse("rect", T, scale=0.0)
    assert ambiguity(z, rect(T), 0.1 * T, 0.0) == 0


def test_closed_form_rejects_tapered_pulse():
    with pytest.raises(ValueError):
        ambiguity(Pulse("rc", T, 0.5), rect(T), 0.0, 0.0, method="closed")


def test_sampled_ambiguity_matches_explicit_sum():
    cfg = make_config(8, 4, oversampling=2)
    g = Pulse("rc", cfg.T, 0.3)
    n = cfg.samples_per_slot
    ts = cfg.T / n
    samples = sample_pulse(g, cfg)
    for d, nu in [(0, 0.0), (3, 0.4 / cfg.T), (-5, -1.3 / cfg.T), (n - 2, 0.2 / cfg.T)]:
        tau = d * ts
        expected = 0j
        for p in range(n):
            q = p - d
            if 0 <= q < n:
                expected += samples[p] * np.conj(samples[q]) * np.exp(-2j * np.pi * nu * q * ts)
        expected *= ts
        assert abs(sampled_ambiguity(g, g, tau, nu, cfg) - expected) <= 1e-12


def test_sampled_ambiguity_origin_is_one():
    cfg = make_config(8, 4)
    for g in (rect(cfg.T), Pulse("rc", cfg.T, 0.5)):
        assert abs(sampled_ambiguity(g, g, 0.0, 0.0, cfg) - 1) <= 1e-12
