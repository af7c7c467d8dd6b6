import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otfs.detection import (
    SingularChannelError, SymbolMap, ber_count, demap_symbols, map_bits, mmse_equalize,
    noise_variance_for_ebn0, qfunc,
)
from otfs.effective import EffectiveChannel

from conftest import crandn

NAMES = ["bpsk", "qpsk", "16qam"]


@pytest.mark.parametrize("name", NAMES)
def test_unit_average_energy(name):
    assert np.mean(np.abs(SymbolMap(name).points) ** 2) == pytest.approx(1.0)


@pytest.mark.parametrize("name", NAMES)
def test_gray_neighbours_differ_in_one_bit(name):
    pts = SymbolMap(name).points
    d = np.abs(pts[:, None] - pts[None, :])
    dmin = np.min(d[d > 1e-12])
    for a in range(len(pts)):
        for b in range(len(pts)):
            if abs(d[a, b] - dmin) < 1e-9:
                assert bin(a ^ b).count("1") == 1


def test_16qam_points_by_hand():
    pts = SymbolMap("16qam").points * np.sqrt(10)
    assert pts[0b0000] == -3 - 3j
    assert pts[0b1010] == 3 + 3j
    assert pts[0b0111] == -1 + 1j
    assert SymbolMap("QPSK").points[0] == pytest.approx((1 + 1j) / np.sqrt(2))


@settings(max_examples=30, deadline=None)
@given(name=st.sampled_from(NAMES), seed=st.integers(0, 2**32 - 1))
def test_map_demap_round_trip(name, seed):
    smap = SymbolMap(name)
    bits = np.random.default_rng(seed).integers(0, 2, size=4 * 3 * smap.bits_per_symbol)
    grid = map_bits(bits, smap, (4, 3))
    assert grid.shape == (4, 3)
    np.testing.assert_array_equal(demap_symbols(grid, smap), bits)


def test_map_bits_validation():
    with pytest.raises(ValueError, match="need 8 bits"):
        map_bits(np.zeros(7), SymbolMap("qpsk"), (2, 2))
    with pytest.raises(ValueError):
        map_bits(np.full(8, 2), SymbolMap("qpsk"), (2, 2))
    with pytest.raises(ValueError):
        SymbolMap("8psk")


def test_mmse_identity_without_noise(rng):
    y = crandn(rng, 4, 3)
    np.testing.assert_allclose(mmse_equalize(y, np.eye(12), 0.0), y, atol=1e-14)


def test_mmse_large_noise_tends_to_matched_filter(rng):
    H = crandn(rng, 12, 12)
    y = crandn(rng, 4, 3)
    s2 = 1e9
    x = mmse_equalize(y, EffectiveChannel.from_matrix(H, 4, 3), s2)
    np.testing.assert_allclose(x.reshape(-1) * s2, H.conj().T @ y.reshape(-1), rtol=1e-6)


def test_mmse_inverts_a_random_channel(rng):
    H = crandn(rng, 12, 12)
    x = crandn(rng, 4, 3)
    y = (H @ x.reshape(-1)).reshape(4, 3)
    np.testing.assert_allclose(mmse_equalize(y, H, 0.0), x, atol=1e-9)


def test_mmse_singular_channel():
    H = np.eye(4, dtype=complex)
    H[3, 3] = 0
    with pytest.raises(SingularChannelError):
        mmse_equalize(np.ones(4), H, 0.0)
    assert np.all(np.isfinite(mmse_equalize(np.ones(4), H, 1e-3)))


def test_mmse_rejects_bad_arguments():
    with pytest.raises(ValueError):
        mmse_equalize(np.ones(4), np.eye(4), -1.0)
    with pytest.raises(ValueError):
        mmse_equalize(np.ones(4), np.eye(5), 0.1)


def test_ber_count_examples():
    bits = np.random.default_rng(0).integers(0, 2, 1000)
    assert ber_count(bits, bits) == (0, 1000, 0.0)
    assert ber_count(bits, 1 - bits) == (1000, 1000, 1.0)
    flipped = bits.copy()
    flipped[[5, 500, 999]] ^= 1
    assert ber_count(bits, flipped) == (3, 1000, 0.003)
    with pytest.raises(ValueError):
        ber_count(bits, bits[:-1])


def test_noise_variance_and_q():
    assert noise_variance_for_ebn0(0.0, SymbolMap("qpsk")) == pytest.approx(0.5)
    assert noise_variance_for_ebn0(10.0, SymbolMap("bpsk")) == pytest.approx(0.1)
    assert qfunc(0.0) == pytest.approx(0.5)
    assert qfunc(3.0) == pytest.approx(1.3498980316e-3)
