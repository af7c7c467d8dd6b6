import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dzt_sum, idzt_sum, isfft_sum, naive_dft, sfft_sum
from otfs.transforms import dft, dzt, idzt, isfft, sfft

from conftest import crandn

SIZES = [1, 2, 4, 8, 16, 32]


@pytest.mark.parametrize("n", [1, 2, 3, 7, 64, 1000, 4096])
@pytest.mark.parametrize("inverse", [False, True])
def test_dft_matches_naive_reference(n, inverse, rng):
    x = crandn(rng, n)
    assert np.max(np.abs(dft(x, inverse=inverse) - naive_dft(x, inverse=inverse))) <= 1e-12


def test_isfft_zero_grid():
    assert np.all(isfft(np.zeros((4, 3))) == 0)


@pytest.mark.parametrize("M,N", [(1, 1), (4, 4), (8, 2), (3, 5)])
def test_isfft_impulse_is_flat(M, N):
    x = np.zeros((M, N))
    x[0, 0] = 1
    np.testing.assert_allclose(isfft(x), np.full((M, N), 1 / np.sqrt(M * N)), atol=1e-15)


@pytest.mark.parametrize("M,N", [(4, 4), (8, 4), (3, 5)])
def test_isfft_sfft_match_double_sum(M, N, rng):
    x = crandn(rng, M, N)
    assert np.max(np.abs(isfft(x) - isfft_sum(x))) <= 1e-12
    assert np.max(np.abs(sfft(x) - sfft_sum(x))) <= 1e-12


def test_sfft_flat_grid_is_impulse():
    M, N = 4, 3
    y = sfft(np.full((M, N), 1 / np.sqrt(M * N)))
    expected = np.zeros((M, N))
    expected[0, 0] = 1
    np.testing.assert_allclose(y, expected, atol=1e-15)


@pytest.mark.parametrize("M,N", [(4, 4), (8, 4)])
def test_sfft_isfft_round_trip(M, N, rng):
    x = crandn(rng, M, N)
    assert np.max(np.abs(sfft(isfft(x)) - x)) <= 1e-12
    assert np.max(np.abs(sfft_sum(isfft_sum(x)) - x)) <= 1e-12


def test_isfft_single_slot_is_delay_dft(rng):
    x = crandn(rng, 16, 1)
    np.testing.assert_allclose(isfft(x)[:, 0], naive_dft(x[:, 0]), atol=1e-13)


def test_grid_shape_checks():
    with pytest.raises(ValueError):
        isfft(np.zeros(4))
    with pytest.raises(ValueError):
        sfft(np.zeros((4, 4)), shape=(4, 2))
    with pytest.raises(ValueError):
        dzt(np.zeros(7), 2, 4)


def test_dzt_constant_sequence():
    z = dzt(np.ones(4), 2, 2)
    np.testing.assert_allclose(z, [[np.sqrt(2), 0], [np.sqrt(2), 0]], atol=1e-15)


@pytest.mark.parametrize("M,N", [(4, 2), (3, 5)])
def test_dzt_of_impulse(M, N):
    x = np.zeros(M * N)
    x[0] = 1
    expected = np.zeros((M, N))
    expected[0, :] = 1 / np.sqrt(N)
    np.testing.assert_allclose(dzt(x, M, N), expected, atol=1e-15)


def test_dzt_matches_direct_sum(rng):
    x = crandn(rng, 8)
    assert np.max(np.abs(dzt(x, 4, 2) - dzt_sum(x, 4, 2))) <= 1e-13


def test_idzt_matches_direct_sum(rng):
    z = crandn(rng, 4, 4)
    assert np.max(np.abs(idzt(z) - idzt_sum(z))) <= 1e-13
    assert np.max(np.abs(dzt(idzt(z), 4, 4) - z)) <= 1e-13


def test_idzt_single_delay_tap():
    M, N, l0 = 4, 3, 2
    z = np.zeros((M, N), dtype=complex)
    z[l0, 0] = np.sqrt(N)
    x = idzt(z)
    expected = np.zeros(M * N)
    expected[l0::M] = 1
    np.testing.assert_allclose(x, expected, atol=1e-15)


def test_dzt_is_reshape_then_doppler_dft(rng):
    M, N = 5, 4
    x = crandn(rng, M * N)
    grid = np.empty((M, N), dtype=complex)
    for l in range(M):
        for n in range(N):
            grid[l, n] = x[l + n * M]
    by_rows = np.array([naive_dft(row) for row in grid])
    np.testing.assert_allclose(dzt(x, M, N), by_rows, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(
    M=st.sampled_from(SIZES),
    N=st.sampled_from(SIZES),
    seed=st.integers(0, 2**32 - 1),
)
def test_transforms_unitary(M, N, seed):
    rng = np.random.default_rng(seed)
    x = crandn(rng, M, N)
    norm = np.linalg.norm(x)
    for y in (isfft(x), sfft(x), idzt(x)):
        assert abs(np.linalg.norm(y) - norm) <= 1e-12 * norm
    assert np.max(np.abs(sfft(isfft(x)) - x)) <= 1e-12
    assert np.max(np.abs(isfft(sfft(x)) - x)) <= 1e-12
    assert np.max(np.abs(dzt(idzt(x), M, N) - x)) <= 1e-12
    seq = x.reshape(-1)
    assert abs(np.linalg.norm(dzt(seq, M, N)) - norm) <= 1e-12 * norm
