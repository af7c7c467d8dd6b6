import struct

import numpy as np
import pytest

from otfs.gridio import MAGIC, decode_grid, encode_grid, read_grid, write_grid


def test_round_trip(tmp_path, rng):
    g = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    write_grid(tmp_path / "g.bin", g)
    np.testing.assert_array_equal(read_grid(tmp_path / "g.bin"), g)


def test_layout_is_header_then_row_major_pairs():
    g = np.array([[1 + 2j, 3 + 4j], [5 + 6j, 7 + 8j], [9 + 10j, 11 + 12j]])
    data = encode_grid(g)
    assert len(data) == 16 + 3 * 2 * 16
    assert data[:8] == MAGIC
    assert struct.unpack("<II", data[8:16]) == (3, 2)
    assert struct.unpack("<12d", data[16:]) == tuple(float(v) for v in range(1, 13))


def test_rejects_corrupt_input():
    data = encode_grid(np.zeros((2, 2)))
    with pytest.raises(ValueError, match="magic"):
        decode_grid(b"XXXXXXXX" + data[8:])
    with pytest.raises(ValueError):
        decode_grid(data[:-1])
    with pytest.raises(ValueError):
        decode_grid(data[:10])
