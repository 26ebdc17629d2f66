import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sobograd import snapshot
from sobograd.grid import make_grid, square_grid
from sobograd.snapshot import SnapshotError


def test_layout_and_roundtrip(rng, tmp_path):
    g = make_grid([4, 6], [2.0, 3.0], [-1.0, 0.5])
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    blob = snapshot.encode(g, f)
    assert blob[:4] == b"SGF1"
    assert struct.unpack("<III", blob[4:16]) == (1, 2, 1)
    assert len(blob) == 16 + 2 * 24 + 16 * 24 + 4
    snapshot.write(tmp_path / "f.sgf", g, f)
    g2, f2 = snapshot.read(tmp_path / "f.sgf")
    assert g2 == g
    assert f2.tobytes() == f.astype(np.complex128).tobytes()


def test_vector_field_roundtrip(rng):
    g = square_grid(8, 5.0)
    U = rng.standard_normal((2,) + g.shape) + 0j
    g2, U2 = snapshot.decode(snapshot.encode(g, U))
    np.testing.assert_array_equal(U2, U)
    with pytest.raises(ValueError):
        snapshot.encode(g, np.zeros((3, 3)))


def test_corruption_detected(rng):
    g = square_grid(8, 5.0)
    blob = bytearray(snapshot.encode(g, rng.standard_normal(g.shape) + 0j))
    blob[100] ^= 0x01
    with pytest.raises(SnapshotError, match="CRC"):
        snapshot.decode(bytes(blob))


def test_bad_magic_truncation_and_version(rng):
    g = square_grid(4, 1.0)
    blob = snapshot.encode(g, np.ones(g.shape))
    with pytest.raises(SnapshotError, match="magic"):
        snapshot.decode(b"XXXX" + blob[4:])
    with pytest.raises(SnapshotError, match="truncated"):
        snapshot.decode(blob[:10])
    with pytest.raises(SnapshotError):
        snapshot.decode(blob[:-20] + blob[-4:])
    payload = bytearray(blob[:-4])
    payload[4] = 2
    import zlib

    forged = bytes(payload) + struct.pack("<I", zlib.crc32(bytes(payload)))
    with pytest.raises(SnapshotError, match="version"):
        snapshot.decode(forged)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 9), st.integers(2, 9), st.floats(0.1, 100), st.integers(0, 2**31))
def test_roundtrip_bit_exact_property(n1, n2, L, seed):
    rng = np.random.default_rng(seed)
    g = make_grid([n1, n2], [L, 2 * L])
    f = rng.standard_normal(g.shape) * 1e3 + 1j * rng.standard_normal(g.shape)
    g2, f2 = snapshot.decode(snapshot.encode(g, f))
    assert g2 == g and f2.tobytes() == f.tobytes()
