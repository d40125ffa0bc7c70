import numpy as np
from hypothesis import given, strategies as st

from cubefpp import rng

M32 = 0xFFFFFFFF


def _block(c, k):
    out = rng.philox4x32(*(np.uint64(x) for x in c), *(np.uint64(x) for x in k))
    return tuple(int(x) for x in out)


def test_philox_known_answers():
    # reference vectors published with the Random123 library
    assert _block((0, 0, 0, 0), (0, 0)) == (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)
    assert _block((M32,) * 4, (M32, M32)) == (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)
    assert _block((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0)) == \
        (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)


def test_block_fill_matches_single_draws():
    out = np.empty(37)
    rng.exponential_block(np.uint64(99), rng.STREAM_WEIGHTS, 0, out)
    single = [rng.exponential(np.uint64(99), rng.STREAM_WEIGHTS, np.uint64(i)) for i in range(37)]
    assert np.array_equal(out, single)


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**40))
def test_uniform_in_open_interval(seed, counter):
    u = rng.uniform_open(np.uint64(seed), rng.STREAM_TRIAL, np.uint64(counter))
    assert 0.0 < u < 1.0
    assert rng.exponential(np.uint64(seed), rng.STREAM_TRIAL, np.uint64(counter)) > 0.0


def test_derive_seed_is_a_function_of_its_arguments():
    a = [rng.derive_seed(5, i) for i in range(100)]
    assert a == [rng.derive_seed(5, i) for i in range(100)]
    assert len(set(a)) == 100
    assert rng.derive_seed(5, 3) != rng.derive_seed(6, 3)
    assert rng.derive_seed(5, 3, rng.STREAM_WALK) != rng.derive_seed(5, 3)


def test_streams_are_uniform():
    u = np.array([rng.uniform_open(np.uint64(1), rng.STREAM_TRIAL, np.uint64(i)) for i in range(20000)])
    assert abs(u.mean() - 0.5) < 3 * np.sqrt(1 / 12 / len(u))
    e = np.empty(200000)
    rng.exponential_block(np.uint64(2), rng.STREAM_WEIGHTS, 0, e)
    assert abs(e.mean() - 1.0) < 3 / np.sqrt(len(e))
