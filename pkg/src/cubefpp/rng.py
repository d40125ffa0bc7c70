"""Counter-based random numbers and seed derivation.

Every random quantity in the package is a pure function of a small integer
tuple, so trials and edges can be evaluated in any order (or in parallel)
without changing results.  The core is Philox4x32-10 (Salmon et al., SC'11),
checked against the Random123 known-answer vectors in the tests.
"""

import numpy as np
from numba import njit

MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_LO = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

# stream tags keep sub-streams of one master seed apart
STREAM_WEIGHTS = 1
STREAM_TRIAL = 2
STREAM_BTP = 3
STREAM_WALK = 4


@njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32 with 10 rounds; all arguments are uint64 holding 32-bit words."""
    for r in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _LO
        hi1 = p1 >> _S32
        lo1 = p1 & _LO
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        if r < 9:
            k0 = (k0 + _W0) & _LO
            k1 = (k1 + _W1) & _LO
    return c0, c1, c2, c3


@njit(cache=True, nogil=True)
def random_u64(seed, stream, counter):
    """64 random bits keyed by ``seed`` at position (``stream``, ``counter``).

    One Philox block yields 128 bits; positions ``2j`` and ``2j + 1`` share
    block ``j`` and take its low and high halves.
    """
    seed = np.uint64(seed)
    counter = np.uint64(counter)
    block = counter >> np.uint64(1)
    r0, r1, r2, r3 = philox4x32(block & _LO, block >> _S32, np.uint64(stream) & _LO,
                                np.uint64(0), seed & _LO, seed >> _S32)
    if counter & np.uint64(1):
        return (r3 << _S32) | r2
    return (r1 << _S32) | r0


@njit(cache=True, nogil=True)
def _to_unit(bits):
    return (np.float64(bits >> np.uint64(11)) + 0.5) * 1.1102230246251565e-16


@njit(cache=True, nogil=True)
def uniform_open(seed, stream, counter):
    """Uniform on the open interval (0, 1); 53 bits, never 0 or 1."""
    return _to_unit(random_u64(seed, stream, counter))


@njit(cache=True, nogil=True)
def exponential(seed, stream, counter):
    """Exp(1) by inverse CDF."""
    return -np.log1p(-uniform_open(seed, stream, counter))


@njit(cache=True, nogil=True)
def exponential_block(seed, stream, start, out):
    """Fill ``out`` with the Exp(1) values at counters start, start+1, ...

    Same numbers as calling :func:`exponential` per counter, one Philox call
    per pair.
    """
    seed = np.uint64(seed)
    st = np.uint64(stream) & _LO
    m = out.shape[0]
    i = 0
    c = np.uint64(start)
    while i < m:
        if c & np.uint64(1) or i + 1 == m:
            out[i] = exponential(seed, stream, c)
            i += 1
            c += np.uint64(1)
            continue
        block = c >> np.uint64(1)
        r0, r1, r2, r3 = philox4x32(block & _LO, block >> _S32, st, np.uint64(0),
                                    seed & _LO, seed >> _S32)
        out[i] = -np.log1p(-_to_unit((r1 << _S32) | r0))
        out[i + 1] = -np.log1p(-_to_unit((r3 << _S32) | r2))
        i += 2
        c += np.uint64(2)


def derive_seed(master_seed: int, index: int, stream: int = STREAM_TRIAL) -> int:
    """Seed for trial ``index`` of a run with ``master_seed``.

    A pseudo-random function of its arguments, so that the seed of trial 17
    does not depend on how many trials were requested or which worker ran it.
    """
    if not 0 <= master_seed <= MASK64:
        raise ValueError("master seed must fit in 64 bits")
    return int(random_u64(np.uint64(master_seed), np.uint64(stream), np.uint64(index)))


def generator(seed: int) -> np.random.Generator:
    """A numpy Generator for sequential sampling inside a single trial."""
    return np.random.Generator(np.random.Philox(key=seed & MASK64))
