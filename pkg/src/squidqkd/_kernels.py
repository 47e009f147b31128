"""Hot inner loops, each in a numba flavour and a pure-numpy flavour.

The public names at the bottom (``hermite_sum``, ``cascade``,
``toeplitz_hash``) dispatch to one flavour according to
:data:`squidqkd._accel.USE_NUMBA`. Both flavours are always importable so
tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from ._accel import USE_NUMBA, njit

_PI_M14 = math.pi ** -0.25
_SQRT2 = math.sqrt(2.0)


# --------------------------------------------------------------------------
# Oscillator eigenfunction sums  sum_n a_n psi_n(x)
# --------------------------------------------------------------------------

def _hermite_sum_loops(amps, x):
    dim = amps.shape[0]
    out = np.zeros(x.shape[0], dtype=np.complex128)
    # psi_{n+1} = up[n] x psi_n - down[n] psi_{n-1}
    up = np.empty(dim)
    down = np.empty(dim)
    for n in range(dim):
        up[n] = _SQRT2 / math.sqrt(n + 1.0)
        down[n] = math.sqrt(n / (n + 1.0))
    ar = amps.real.copy()
    ai = amps.imag.copy()
    for k in range(x.shape[0]):
        xk = x[k]
        prev = 0.0
        cur = _PI_M14 * math.exp(-0.5 * xk * xk)
        acc_r = ar[0] * cur
        acc_i = ai[0] * cur
        for n in range(dim - 1):
            nxt = up[n] * xk * cur - down[n] * prev
            prev = cur
            cur = nxt
            acc_r += ar[n + 1] * cur
            acc_i += ai[n + 1] * cur
        out[k] = complex(acc_r, acc_i)
    return out


hermite_sum_numba = njit(_hermite_sum_loops)


def hermite_sum_numpy(amps: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_n amps[n] psi_n(x)`` with the stable upward recurrence.

    ``psi_n`` are the oscillator eigenfunctions normalised so that the ground
    state has variance 1/2.
    """
    amps = np.asarray(amps, dtype=np.complex128)
    x = np.asarray(x, dtype=np.float64)
    prev = np.zeros_like(x)
    cur = _PI_M14 * np.exp(-0.5 * x * x)
    acc = amps[0] * cur
    for n in range(amps.shape[0] - 1):
        nxt = (_SQRT2 * x * cur - math.sqrt(n) * prev) / math.sqrt(n + 1)
        prev, cur = cur, nxt
        acc = acc + amps[n + 1] * cur
    return acc


# --------------------------------------------------------------------------
# Cascade parity reconciliation
# --------------------------------------------------------------------------

@njit
def _block_diff_parity(alice, bob, perm, lo, hi):
    s = 0
    for j in range(lo, hi):
        s ^= alice[perm[j]] ^ bob[perm[j]]
    return s


def _cascade_loops(alice, bob, perms, block_sizes):
    n_pass = perms.shape[0]
    n = perms.shape[1]
    bob = bob.copy()
    where = np.empty_like(perms)
    for p in range(n_pass):
        for j in range(n):
            where[p, perms[p, j]] = j
    stack_p = np.empty(n * n_pass + n_pass + 1, dtype=np.int64)
    stack_b = np.empty(n * n_pass + n_pass + 1, dtype=np.int64)
    leaked = 0
    corrections = 0
    for cur in range(n_pass):
        k = block_sizes[cur]
        n_blocks = (n + k - 1) // k
        for b in range(n_blocks):
            leaked += 1
            stack_p[0] = cur
            stack_b[0] = b
            top = 1
            while top > 0:
                top -= 1
                p = stack_p[top]
                kp = block_sizes[p]
                lo = stack_b[top] * kp
                hi = min(lo + kp, n)
                if _block_diff_parity(alice, bob, perms[p], lo, hi) == 0:
                    continue
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    leaked += 1
                    if _block_diff_parity(alice, bob, perms[p], lo, mid) == 1:
                        hi = mid
                    else:
                        lo = mid
                pos = perms[p, lo]
                bob[pos] ^= 1
                corrections += 1
                for q in range(cur + 1):
                    if q == p:
                        continue
                    stack_p[top] = q
                    stack_b[top] = where[q, pos] // block_sizes[q]
                    top += 1
    return bob, leaked, corrections


cascade_numba = njit(_cascade_loops)


def cascade_numpy(alice: np.ndarray, bob: np.ndarray, perms: np.ndarray,
                  block_sizes: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Cascade with numpy block parities and a Python work stack.

    Processing order matches :func:`cascade_numba` exactly, so both return the
    same corrected string and leak count.
    """
    alice = np.asarray(alice, dtype=np.uint8)
    bob = np.asarray(bob, dtype=np.uint8).copy()
    n_pass, n = perms.shape
    where = np.empty_like(perms)
    rows = np.arange(n)
    for p in range(n_pass):
        where[p, perms[p]] = rows

    def odd(p, lo, hi):
        idx = perms[p, lo:hi]
        return int(np.bitwise_xor.reduce(alice[idx] ^ bob[idx])) if hi > lo else 0

    leaked = 0
    corrections = 0
    for cur in range(n_pass):
        k = int(block_sizes[cur])
        diff = (alice ^ bob)[perms[cur]].astype(np.int64)
        starts = np.arange(0, n, k)
        candidates = np.flatnonzero(np.add.reduceat(diff, starts) & 1)
        leaked += starts.size
        # Blocks with even initial parity can only turn odd through a flip
        # elsewhere, which pushes them on the stack below.
        for b in candidates:
            stack = [(cur, int(b))]
            while stack:
                p, blk = stack.pop()
                kp = int(block_sizes[p])
                lo = blk * kp
                hi = min(lo + kp, n)
                if not odd(p, lo, hi):
                    continue
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    leaked += 1
                    if odd(p, lo, mid):
                        hi = mid
                    else:
                        lo = mid
                pos = perms[p, lo]
                bob[pos] ^= 1
                corrections += 1
                for q in range(cur + 1):
                    if q != p:
                        stack.append((q, int(where[q, pos] // block_sizes[q])))
    return bob, leaked, corrections


# --------------------------------------------------------------------------
# Toeplitz hashing over GF(2)
# --------------------------------------------------------------------------

def _pack_words(bits: np.ndarray, extra_words: int = 0) -> np.ndarray:
    """Little-endian bit packing into uint64 words, zero padded."""
    n_words = (bits.shape[0] + 63) // 64 + extra_words
    padded = np.zeros(n_words * 64, dtype=np.uint8)
    padded[:bits.shape[0]] = bits
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


@njit
def _toeplitz_words(S, Y, m):
    # out[i] = parity(seq[i:i+n] & x[::-1]), 64 bits at a time
    out = np.zeros(m, dtype=np.uint8)
    n_words = Y.shape[0]
    for i in range(m):
        q0 = i >> 6
        r = np.uint64(i & 63)
        acc = np.uint64(0)
        for w in range(n_words):
            lo = S[q0 + w]
            if r:
                lo = (lo >> r) | (S[q0 + w + 1] << (np.uint64(64) - r))
            acc ^= lo & Y[w]
        for sh in (32, 16, 8, 4, 2, 1):
            acc ^= acc >> np.uint64(sh)
        out[i] = np.uint8(acc & np.uint64(1))
    return out


def toeplitz_numba(seq: np.ndarray, x: np.ndarray, m: int) -> np.ndarray:
    """Packed-word flavour of :func:`toeplitz_numpy`."""
    n = x.shape[0]
    if m <= 0:
        return np.zeros(0, dtype=np.uint8)
    Y = _pack_words(np.ascontiguousarray(x[::-1], dtype=np.uint8))
    S = _pack_words(np.ascontiguousarray(seq[:n + m - 1], dtype=np.uint8),
                    extra_words=Y.shape[0] + 2)
    return _toeplitz_words(S, Y, int(m))


def toeplitz_numpy(seq: np.ndarray, x: np.ndarray, m: int) -> np.ndarray:
    """``out[i] = sum_j seq[i - j + n - 1] * x[j] mod 2`` via FFT convolution."""
    n = x.shape[0]
    if m <= 0:
        return np.zeros(0, dtype=np.uint8)
    conv = fftconvolve(seq.astype(np.float64), x.astype(np.float64))
    return (np.rint(conv[n - 1:n - 1 + m]).astype(np.int64) & 1).astype(np.uint8)


# --------------------------------------------------------------------------
# Dispatch
# --------------------------------------------------------------------------

if USE_NUMBA:
    def hermite_sum(amps, x):
        return hermite_sum_numba(np.ascontiguousarray(amps, dtype=np.complex128),
                                 np.ascontiguousarray(x, dtype=np.float64))

    def cascade(alice, bob, perms, block_sizes):
        b, leaked, corr = cascade_numba(
            np.ascontiguousarray(alice, dtype=np.uint8),
            np.ascontiguousarray(bob, dtype=np.uint8),
            np.ascontiguousarray(perms, dtype=np.int64),
            np.ascontiguousarray(block_sizes, dtype=np.int64))
        return b, int(leaked), int(corr)

    def toeplitz_hash(seq, x, m):
        if m <= 0:
            return np.zeros(0, dtype=np.uint8)
        return toeplitz_numba(np.ascontiguousarray(seq, dtype=np.uint8),
                              np.ascontiguousarray(x, dtype=np.uint8), int(m))
else:
    hermite_sum = hermite_sum_numpy
    cascade = cascade_numpy
    toeplitz_hash = toeplitz_numpy
