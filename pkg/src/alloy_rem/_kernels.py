"""Numba kernels: counter-based bit stream, normal pairs, blockwise log-sum-exp.

Everything here is written so that LLVM can vectorize the inner loops:
no libm calls, no division-by-zero checks (``error_model='numpy'``),
branches only as selects. exp/log are polynomial with bit tricks.
"""

import math
import os

import numpy as np
from llvmlite import ir
from numba import njit, types
from numba.extending import intrinsic

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Terms per block. Shards are whole blocks, so block results do not depend
# on how the work is split between workers.
BLOCK = 4096

_CACHE = os.environ.get("ALLOY_REM_NO_JIT_CACHE") is None

_FM = {"contract", "afn", "nnan", "ninf", "arcp"}
_FM_SUM = _FM | {"reassoc", "nsz"}

_U53 = 1.1102230246251565e-16  # 2**-53
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10
_LN2 = 0.6931471805599453
_LOG2E = 1.4426950408889634
_MAGIC = 6755399441055744.0  # 1.5 * 2**52, round-to-int shifter
_SQRT2 = math.sqrt(2.0)
_PI4 = math.pi / 4.0


def mix64(x: int) -> int:
    """SplitMix64 finalizer on python ints; mirrors the jitted ``_mix``."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def derive_key(seed: int, stream_id: int) -> int:
    return mix64(mix64((seed * GOLDEN + 0x632BE59BD9B4E019) & MASK64) ^ mix64(stream_id + GOLDEN))


@intrinsic
def _i2f(typingctx, x):
    sig = types.float64(types.int64)

    def codegen(context, builder, signature, args):
        return builder.bitcast(args[0], ir.DoubleType())

    return sig, codegen


@intrinsic
def _f2i(typingctx, x):
    sig = types.int64(types.float64)

    def codegen(context, builder, signature, args):
        return builder.bitcast(args[0], ir.IntType(64))

    return sig, codegen


@njit(inline="always", error_model="numpy")
def _mix(x):
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    return x ^ (x >> np.uint64(31))


@njit(inline="always", error_model="numpy")
def _exp_nonpos(x):
    # accurate to ~2 ulp on [-700, 0]; exactly 0 below -700
    keep = x >= -700.0
    x = max(x, -700.0)
    # round via the shifter, but read k back through the bits: with reassoc
    # enabled the float form (t - MAGIC) would be folded to x * LOG2E
    t = x * _LOG2E + _MAGIC
    ki = _f2i(t) - _f2i(_MAGIC)
    k = np.float64(ki)
    r = x - k * _LN2_HI - k * _LN2_LO
    p = 1.0 + r * (1.0 + r * (1 / 2 + r * (1 / 6 + r * (1 / 24 + r * (1 / 120 + r * (
        1 / 720 + r * (1 / 5040 + r * (1 / 40320 + r * (1 / 362880 + r * (
            1 / 3628800 + r * (1 / 39916800 + r * (1 / 479001600))))))))))))
    v = p * _i2f((ki + 1023) << 52)
    return v if keep else 0.0


@njit(inline="always", error_model="numpy")
def _log_pos(u):
    # u must be a positive normal double
    b = _f2i(u)
    e = np.float64((b >> 52) - 1023)
    m = _i2f((b & 0x000FFFFFFFFFFFFF) | 0x3FF0000000000000)
    big = m > _SQRT2
    m = m * 0.5 if big else m
    e = e + 1.0 if big else e
    s = (m - 1.0) / (m + 1.0)
    s2 = s * s
    q = 1.0 + s2 * (1 / 3 + s2 * (1 / 5 + s2 * (1 / 7 + s2 * (1 / 9 + s2 * (1 / 11 + s2 * (
        1 / 13 + s2 * (1 / 15 + s2 * (1 / 17 + s2 * (1 / 19 + s2 * (1 / 21))))))))))
    return e * _LN2 + 2.0 * s * q


@njit(inline="always", error_model="numpy", fastmath=_FM)
def _normal_pair(key, pair):
    """Two independent N(0,1) draws plus the 11 spare low bits of the first word.

    Box-Muller on one octant: the angle lives in [0, pi/4) and the octant is
    chosen by three random bits (two signs, one swap).
    """
    ctr = key + (np.uint64(2) * pair) * np.uint64(GOLDEN)
    r1 = _mix(ctr)
    r2 = _mix(ctr + np.uint64(GOLDEN))
    u1 = (np.float64(np.int64(r1 >> np.uint64(11))) + 1.0) * _U53
    phi = np.float64(np.int64(r2 >> np.uint64(11))) * (_U53 * _PI4)
    rad = np.sqrt(-2.0 * _log_pos(u1))
    f2 = phi * phi
    c = 1.0 - f2 * (1 / 2 - f2 * (1 / 24 - f2 * (1 / 720 - f2 * (1 / 40320 - f2 * (
        1 / 3628800 - f2 * (1 / 479001600 - f2 * (1 / 87178291200 - f2 / 20922789888000)))))))
    s = phi * (1.0 - f2 * (1 / 6 - f2 * (1 / 120 - f2 * (1 / 5040 - f2 * (1 / 362880 - f2 * (
        1 / 39916800 - f2 * (1 / 6227020800 - f2 / 1307674368000)))))))
    flags = np.int64(r1 & np.uint64(0x7FF))
    swap = (flags & 4) != 0
    x = s if swap else c
    y = c if swap else s
    x = -x if (flags & 1) != 0 else x
    y = -y if (flags & 2) != 0 else y
    return rad * x, rad * y, flags


@njit(error_model="numpy", fastmath=_FM, nogil=True, cache=_CACHE)
def fill_words(key, start, out):
    for i in range(out.size):
        out[i] = _mix(key + np.uint64(start + i) * np.uint64(GOLDEN))


@njit(error_model="numpy", fastmath=_FM, nogil=True, cache=_CACHE)
def fill_uniforms(key, start, out):
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    for i in range(out.size):
        w = _mix(key + np.uint64(start + i) * np.uint64(GOLDEN))
        out[i] = (np.float64(np.int64(w >> np.uint64(11))) + 0.5) * _U53


@njit(error_model="numpy", fastmath=_FM, nogil=True, cache=_CACHE)
def fill_normals(key, first_pair, z, comp):
    """Normals 2*first_pair ... into ``z``; ``comp`` gets the mixture-branch bit.

    ``z.size`` must be even.
    """
    npairs = z.size // 2
    for i in range(npairs):
        x, y, flags = _normal_pair(key, np.uint64(first_pair + i))
        z[2 * i] = x
        z[2 * i + 1] = y
        comp[2 * i] = (flags >> 3) & 1
        comp[2 * i + 1] = (flags >> 4) & 1


@njit(error_model="numpy", fastmath=_FM, nogil=True, cache=_CACHE)
def _fill_pairs(key, first_pair, npairs, z1, z2, c1, c2):
    for i in range(npairs):
        x, y, flags = _normal_pair(key, np.uint64(first_pair + i))
        c1[i] = (flags >> 3) & 1
        c2[i] = (flags >> 4) & 1
        z1[i] = x
        z2[i] = y


_KEY_FLOOR = -(1 << 62)


@njit(inline="always")
def _order_key(x):
    # monotone map double -> int64; integer max reductions vectorize, float ones do not
    b = _f2i(x)
    return b ^ ((b >> 63) & 0x7FFFFFFFFFFFFFFF)


@njit(inline="always")
def _from_order_key(k):
    return _i2f(k ^ ((k >> 63) & 0x7FFFFFFFFFFFFFFF))


@njit(error_model="numpy", fastmath=_FM_SUM, nogil=True, cache=_CACHE)
def _branch_max(z, c, npairs):
    k0 = _KEY_FLOOR
    k1 = _KEY_FLOOR
    n1 = 0
    for i in range(npairs):
        k = _order_key(z[i])
        is1 = c[i] == 1
        v1 = k if is1 else _KEY_FLOOR
        v0 = _KEY_FLOOR if is1 else k
        k1 = v1 if v1 > k1 else k1
        k0 = v0 if v0 > k0 else k0
        n1 += c[i]
    return k0, k1, n1


@njit(error_model="numpy", fastmath=_FM_SUM, nogil=True, cache=_CACHE)
def _branch_expsum(z, c, npairs, a0, zm0, a1, zm1):
    s0 = 0.0
    s1 = 0.0
    for i in range(npairs):
        is1 = c[i] == 1
        x = a1 * (z[i] - zm1) if is1 else a0 * (z[i] - zm0)
        t = _exp_nonpos(x)
        s1 += t if is1 else 0.0
        s0 += 0.0 if is1 else t
    return s0, s1


@njit(nogil=True, cache=_CACHE)
def replica_blocks(key, m, block_lo, block_hi, root_n, shift, scale, betas,
                   emax0, emax1, count1, sums0, sums1):
    """Process blocks [block_lo, block_hi) of one replica.

    Term j has energy ``root_n * z_j`` (standard branch) or
    ``shift + scale * z_j`` (shifted branch). Per block b this writes the
    largest energy of each branch (``emax0/emax1``, -inf for an empty
    branch), the shifted-branch count, and for every beta the branch sums
    of ``exp(beta * (E_j - emax))``.
    """
    half = BLOCK // 2
    z1 = np.empty(half)
    z2 = np.empty(half)
    c1 = np.empty(half, dtype=np.int64)
    c2 = np.empty(half, dtype=np.int64)
    nb = betas.size
    for b in range(block_lo, block_hi):
        t0 = b * BLOCK
        nterms = min(BLOCK, m - t0)
        n1 = (nterms + 1) // 2
        n2 = nterms // 2
        _fill_pairs(key, t0 // 2, n1, z1, z2, c1, c2)
        a0, a1, k1 = _branch_max(z1, c1, n1)
        b0, b1, k2 = _branch_max(z2, c2, n2)
        k = k1 + k2
        has0 = nterms - k > 0
        has1 = k > 0
        zm0 = _from_order_key(max(a0, b0)) if has0 else 0.0
        zm1 = _from_order_key(max(a1, b1)) if has1 else 0.0
        emax0[b] = root_n * zm0 if has0 else -np.inf
        emax1[b] = shift + scale * zm1 if has1 else -np.inf
        count1[b] = k
        for j in range(nb):
            g0 = betas[j] * root_n
            g1 = betas[j] * scale
            p0, p1 = _branch_expsum(z1, c1, n1, g0, zm0, g1, zm1)
            q0, q1 = _branch_expsum(z2, c2, n2, g0, zm0, g1, zm1)
            sums0[j, b] = p0 + q0
            sums1[j, b] = p1 + q1
