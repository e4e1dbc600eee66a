"""Bit-packed GF(2) stabilizer tableau kernels.

Row layout follows the standard destabilizer/stabilizer scheme: rows 0..n-1
are destabilizers, n..2n-1 stabilizers, each a packed X-part and Z-part of
ceil(n/64) words plus one sign bit. Phase bookkeeping runs mod 4 through the
word-parallel popcount of the i-exponent masks.
"""

import numpy as np
from numba import njit, uint64

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(uint64(uint64), cache=True, inline="always")
def _pop(x):
    x = x - ((x >> _ONE) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@njit(cache=True)
def _g_words(x1, z1, x2, z2):
    """Signed i-exponent count from multiplying Pauli (x1,z1) into (x2,z2)."""
    pos = ((x1 & ~z1) & (x2 & z2)) | ((x1 & z1) & (z2 & ~x2)) | ((~x1 & z1) & (x2 & ~z2))
    neg = ((x1 & ~z1) & (z2 & ~x2)) | ((x1 & z1) & (x2 & ~z2)) | ((~x1 & z1) & (x2 & z2))
    return np.int64(_pop(pos)) - np.int64(_pop(neg))


@njit(cache=True)
def _rowsum_into(xs, zs, rs, h, i):
    """Row h := row h * row i (phases tracked mod 4, stored mod 2)."""
    W = xs.shape[1]
    g = np.int64(0)
    for w in range(W):
        g += _g_words(xs[i, w], zs[i, w], xs[h, w], zs[h, w])
    tot = (np.int64(2) * np.int64(rs[h]) + np.int64(2) * np.int64(rs[i]) + g) % 4
    if tot < 0:
        tot += 4
    rs[h] = np.uint8(tot // 2)
    for w in range(W):
        xs[h, w] ^= xs[i, w]
        zs[h, w] ^= zs[i, w]


@njit(cache=True)
def _anticommutes(xs, zs, row, px, pz):
    W = xs.shape[1]
    acc = _ZERO
    for w in range(W):
        acc ^= _pop(xs[row, w] & pz[w]) ^ _pop(zs[row, w] & px[w])
    return np.int64(acc & _ONE)


@njit(cache=True)
def _h_col(xs, zs, rs, q):
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    for row in range(xs.shape[0]):
        x = xs[row, wq] & bit
        z = zs[row, wq] & bit
        if x != _ZERO and z != _ZERO:
            rs[row] ^= 1
        t = (xs[row, wq] ^ zs[row, wq]) & bit
        xs[row, wq] ^= t
        zs[row, wq] ^= t


@njit(cache=True)
def _s_col(xs, zs, rs, q):
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    for row in range(xs.shape[0]):
        x = xs[row, wq] & bit
        z = zs[row, wq] & bit
        if x != _ZERO and z != _ZERO:
            rs[row] ^= 1
        if x != _ZERO:
            zs[row, wq] ^= bit


@njit(cache=True)
def _x_col(xs, zs, rs, q):
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    for row in range(xs.shape[0]):
        if zs[row, wq] & bit:
            rs[row] ^= 1


@njit(cache=True)
def _z_col(xs, zs, rs, q):
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    for row in range(xs.shape[0]):
        if xs[row, wq] & bit:
            rs[row] ^= 1


@njit(cache=True)
def _cx_cols(xs, zs, rs, a, b):
    wa, wb = a // 64, b // 64
    ba = _ONE << np.uint64(a % 64)
    bb = _ONE << np.uint64(b % 64)
    for row in range(xs.shape[0]):
        xa = xs[row, wa] & ba
        zb = zs[row, wb] & bb
        if xa != _ZERO and zb != _ZERO:
            xb = xs[row, wb] & bb
            za = zs[row, wa] & ba
            if (xb != _ZERO) == (za != _ZERO):
                rs[row] ^= 1
        if xa != _ZERO:
            xs[row, wb] ^= bb
        if zb != _ZERO:
            zs[row, wa] ^= ba


@njit(cache=True)
def _cz_cols(xs, zs, rs, a, b):
    wa, wb = a // 64, b // 64
    ba = _ONE << np.uint64(a % 64)
    bb = _ONE << np.uint64(b % 64)
    for row in range(xs.shape[0]):
        xa = xs[row, wa] & ba
        xb = xs[row, wb] & bb
        if xa != _ZERO and xb != _ZERO:
            za = zs[row, wa] & ba
            zb = zs[row, wb] & bb
            if (za != _ZERO) != (zb != _ZERO):
                rs[row] ^= 1
        if xb != _ZERO:
            zs[row, wa] ^= ba
        if xa != _ZERO:
            zs[row, wb] ^= bb


@njit(cache=True)
def _cz_many(xs, zs, rs, pairs):
    for k in range(pairs.shape[0]):
        _cz_cols(xs, zs, rs, pairs[k, 0], pairs[k, 1])


@njit(cache=True)
def _measure(xs, zs, rs, n, px, pz, rand_bit, forced, force_flag):
    """Measure the Pauli (px, pz) on a tableau of n qubits.

    Returns (outcome_bit, deterministic, pivot): outcome_bit is 0 for +1,
    1 for -1; pivot is the stabilizer row holding the measured Pauli after a
    random-outcome update, else -1. forced/force_flag pre-select the random
    branch outcome; rand_bit feeds the unforced case.
    """
    pivot = np.int64(-1)
    for row in range(n, 2 * n):
        if _anticommutes(xs, zs, row, px, pz):
            pivot = row
            break
    if pivot >= 0:
        for row in range(2 * n):
            if row != pivot and _anticommutes(xs, zs, row, px, pz):
                _rowsum_into(xs, zs, rs, row, pivot)
        # destabilizer partner takes the old pivot row
        d = pivot - n
        for w in range(xs.shape[1]):
            xs[d, w] = xs[pivot, w]
            zs[d, w] = zs[pivot, w]
        rs[d] = rs[pivot]
        out = forced if force_flag else rand_bit
        for w in range(xs.shape[1]):
            xs[pivot, w] = px[w]
            zs[pivot, w] = pz[w]
        rs[pivot] = np.uint8(out)
        return np.int64(out), np.int64(0), pivot
    # deterministic: accumulate into the scratch row 2n
    sc = 2 * n
    for w in range(xs.shape[1]):
        xs[sc, w] = _ZERO
        zs[sc, w] = _ZERO
    rs[sc] = 0
    for row in range(n):
        if _anticommutes(xs, zs, row, px, pz):
            _rowsum_into(xs, zs, rs, sc, row + n)
    return np.int64(rs[sc]), np.int64(1), np.int64(-1)


@njit(cache=True)
def _isolate(xs, zs, rs, q, pivot):
    """Strip column q from the other stabilizer rows; sign-fix the pivot to +Z_q.

    Assumes the pivot stabilizer row is exactly +/- Z_q (post-measurement,
    post-rotation), so the others can only carry Z_q factors. Multiplying
    stabilizer row h by the pivot is compensated on the dual side
    (D_pivot *= D_h) to keep the symplectic pairing canonical; destabilizer
    junk on column q is harmless and left in place.
    """
    n = (xs.shape[0] - 1) // 2
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    partner = pivot - n
    for row in range(n, 2 * n):
        if row == pivot:
            continue
        if zs[row, wq] & bit:
            _rowsum_into(xs, zs, rs, row, pivot)
            _rowsum_into(xs, zs, rs, partner, row - n)
    if zs[partner, wq] & bit:
        _rowsum_into(xs, zs, rs, partner, pivot)
    if rs[pivot]:
        _x_col(xs, zs, rs, q)


@njit(cache=True)
def _measure_free_1q(xs, zs, rs, n, q, basis, rand_bit):
    """Fused single-qubit measure + rotate-to-Z + isolate + reset for slot q.

    basis: 0 = X, 1 = Y, 2 = Z. Returns the outcome bit (0 -> +1, 1 -> -1).
    """
    W = xs.shape[1]
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    if basis == 0:
        px[wq] = bit
    elif basis == 1:
        px[wq] = bit
        pz[wq] = bit
    else:
        pz[wq] = bit
    out, det, pivot = _measure(xs, zs, rs, n, px, pz, rand_bit, 0, 0)
    if det == 1:
        if basis == 0:
            _h_col(xs, zs, rs, q)
        elif basis == 1:
            _s_col(xs, zs, rs, q); _s_col(xs, zs, rs, q); _s_col(xs, zs, rs, q)
            _h_col(xs, zs, rs, q)
        _h_col(xs, zs, rs, q)
        pz2 = np.zeros(W, dtype=np.uint64)
        pz2[wq] = bit
        px2 = np.zeros(W, dtype=np.uint64)
        _, _, pivot = _measure(xs, zs, rs, n, px2, pz2, 0, 0, 0)
    else:
        if basis == 0:
            _h_col(xs, zs, rs, q)
        elif basis == 1:
            _s_col(xs, zs, rs, q); _s_col(xs, zs, rs, q); _s_col(xs, zs, rs, q)
            _h_col(xs, zs, rs, q)
    _isolate(xs, zs, rs, q, pivot)
    return out


@njit(cache=True)
def _measure_zz(xs, zs, rs, n, k, l, rand_bit):
    """Measure Z_k Z_l; returns the outcome bit."""
    W = xs.shape[1]
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    pz[k // 64] |= _ONE << np.uint64(k % 64)
    pz[l // 64] |= _ONE << np.uint64(l % 64)
    out, _, _ = _measure(xs, zs, rs, n, px, pz, rand_bit, 0, 0)
    return out


@njit(cache=True)
def _measure_x1(xs, zs, rs, n, q, rand_bit):
    """Measure X_q without freeing; returns the outcome bit."""
    W = xs.shape[1]
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    px[q // 64] = _ONE << np.uint64(q % 64)
    out, _, _ = _measure(xs, zs, rs, n, px, pz, rand_bit, 0, 0)
    return out


# ---------------------------------------------------------------------------
# phase-free stabilizer-half kernels (group structure only; signs and
# destabilizers dropped). Entropies and mutual information depend only on the
# group mod phases, so sweeps run here at a fraction of the cost.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _gh_col(xs, zs, q):
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    for row in range(xs.shape[0]):
        t = (xs[row, wq] ^ zs[row, wq]) & bit
        xs[row, wq] ^= t
        zs[row, wq] ^= t


@njit(cache=True)
def _gs_col(xs, zs, q):
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    for row in range(xs.shape[0]):
        if xs[row, wq] & bit:
            zs[row, wq] ^= bit


@njit(cache=True)
def _gcx_cols(xs, zs, a, b):
    wa, wb = a // 64, b // 64
    ba = _ONE << np.uint64(a % 64)
    bb = _ONE << np.uint64(b % 64)
    for row in range(xs.shape[0]):
        if xs[row, wa] & ba:
            xs[row, wb] ^= bb
        if zs[row, wb] & bb:
            zs[row, wa] ^= ba


@njit(cache=True)
def _gcz_cols(xs, zs, a, b):
    wa, wb = a // 64, b // 64
    ba = _ONE << np.uint64(a % 64)
    bb = _ONE << np.uint64(b % 64)
    for row in range(xs.shape[0]):
        if xs[row, wa] & ba:
            zs[row, wb] ^= bb
        if xs[row, wb] & bb:
            zs[row, wa] ^= ba


@njit(cache=True)
def _gcz_many(xs, zs, pairs):
    for k in range(pairs.shape[0]):
        _gcz_cols(xs, zs, pairs[k, 0], pairs[k, 1])


@njit(cache=True)
def _gmeasure(xs, zs, px, pz):
    """Group-only measurement update; returns the pivot row or -1."""
    n = xs.shape[0]
    W = xs.shape[1]
    pivot = np.int64(-1)
    for row in range(n):
        acc = _ZERO
        for w in range(W):
            acc ^= _pop(xs[row, w] & pz[w]) ^ _pop(zs[row, w] & px[w])
        if acc & _ONE:
            if pivot < 0:
                pivot = row
            else:
                for w in range(W):
                    xs[row, w] ^= xs[pivot, w]
                    zs[row, w] ^= zs[pivot, w]
    if pivot >= 0:
        for w in range(W):
            xs[pivot, w] = px[w]
            zs[pivot, w] = pz[w]
    return pivot


@njit(cache=True)
def _gmeasure_free_1q(xs, zs, q, basis):
    """Group-only fused measure(X/Y/Z) + isolate + reset of slot q to |0>."""
    W = xs.shape[1]
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    wq = q // 64
    bit = _ONE << np.uint64(q % 64)
    if basis == 0:
        px[wq] = bit
    elif basis == 1:
        px[wq] = bit
        pz[wq] = bit
    else:
        pz[wq] = bit
    pivot = _gmeasure(xs, zs, px, pz)
    if basis == 0:
        _gh_col(xs, zs, q)
    elif basis == 1:
        _gs_col(xs, zs, q)  # phase-free S == S^dagger
        _gh_col(xs, zs, q)
    if pivot < 0:
        # deterministic: kick to the conjugate basis and remeasure
        _gh_col(xs, zs, q)
        px2 = np.zeros(W, dtype=np.uint64)
        pz2 = np.zeros(W, dtype=np.uint64)
        pz2[wq] = bit
        pivot = _gmeasure(xs, zs, px2, pz2)
    for row in range(xs.shape[0]):
        if row != pivot and (zs[row, wq] & bit):
            for w in range(W):
                xs[row, w] ^= xs[pivot, w]
                zs[row, w] ^= zs[pivot, w]


@njit(cache=True)
def _gmeasure_zz(xs, zs, k, l):
    W = xs.shape[1]
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    pz[k // 64] |= _ONE << np.uint64(k % 64)
    pz[l // 64] |= _ONE << np.uint64(l % 64)
    _gmeasure(xs, zs, px, pz)


@njit(cache=True)
def _gmeasure_x1(xs, zs, q):
    W = xs.shape[1]
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    px[q // 64] = _ONE << np.uint64(q % 64)
    _gmeasure(xs, zs, px, pz)


@njit(cache=True)
def _grank_region(xs, zs, cols):
    """GF(2) rank of group rows restricted to the given columns."""
    n = xs.shape[0]
    m = 2 * cols.shape[0]
    words = (m + 63) // 64
    sub = np.zeros((n, words), dtype=np.uint64)
    for r in range(n):
        for c in range(cols.shape[0]):
            q = cols[c]
            wq = q // 64
            bit = _ONE << np.uint64(q % 64)
            if xs[r, wq] & bit:
                sub[r, (2 * c) // 64] |= _ONE << np.uint64((2 * c) % 64)
            if zs[r, wq] & bit:
                sub[r, (2 * c + 1) // 64] |= _ONE << np.uint64((2 * c + 1) % 64)
    rank = 0
    for c in range(m):
        wc = c // 64
        bit = _ONE << np.uint64(c % 64)
        pivot = -1
        for r in range(rank, n):
            if sub[r, wc] & bit:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            for w in range(words):
                t = sub[pivot, w]
                sub[pivot, w] = sub[rank, w]
                sub[rank, w] = t
        for r in range(rank + 1, n):
            if sub[r, wc] & bit:
                for w in range(words):
                    sub[r, w] ^= sub[rank, w]
        rank += 1
        if rank == n:
            break
    return rank


@njit(cache=True)
def _chain_step(xs, zs, codes_spatial, codes_temporal, L):
    """One chain row: spatial slots (X measure / quarter-X / idle), then
    temporal slots (ZZ measure / quarter-ZZ / idle). Codes: 0=X, 1=Y, 2=Z."""
    for x in range(L):
        c = codes_spatial[x]
        if c == 0:
            _gmeasure_x1(xs, zs, x)
        elif c == 1:
            _gh_col(xs, zs, x); _gs_col(xs, zs, x); _gh_col(xs, zs, x)
    for x in range(L):
        c = codes_temporal[x]
        k = (x - 1) % L
        if c == 2:
            _gmeasure_zz(xs, zs, k, x)
        elif c == 1:
            _gcx_cols(xs, zs, k, x); _gs_col(xs, zs, x); _gcx_cols(xs, zs, k, x)


@njit(cache=True)
def _region_rank(xs, zs, n, cols):
    """GF(2) rank of the stabilizer rows restricted to the given columns."""
    m = 2 * cols.shape[0]
    words = (m + 63) // 64
    sub = np.zeros((n, words), dtype=np.uint64)
    for r in range(n):
        row = n + r
        for c in range(cols.shape[0]):
            q = cols[c]
            wq = q // 64
            bit = _ONE << np.uint64(q % 64)
            if xs[row, wq] & bit:
                sub[r, (2 * c) // 64] |= _ONE << np.uint64((2 * c) % 64)
            if zs[row, wq] & bit:
                sub[r, (2 * c + 1) // 64] |= _ONE << np.uint64((2 * c + 1) % 64)
    rank = 0
    for c in range(m):
        wc = c // 64
        bit = _ONE << np.uint64(c % 64)
        pivot = -1
        for r in range(rank, n):
            if sub[r, wc] & bit:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            for w in range(words):
                t = sub[pivot, w]
                sub[pivot, w] = sub[rank, w]
                sub[rank, w] = t
        for r in range(n):
            if r != rank and (sub[r, wc] & bit):
                for w in range(words):
                    sub[r, w] ^= sub[rank, w]
        rank += 1
        if rank == n:
            break
    return rank
