import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingboundary.mps import (CompressionPolicy, OperatorTrain, TensorTrain, apply_gate1,
                               apply_gate2, apply_ot, bond_spectrum, compress, fidelity,
                               identity_ot, prefix_renyi2, product_tt, segment_renyi2,
                               tt_dot, tt_overlap)

LN2 = math.log(2)
PLUS = np.array([1, 1]) / math.sqrt(2)
CZ = np.diag([1.0, 1.0, 1.0, -1.0])
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def random_tt(n, chi, rng, normalize=True):
    tensors = []
    left = 1
    for k in range(n):
        right = 1 if k == n - 1 else min(chi, 2 ** min(k + 1, n - k - 1))
        t = rng.normal(size=(left, 2, right)) + 1j * rng.normal(size=(left, 2, right))
        tensors.append(t)
        left = right
    tt = TensorTrain(tensors)
    if normalize:
        tt.canonicalize(0)
        tt.normalize()
        tt.log_norm = 0.0
    return tt


def cluster_chain_tt(n):
    tt = product_tt([PLUS] * n)
    for k in range(n - 1):
        apply_gate2(tt, k, CZ)
    return tt


def test_product_tt_norm_is_product_of_local_norms():
    vecs = [np.array([1.0, 2.0]), np.array([0.5, 0.5j]), PLUS]
    tt = product_tt(vecs)
    want = np.prod([np.linalg.norm(v) for v in vecs])
    assert abs(tt.norm() - want) < 1e-12
    assert tt.max_bond() == 1


def test_single_site_train():
    tt = product_tt([np.array([0.6, 0.8])])
    assert abs(tt.norm() - 1.0) < 1e-12


def test_identity_ot_fidelity():
    rng = np.random.default_rng(0)
    tt = random_tt(6, 4, rng)
    out, diag = apply_ot(tt, identity_ot(6), CompressionPolicy())
    assert fidelity(out, tt) > 1 - 1e-12
    assert diag.discarded < 1e-12


def test_cz_chain_builds_cluster_and_matches_dense():
    n = 6
    tt = cluster_chain_tt(n)
    assert abs(prefix_renyi2(tt, n // 2) - LN2) < 1e-10
    v = tt.to_dense()
    # phases: (-1)^{n_k n_{k+1}} on a uniform superposition
    idx = np.arange(2 ** n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    signs = (-1.0) ** np.sum(bits[:, :-1] * bits[:, 1:], axis=1)
    want = signs / 2 ** (n / 2)
    assert np.abs(v - want).max() < 1e-12


def test_exact_application_zero_discard():
    rng = np.random.default_rng(1)
    tt = random_tt(5, 4, rng)
    ot = OperatorTrain([rng.normal(size=(1, 2, 2, 1)) for _ in range(5)])
    out, diag = apply_ot(tt, ot, CompressionPolicy(epsilon=0.0))
    assert diag.discarded < 1e-24


def test_apply_ot_matches_dense_contraction():
    rng = np.random.default_rng(2)
    n = 5
    tt = random_tt(n, 4, rng)
    tensors = []
    left = 1
    for k in range(n):
        right = 1 if k == n - 1 else 2
        tensors.append(rng.normal(size=(left, 2, 2, right)) + 1j * rng.normal(size=(left, 2, 2, right)))
        left = right
    ot = OperatorTrain(tensors)
    out, _ = apply_ot(tt, ot, CompressionPolicy(epsilon=0.0))
    # dense reference: contract the operator train into a full matrix
    v = tt.to_dense(include_log_norm=True)
    block = np.ones((1, 1, 1), dtype=complex)
    out_dim = in_dim = 1
    for t in tensors:
        block = np.einsum("oib,bpqr->opiqr", block, t).reshape(out_dim * 2, in_dim * 2, -1)
        out_dim *= 2
        in_dim *= 2
    dense = block[:, :, 0]
    want = dense @ v
    got = out.to_dense(include_log_norm=True)
    assert np.abs(got - want).max() < 1e-10 * np.abs(want).max()


def test_truncation_certificate_bounds_infidelity():
    rng = np.random.default_rng(3)
    for trial in range(6):
        tt = random_tt(8, 6, rng)
        tensors = []
        left = 1
        for k in range(8):
            right = 1 if k == 7 else 2
            tensors.append(rng.normal(size=(left, 2, 2, right)))
            left = right
        ot = OperatorTrain(tensors)
        exact, _ = apply_ot(tt, ot, CompressionPolicy(epsilon=0.0, renormalize=False))
        trunc, diag = apply_ot(tt, ot, CompressionPolicy(epsilon=1e-3, renormalize=False))
        infid = 1 - fidelity(exact, trunc)
        assert diag.discarded >= infid - 1e-12


def test_chi_cap_reported_not_silent():
    rng = np.random.default_rng(4)
    tt = random_tt(8, 8, rng)
    tensors = []
    left = 1
    for k in range(8):
        right = 1 if k == 7 else 2
        tensors.append(rng.normal(size=(left, 2, 2, right)))
        left = right
    out, diag = apply_ot(tt, OperatorTrain(tensors), CompressionPolicy(epsilon=0.0, chi_max=3))
    assert diag.cap_breached
    assert out.max_bond() <= 3


def test_prefix_and_segment_agree_on_prefixes():
    rng = np.random.default_rng(5)
    tt = random_tt(7, 5, rng)
    for cut in range(1, 7):
        a = prefix_renyi2(tt, cut)
        b = segment_renyi2(tt, 0, cut)
        assert abs(a - b) < 1e-9


def test_segment_interior_ghz():
    n = 5
    amps = np.zeros(2 ** n)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    # GHZ as a train: build via gates
    tt = product_tt([np.array([1.0, 0.0])] * n)
    apply_gate1(tt, 0, H * math.sqrt(2) / math.sqrt(2) + 0j)  # H
    for k in range(n - 1):
        cx = np.zeros((4, 4))
        cx[0, 0] = cx[1, 1] = cx[2, 3] = cx[3, 2] = 1.0
        apply_gate2(tt, k, cx)
    assert abs(np.abs(np.vdot(tt.dense_normalized(), amps)) - 1) < 1e-10
    assert abs(segment_renyi2(tt, 1, 4) - LN2) < 1e-10
    assert abs(segment_renyi2(tt, 0, n)) < 1e-12


def test_segment_matches_dense():
    rng = np.random.default_rng(6)
    tt = random_tt(8, 4, rng)
    v = tt.dense_normalized().reshape((2,) * 8)
    for (i, j) in ((2, 5), (1, 7), (3, 4)):
        inside = list(range(i, j))
        outside = [k for k in range(8) if k not in inside]
        m = v.transpose(inside + outside).reshape(2 ** len(inside), -1)
        s = np.linalg.svd(m, compute_uv=False)
        want = -math.log(float(np.sum(s ** 4)))
        assert abs(segment_renyi2(tt, i, j) - want) < 1e-9


def test_overlap_values():
    tt = product_tt([PLUS] * 4)
    assert abs(tt_overlap(tt, [PLUS] * 4) - 1.0) < 1e-12
    minus = np.array([1, -1]) / math.sqrt(2)
    assert abs(tt_overlap(tt, [minus] + [PLUS] * 3)) < 1e-12
    # cluster chain overlap vs dense
    n = 5
    tt = cluster_chain_tt(n)
    rng = np.random.default_rng(7)
    bras = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(n)]
    want = np.ones(1, dtype=complex)
    v = tt.to_dense(include_log_norm=True).reshape((2,) * n)
    for b in bras:
        v = np.tensordot(np.conj(b), v, axes=(0, 0))
    assert abs(tt_overlap(tt, bras) - complex(v)) < 1e-12


def test_log_norm_accumulation_matches_dense():
    rng = np.random.default_rng(8)
    tt = random_tt(6, 3, rng)
    ref = tt.copy()
    ots = []
    for _ in range(3):
        tensors = []
        left = 1
        for k in range(6):
            right = 1 if k == 5 else 2
            tensors.append(rng.normal(size=(left, 2, 2, right)) * 0.7)
            left = right
        ots.append(OperatorTrain(tensors))
    cur = tt
    for ot in ots:
        cur, _ = apply_ot(cur, ot, CompressionPolicy(epsilon=0.0, renormalize=True))
    # exact unnormalized contraction via renormalize=False
    raw = ref
    for ot in ots:
        raw, _ = apply_ot(raw, ot, CompressionPolicy(epsilon=0.0, renormalize=False))
    assert abs(cur.log_norm - math.log(raw.norm())) < 1e-8


def test_noise_floor_always_dropped():
    v1 = np.array([1.0, 0.0])
    tt = product_tt([v1, v1])
    # inject a numerically tiny Schmidt component by hand
    theta = np.zeros((1, 2, 2, 1))
    theta[0, 0, 0, 0] = 1.0
    theta[0, 1, 1, 0] = 1e-15
    u, s, vh = np.linalg.svd(theta.reshape(2, 2), full_matrices=False)
    tt.tensors[0] = u.reshape(1, 2, 2)
    tt.tensors[1] = (s[:, None] * vh).reshape(2, 2, 1)
    compress(tt, CompressionPolicy(epsilon=0.0))
    assert tt.max_bond() == 1


def test_bond_mismatch_rejected():
    with pytest.raises(ValueError):
        TensorTrain([np.ones((1, 2, 3)), np.ones((2, 2, 1))])


def test_cut_out_of_range():
    tt = product_tt([PLUS] * 3)
    with pytest.raises(ValueError):
        prefix_renyi2(tt, 3)
    with pytest.raises(ValueError):
        segment_renyi2(tt, 2, 2)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_compress_preserves_state(seed):
    rng = np.random.default_rng(seed)
    tt = random_tt(6, 4, rng)
    before = tt.dense_normalized()
    compress(tt, CompressionPolicy(epsilon=1e-12))
    after = tt.dense_normalized()
    assert abs(abs(np.vdot(before, after)) - 1) < 1e-9
