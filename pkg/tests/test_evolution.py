"""Exact density evolution of the conditional root-LLR laws."""

import math

import numpy as np
import pytest

from treecast import (
    AtomExplosion,
    InvalidParameter,
    PruningPolicy,
    base_pair,
    deep_policy,
    diagnostics,
    evolve,
    evolve_to_depth,
    exact_policy,
    gap_identity_residual,
    hardcore_channel,
    make_channel,
    mean_gap,
    symmetric_channel,
    w_of_lambda,
)

from _oracles import brute_pair_laws, brute_root_posterior, compare_laws, random_channel


def assert_matches_oracle(pair, c, k, depth, vtol=1e-10, wtol=1e-10):
    ov, ow0, ow1 = brute_pair_laws(c, k, depth)
    keep = (pair.w0 > 0) | (pair.w1 > 0)
    dv, dw0 = compare_laws(pair.values[keep], pair.w0[keep], ov, ow0)
    _, dw1 = compare_laws(pair.values[keep], pair.w1[keep], ov, ow1)
    assert dv < vtol, f"value mismatch {dv} at k={k} d={depth}"
    assert dw0 < wtol and dw1 < wtol, f"weight mismatch {dw0}/{dw1} at k={k} d={depth}"


# ---------------------------------------------------------------- base case

def test_base_pair_symmetric_single_child():
    """k=1 base case is the two-point log-odds experiment."""
    eps = 0.2
    pair = base_pair(symmetric_channel(eps), 1)
    ratio = math.log((1.0 - eps) / eps)
    assert pair.depth == 1
    assert np.allclose(pair.values, [-ratio, ratio], atol=1e-12)
    assert np.allclose(pair.w0, [eps, 1.0 - eps], atol=1e-15)
    assert np.allclose(pair.w1, [1.0 - eps, eps], atol=1e-15)


def test_base_pair_hardcore_single_child():
    """Occupied root forces an empty child: law1 is a point mass."""
    c, _ = hardcore_channel(1.0, 1)
    pair = base_pair(c, 1)
    law1 = pair.law1
    assert len(law1) == 1
    assert abs(law1.values[0] - math.log(0.5)) < 1e-12
    assert pair.values[-1] == math.inf
    assert abs(pair.w0[pair.values == math.inf][0] - 0.5) < 1e-15


def test_base_pair_uninformative_channel():
    """eps = 1/2 gives a point mass at 0 under both root values."""
    pair = base_pair(symmetric_channel(0.5), 3)
    assert len(pair) == 1
    assert pair.values[0] == 0.0
    assert pair.w0[0] == 1.0 and pair.w1[0] == 1.0


def test_base_pair_matches_enumeration():
    rng = np.random.default_rng(21)
    for _ in range(20):
        c = make_channel(*random_channel(rng, 0.05, 0.95))
        for k in (1, 2, 3):
            assert_matches_oracle(base_pair(c, k), c, k, 1)


# ----------------------------------------------------------- one-step rules

def test_evolve_rows_equal_fixed_point():
    """Equal rows carry no information at any depth."""
    c = make_channel(0.7, 0.7)
    pair = evolve_to_depth(c, 2, 4)
    assert len(pair) == 1
    assert pair.values[0] == 0.0
    assert pair.w0[0] == 1.0 and pair.w1[0] == 1.0


def test_evolve_uninformative_fixed_point():
    pair = evolve_to_depth(symmetric_channel(0.5), 2, 5)
    assert len(pair) == 1 and pair.values[0] == 0.0


def test_evolve_depth_two_matches_enumeration():
    c = symmetric_channel(0.2)
    pair = evolve(base_pair(c, 2), c, 2)
    assert pair.depth == 2
    assert_matches_oracle(pair, c, 2, 2)


def test_evolution_matches_enumeration_grid():
    """Exact evolution equals full enumeration for k <= 2, depth <= 3."""
    rng = np.random.default_rng(22)
    channels = [symmetric_channel(0.2), make_channel(0.85, 0.35),
                hardcore_channel(1.0, 2)[0]]
    channels += [make_channel(*random_channel(rng, 0.05, 0.95)) for _ in range(5)]
    for c in channels:
        for k in (1, 2):
            pair = base_pair(c, k)
            for depth in (2, 3):
                pair = evolve(pair, c, k, exact_policy())
                assert_matches_oracle(pair, c, k, depth)


def test_evolution_matches_enumeration_k3():
    c = make_channel(0.75, 0.3)
    pair = evolve_to_depth(c, 3, 2, exact_policy())
    assert_matches_oracle(pair, c, 3, 2)


def test_posterior_matches_bayes_enumeration():
    """Posterior of the depth-2 law agrees with brute-force Bayes."""
    c = symmetric_channel(0.2)
    pair = evolve_to_depth(c, 2, 2, exact_policy())
    from treecast import posterior_from_llr
    post = posterior_from_llr(pair.values, c)
    # every enumerated leaf pattern's posterior must appear in the law
    for key in range(16):
        leaves = [(key >> j) & 1 for j in range(4)]
        target = brute_root_posterior(c, 2, 2, leaves)
        assert np.min(np.abs(post - target)) < 1e-10


# ------------------------------------------------------------- invariants

def test_weight_conservation_and_dominance():
    """Both weight vectors stay normalized and one-sided through depth."""
    rng = np.random.default_rng(23)
    for _ in range(10):
        c = make_channel(*random_channel(rng, 0.1, 0.9))
        pair = base_pair(c, 2)
        for _ in range(4):
            pair = evolve(pair, c, 2, exact_policy())
            assert abs(pair.w0.sum() - 1.0) < 1e-10
            assert abs(pair.w1.sum() - 1.0) < 1e-10
            assert pair.dominance_violation() < 1e-10


def test_martingale_mean_through_depth():
    """E[posterior] = pi0 at every depth under the stationary mixture."""
    for c in (symmetric_channel(0.3), make_channel(0.8, 0.3),
              hardcore_channel(0.8, 2)[0]):
        pair = base_pair(c, 2)
        for _ in range(4):
            pair = evolve(pair, c, 2, exact_policy())
            assert pair.posterior_mean_residual(c) < 1e-10


def test_tv_nonincreasing_subcritical():
    """Total variation decays monotonically below the threshold."""
    c = symmetric_channel(0.3)  # k*(1-2*eps)**2 = 0.32 < 1
    tvs = []
    evolve_to_depth(c, 2, 12, deep_policy(),
                    collect=lambda p: tvs.append(diagnostics(p, c)["tv"]))
    assert len(tvs) == 12
    assert all(b <= a + 1e-12 for a, b in zip(tvs, tvs[1:]))
    assert tvs[-1] < tvs[0]


def test_mean_gap_contracts_when_kernel_slope_small():
    """k * sup f' <= 1 forces a non-increasing mean gap."""
    from treecast import gap_kernel_peak
    exact_cases = [(symmetric_channel(0.33), 2, 5), (symmetric_channel(0.26), 1, 10),
                   (make_channel(0.62, 0.42), 2, 5)]
    for c, k, depth in exact_cases:
        assert k * gap_kernel_peak(c)[1] <= 1.0
        gaps = []
        evolve_to_depth(c, k, depth, exact_policy(),
                        collect=lambda p: gaps.append(mean_gap(p)))
        assert all(b <= a + 1e-10 for a, b in zip(gaps, gaps[1:]))
    # deeper horizon under the binned policy: same shape, merge-level slack
    gaps = []
    evolve_to_depth(symmetric_channel(0.33), 2, 10, deep_policy(),
                    collect=lambda p: gaps.append(mean_gap(p)))
    assert all(b <= a + 1e-6 for a, b in zip(gaps, gaps[1:]))


def test_mean_gap_special_values():
    assert mean_gap(evolve_to_depth(symmetric_channel(0.5), 2, 3)) == 0.0
    assert mean_gap(evolve_to_depth(make_channel(0.6, 0.6), 2, 2)) == 0.0
    c, _ = hardcore_channel(w_of_lambda(1.0, 2), 2)
    assert mean_gap(base_pair(c, 2)) == math.inf


def test_depth_recursion_identity():
    """Materialized mean gap equals k times the expected kernel value."""
    rng = np.random.default_rng(24)
    for _ in range(20):
        c = make_channel(*random_channel(rng, 0.1, 0.9))
        for k in (1, 2):
            prev = base_pair(c, k)
            for _ in range(2):
                nxt = evolve(prev, c, k, exact_policy())
                assert gap_identity_residual(nxt, prev, c, k) < 1e-9
                prev = nxt


def test_identity_degenerate_cases():
    c = symmetric_channel(0.5)
    prev = base_pair(c, 2)
    nxt = evolve(prev, c, 2)
    assert gap_identity_residual(nxt, prev, c, 2) == 0.0
    c = make_channel(0.7, 0.7)
    prev = base_pair(c, 2)
    nxt = evolve(prev, c, 2)
    assert gap_identity_residual(nxt, prev, c, 2) == 0.0
    with pytest.raises(InvalidParameter):
        gap_identity_residual(prev, nxt, c, 2)


def test_diagnostics_uninformative_all_zero():
    c = symmetric_channel(0.5)
    d = diagnostics(evolve_to_depth(c, 2, 4), c)
    assert d["tv"] == 0.0 and d["mean_gap"] == 0.0 and d["var_A"] == 0.0


def test_diagnostics_positive_when_informative():
    c = symmetric_channel(0.2)
    d = diagnostics(evolve_to_depth(c, 2, 3), c)
    assert 0.0 < d["tv"] <= 1.0
    assert d["mean_gap"] > 0.0
    assert 0.0 < d["var_A"] <= c.pi0 * c.pi1 + 1e-15


# ----------------------------------------------------------- resource caps

def test_atom_cap_raises():
    policy = PruningPolicy(merge_tol=1e-15, weight_floor=0.0,
                           atom_cap=10, pair_budget=1 << 25)
    c = make_channel(0.81, 0.27)
    with pytest.raises(AtomExplosion):
        evolve_to_depth(c, 2, 4, policy)


def test_pair_budget_raises_before_allocation():
    policy = PruningPolicy(merge_tol=1e-15, weight_floor=0.0,
                           atom_cap=1 << 40, pair_budget=50)
    c = make_channel(0.81, 0.27)
    with pytest.raises(AtomExplosion):
        evolve_to_depth(c, 2, 4, policy)


def test_depth_validation():
    with pytest.raises(InvalidParameter):
        evolve_to_depth(symmetric_channel(0.2), 2, 0)
    with pytest.raises(InvalidParameter):
        base_pair(symmetric_channel(0.2), 0)
