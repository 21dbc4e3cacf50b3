import math

import numpy as np
import pytest

from wzlab.errors import AllocationOverflow, DomainError, MetricUnderflow, MissingDataFile
from wzlab import polar
from wzlab.polar import (
    MODE_MAX,
    MODE_SAMPLE,
    PolarSpec,
    allocate_roles,
    fixed_vector,
    load_reliability,
    polar_transform,
    scl_process,
)


def codeword_penalty(u, llr):
    x = polar_transform(u)
    t = (2 * x - 1).astype(float) * llr
    return float(np.sum(np.maximum(t, 0) + np.log1p(np.exp(-np.abs(t)))))


def brute_force_best(llr, fixed):
    free = np.where(fixed < 0)[0]
    best_u, best_pen = None, np.inf
    for mask in range(1 << free.size):
        u = np.where(fixed >= 0, np.maximum(fixed, 0), 0).astype(np.int8)
        u[free] = [(mask >> i) & 1 for i in range(free.size)]
        pen = codeword_penalty(u, llr)
        if pen < best_pen - 1e-12:
            best_pen, best_u = pen, u.copy()
    return best_u, best_pen


class TestTransform:
    def test_n2(self):
        assert polar_transform([0, 0]).tolist() == [0, 0]
        assert polar_transform([1, 0]).tolist() == [1, 0]
        assert polar_transform([0, 1]).tolist() == [1, 1]
        assert polar_transform([1, 1]).tolist() == [0, 1]

    def test_involution(self):
        rng = np.random.default_rng(0)
        for n in (2, 8, 64, 256):
            u = rng.integers(0, 2, n).astype(np.int8)
            assert np.array_equal(polar_transform(polar_transform(u)), u)

    def test_last_unit_vector_gives_all_ones(self):
        u = np.zeros(8, dtype=np.int8)
        u[7] = 1
        assert polar_transform(u).tolist() == [1] * 8

    def test_matches_gf2_matrix_power(self):
        f = np.array([[1, 0], [1, 1]], dtype=np.int8)
        g = f
        for _ in range(2):  # n = 8
            g = np.kron(g, f) % 2
        rng = np.random.default_rng(1)
        for _ in range(20):
            u = rng.integers(0, 2, 8).astype(np.int8)
            assert np.array_equal(polar_transform(u), (u @ g) % 2)

    def test_batched(self):
        rng = np.random.default_rng(2)
        batch = rng.integers(0, 2, (5, 16)).astype(np.int8)
        out = polar_transform(batch)
        for row_in, row_out in zip(batch, out):
            assert np.array_equal(polar_transform(row_in), row_out)


class TestReliability:
    def test_permutation_and_top_channel(self):
        seq = load_reliability(256)
        assert sorted(seq.tolist()) == list(range(256))
        assert seq[0] == 255

    def test_restriction_property(self):
        full = load_reliability(256)
        sub = load_reliability(128)
        assert np.array_equal(sub, full[full < 128])

    def test_checksum_guard(self, monkeypatch):
        monkeypatch.setattr(polar, "RELIABILITY_SHA256", "0" * 64)
        with pytest.raises(MissingDataFile):
            load_reliability(256)

    def test_bad_length(self):
        with pytest.raises(DomainError):
            load_reliability(100)
        with pytest.raises(DomainError):
            load_reliability(2048)

    def test_density_evolution_agrees_on_extreme_channels(self):
        # Gaussian-approximation density evolution on a binary-input AWGN
        # channel: an independent construction that must rank position 255
        # (all plus-transforms) first and position 0 (all minus) last.
        n, m = 256, 8
        mu_ch = 4.0

        def phi(mu):
            if mu < 1e-12:
                return 1.0
            if mu < 10.0:
                return math.exp(-0.4527 * mu**0.86 + 0.0218)
            return math.sqrt(math.pi / mu) * math.exp(-mu / 4) * (1 - 10 / (7 * mu))

        def phi_inv(y):
            lo, hi = 1e-12, 1e7
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if phi(mid) > y:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        mus = np.empty(n)
        for i in range(n):
            mu = mu_ch
            for b in range(m - 1, -1, -1):  # MSB applied first (outermost split)
                if (i >> b) & 1:
                    mu = 2 * mu
                else:
                    p = phi(mu)
                    mu = phi_inv(p * (2.0 - p))  # 1-(1-p)^2 without cancellation
            mus[i] = mu
        order = np.argsort(-mus, kind="stable")
        assert order[0] == 255 and order[-1] == 0
        seq = load_reliability(n)
        assert seq[0] == 255 and seq[-1] == 0


class TestAllocation:
    def test_rate_one_no_frozen(self):
        spec = PolarSpec(n=256, list_size=8)
        alloc = allocate_roles(spec, [1.0], [0])
        lv = alloc.levels[0]
        assert lv.info_positions.size == 256
        assert lv.shaping_positions.size == 0
        assert lv.frozen_positions.size == 0

    def test_partition_random_splits(self):
        rng = np.random.default_rng(3)
        spec = PolarSpec(n=128, list_size=8)
        for _ in range(20):
            n_shape = int(rng.integers(0, 129))
            n_info = int(rng.integers(0, 129 - n_shape))
            alloc = allocate_roles(spec, [n_info / 128], [n_shape])
            lv = alloc.levels[0]
            all_pos = np.concatenate(
                [lv.shaping_positions, lv.info_positions, lv.frozen_positions]
            )
            assert sorted(all_pos.tolist()) == list(range(128))

    def test_shaping_gets_most_reliable(self):
        spec = PolarSpec(n=64, list_size=8)
        alloc = allocate_roles(spec, [0.25], [10])
        rel = spec.reliability
        assert set(alloc.levels[0].shaping_positions) == set(rel[:10])
        assert set(alloc.levels[0].info_positions) == set(rel[10:26])

    def test_overflow(self):
        spec = PolarSpec(n=64, list_size=8)
        with pytest.raises(AllocationOverflow):
            allocate_roles(spec, [1.0], [1])

    def test_paper_rate_one_total(self):
        spec = PolarSpec(n=256, list_size=8)
        alloc = allocate_roles(spec, [45 / 256, 170 / 256, 41 / 256], [0, 55, 215])
        assert sum(lv.info_positions.size for lv in alloc.levels) == 256


class TestListSearch:
    def test_all_frozen(self):
        spec = PolarSpec(n=8, list_size=8, reliability=np.arange(8))
        cands, pms, origins = scl_process(spec, np.zeros(8, dtype=np.int8), np.zeros(8))
        assert cands.shape == (1, 8) and not cands.any()

    def test_noiseless_rate_one(self):
        spec = PolarSpec(n=16, list_size=8, reliability=np.arange(16))
        rng = np.random.default_rng(4)
        u = rng.integers(0, 2, 16).astype(np.int8)
        llr = np.where(polar_transform(u) == 0, np.inf, -np.inf)
        cands, pms, _ = scl_process(spec, np.full(16, -1, dtype=np.int8), llr)
        assert np.array_equal(cands[0], u)
        assert pms[0] == 0.0

    def test_exhaustive_equals_brute_force(self):
        rng = np.random.default_rng(5)
        for trial in range(30):
            n = 16
            fixed = np.full(n, -1, dtype=np.int8)
            frozen = rng.choice(n, size=int(rng.integers(4, 12)), replace=False)
            fixed[frozen] = 0
            nfree = int((fixed < 0).sum())
            spec = PolarSpec(n=n, list_size=1 << nfree, reliability=np.arange(n))
            llr = rng.normal(0, 2.5, n)
            cands, pms, _ = scl_process(spec, fixed, llr, list_size=1 << nfree)
            best_u, best_pen = brute_force_best(llr, fixed)
            assert np.array_equal(cands[0], best_u), trial

    def test_small_list_matches_ml(self):
        # n=8, list 8, 4 free positions. When no frozen position follows the
        # last free one the list never prunes a live prefix (2^3 prefixes
        # before the final fork fit in the list), so list-8 search is exactly
        # ML; with interleaved frozen tails the equality is only typical.
        rng = np.random.default_rng(6)
        for trial in range(50):
            n = 8
            fixed = np.full(n, -1, dtype=np.int8)
            fixed[rng.choice(4, size=4, replace=False)] = 0  # frozen prefix only
            spec = PolarSpec(n=n, list_size=8, reliability=np.arange(n))
            llr = rng.normal(0, 2.5, n)
            cands, _, _ = scl_process(spec, fixed, llr)
            best_u, _ = brute_force_best(llr, fixed)
            assert np.array_equal(cands[0], best_u), trial
        # fully random frozen sets: mostly ML; pruning before trailing frozen
        # positions can drop the eventual winner, so only a high hit rate is
        # guaranteed empirically
        hits = 0
        for trial in range(50):
            fixed = np.full(8, -1, dtype=np.int8)
            fixed[rng.choice(8, size=4, replace=False)] = 0
            llr = rng.normal(0, 2.5, 8)
            spec = PolarSpec(n=8, list_size=8, reliability=np.arange(8))
            cands, _, _ = scl_process(spec, fixed, llr)
            best_u, _ = brute_force_best(llr, fixed)
            hits += int(np.array_equal(cands[0], best_u))
        assert hits >= 38

    def test_list_one_equals_sc(self):
        # successive cancellation: greedy decisions by decision-LLR sign
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = 32
            fixed = np.full(n, -1, dtype=np.int8)
            fixed[rng.choice(n, size=12, replace=False)] = 0
            llr = rng.normal(0, 2, n)
            spec = PolarSpec(n=n, list_size=1, reliability=np.arange(n))
            cands, _, _ = scl_process(spec, fixed, llr)
            assert cands.shape[0] == 1
            # with list 1 every free decision is locally greedy; re-running
            # with the winner pinned must reproduce the same metric
            pinned = cands[0].copy()
            cands2, pms2, _ = scl_process(spec, pinned, llr)
            assert np.array_equal(cands2[0], cands[0])

    def test_top_metric_improves_with_list_size(self):
        # Strict monotonicity in the list size is not a theorem (a greedy
        # SCL-1 path can be pruned from the SCL-2 candidate set before its
        # merit shows). What always holds: an exhaustive list attains the
        # minimum penalty of every smaller list. Across random instances the
        # adjacent-size violations must also stay rare.
        rng = np.random.default_rng(8)
        violations = 0
        pairs = 0
        for _ in range(16):
            n = 16
            fixed = np.full(n, -1, dtype=np.int8)
            fixed[rng.choice(n, size=6, replace=False)] = 0
            llr = rng.normal(0, 2, n)
            spec = PolarSpec(n=n, list_size=1, reliability=np.arange(n))
            tops = []
            for L in (1, 2, 4, 8, 16, 1 << 10):
                _, pms, _ = scl_process(spec, fixed, llr, list_size=L)
                tops.append(pms[0])
            assert tops[-1] <= min(tops) + 1e-12  # exhaustive list dominates
            for a, b in zip(tops, tops[1:]):
                pairs += 1
                violations += int(b > a + 1e-12)
        # measured ~7% adjacent-size violations on random instances
        assert violations <= pairs // 8

    def test_sample_mode_uniform_bits(self):
        from scipy import stats

        n = 64
        spec = PolarSpec(n=n, list_size=8, reliability=np.arange(n))
        fixed = np.full(n, -1, dtype=np.int8)
        rng = np.random.default_rng(9)
        reps = 1600
        ones = np.zeros(n)
        for _ in range(reps):
            cands, _, _ = scl_process(
                spec, fixed, np.zeros(n), mode=MODE_SAMPLE, rand=rng.random((1, n))
            )
            ones += cands[0]
        # ~ Binomial(reps, 1/2) per position
        z = (ones - reps / 2) / np.sqrt(reps / 4)
        chi2 = float((z**2).sum())
        assert chi2 < stats.chi2.ppf(0.9999, df=n)

    def test_metric_underflow(self):
        spec = PolarSpec(n=4, list_size=4, reliability=np.arange(4))
        # frozen zeros contradicted by infinitely confident ones
        llr = np.full(4, -np.inf)
        with pytest.raises(MetricUnderflow):
            scl_process(spec, np.zeros(4, dtype=np.int8), llr)

    def test_list_passing_prior_metrics(self):
        # candidates entering with prior penalties keep their handicap
        spec = PolarSpec(n=8, list_size=4, reliability=np.arange(8))
        llr = np.zeros((2, 8))
        fixed = np.zeros(8, dtype=np.int8)
        _, pms, origins = scl_process(
            spec, fixed, llr, prior_metrics=np.array([0.0, 100.0])
        )
        assert origins.tolist() == [0, 1]
        assert pms[1] - pms[0] == pytest.approx(100.0)

    def test_kernel_matches_fallback(self):
        from wzlab.polar import _kernel_py, _sclcore

        if _sclcore is None:
            pytest.skip("compiled kernel unavailable")
        rng = np.random.default_rng(10)
        for _ in range(40):
            n = int(2 ** rng.integers(2, 7))
            p0 = int(rng.integers(1, 4))
            L = max(p0, int(rng.integers(1, 12)))
            llrs = rng.normal(0, 3, (p0, n))
            pm0 = np.abs(rng.normal(0, 1, p0))
            fixed = np.full(n, -1, dtype=np.int8)
            k = int(rng.integers(0, n))
            fixed[rng.choice(n, size=k, replace=False)] = rng.integers(0, 2, k)
            u1, m1, o1 = _kernel_py.scl_pass(llrs, pm0, fixed, L, MODE_MAX)
            u2, m2, o2 = _sclcore.scl_pass(llrs, pm0, fixed, L, MODE_MAX)
            assert np.array_equal(u1, u2)
            assert np.array_equal(o1, o2)
            assert np.allclose(m1, m2, rtol=1e-10, atol=1e-12)


class TestSpecValidation:
    def test_spec_rejects_bad_n(self):
        with pytest.raises(DomainError):
            PolarSpec(n=100, list_size=8)

    def test_spec_rejects_bad_reliability(self):
        with pytest.raises(DomainError):
            PolarSpec(n=8, list_size=8, reliability=np.zeros(8, dtype=int))

    def test_fixed_vector_roles(self):
        spec = PolarSpec(n=16, list_size=8, reliability=np.arange(16))
        alloc = allocate_roles(spec, [4 / 16], [3])
        fx = fixed_vector(spec, alloc.levels[0])
        assert (fx[alloc.levels[0].frozen_positions] == 0).all()
        assert (fx[alloc.levels[0].shaping_positions] == -1).all()
        assert (fx[alloc.levels[0].info_positions] == -1).all()
        bits = np.ones(4, dtype=np.int8)
        fx2 = fixed_vector(spec, alloc.levels[0], info_bits=bits)
        assert (fx2[alloc.levels[0].info_positions] == 1).all()
