import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import csr_as_dict, random_csr
from maskmul.multiply import (ALGORITHMS, MultiplyPlan, PlanError,
                              flops_of, inner_product_multiply, masked_multiply,
                              masked_multiply_with_stats, one_phase_multiply,
                              symbolic_phase, two_phase_multiply)
from maskmul.semiring import arithmetic_semiring
from maskmul.sparse import MaskView, SparseError, from_arrays, from_triples, to_csc
from oracles import dense_masked_product, dense_to_csr_dict

SR = arithmetic_semiring(np.int64)


def plans_for(comp, **kw):
    algos = [a for a in ALGORITHMS
             if not (comp and a in ("mca", "inner"))]
    return [MultiplyPlan(algorithm=a, phases=ph, complemented=comp,
                         semiring=SR, **kw)
            for a in algos for ph in ("1p", "2p")]


def check_instance(mask_matrix, a, b, comp, **kw):
    keep, values = dense_masked_product(mask_matrix.to_dense() != 0,
                                        a.to_dense(), b.to_dense(), comp)
    want = dense_to_csr_dict(keep, values)
    outputs = []
    for plan in plans_for(comp, **kw):
        c = masked_multiply(mask_matrix.pattern(), a, b, plan)
        assert csr_as_dict(c) == want, plan.label()
        outputs.append((c.row_ptr.tobytes(), c.col_idx.tobytes(), c.values.tobytes()))
    assert len(set(outputs)) == 1  # bitwise cross-plan agreement
    return want


class TestOracleEquivalence:
    def test_random_instances(self, rng):
        for _ in range(25):
            m = int(rng.integers(1, 48))
            k = int(rng.integers(1, 48))
            n = int(rng.integers(1, 48))
            a = random_csr(rng, m, k, float(rng.integers(1, 5)))
            b = random_csr(rng, k, n, float(rng.integers(1, 5)))
            mm = random_csr(rng, m, n, float(rng.integers(1, 5)))
            check_instance(mm, a, b, bool(rng.integers(0, 2)))

    def test_empty_mask_gives_empty_output(self, rng):
        a = random_csr(rng, 10, 10, 3)
        b = random_csr(rng, 10, 10, 3)
        empty = from_triples(10, 10, [])
        for plan in plans_for(False):
            assert masked_multiply(empty.pattern(), a, b, plan).nnz == 0

    def test_full_mask_is_plain_product(self, rng):
        a = random_csr(rng, 32, 32, 4)
        b = random_csr(rng, 32, 32, 4)
        want = a.to_dense() @ b.to_dense()
        for plan in plans_for(False):
            c = masked_multiply(MaskView.full(32, 32), a, b, plan)
            assert np.array_equal(c.to_dense(), want), plan.label()

    def test_mask_entries_without_product_absent(self):
        # the mask may allow entries the multiplication never produces
        a = from_triples(2, 2, [(0, 0, 1)])
        b = from_triples(2, 2, [(0, 0, 1)])
        mask = from_triples(2, 2, [(0, 0, 1), (1, 1, 1)]).pattern()
        for plan in plans_for(False):
            c = masked_multiply(mask, a, b, plan)
            assert csr_as_dict(c) == {(0, 0): 1}

    def test_cancellation_zero_is_stored(self):
        a = from_triples(1, 2, [(0, 0, 1), (0, 1, -1)])
        b = from_triples(2, 1, [(0, 0, 5), (1, 0, 5)])
        mask = MaskView.full(1, 1)
        for plan in plans_for(False):
            c = masked_multiply(mask, a, b, plan)
            assert c.nnz == 1
            assert c.values[0] == 0


class TestInner:
    def test_disjoint_rows_empty(self):
        a = from_triples(1, 4, [(0, 0, 1), (0, 2, 1)])
        b = from_triples(4, 1, [(1, 0, 1), (3, 0, 1)])
        mask = MaskView.full(1, 1)
        c = inner_product_multiply(mask, a, to_csc(b), SR)
        assert c.nnz == 0

    def test_identity_a_restricts_to_b(self, rng):
        b = random_csr(rng, 8, 8, 3)
        eye = from_triples(8, 8, [(i, i, 1) for i in range(8)])
        c = inner_product_multiply(b.pattern(), eye, to_csc(b), SR)
        assert c.equals(b)

    def test_matches_msa(self, rng):
        a = random_csr(rng, 64, 64, 8)
        b = random_csr(rng, 64, 64, 8)
        mask = random_csr(rng, 64, 64, 8).pattern()
        c_inner = inner_product_multiply(mask, a, b, SR)
        c_msa = masked_multiply(mask, a, b, MultiplyPlan(semiring=SR))
        assert c_inner.equals(c_msa)

    def test_complement_rejected(self):
        with pytest.raises(PlanError):
            MultiplyPlan(algorithm="inner", complemented=True)
        a = from_triples(2, 2, [(0, 0, 1)])
        with pytest.raises(PlanError):
            masked_multiply(a.pattern(complemented=True), a, a,
                            MultiplyPlan(algorithm="inner", semiring=SR))


class TestFloatSemiring:
    def test_float64_matches_dense_within_roundoff(self, rng):
        sem = arithmetic_semiring(np.float64)
        for _ in range(10):
            a = random_csr(rng, 24, 24, 3).astype(np.float64)
            a.values[:] = rng.standard_normal(a.nnz)
            b = random_csr(rng, 24, 24, 3).astype(np.float64)
            b.values[:] = rng.standard_normal(b.nnz)
            mask = random_csr(rng, 24, 24, 4).pattern()
            comp = bool(rng.integers(0, 2))
            algos = [x for x in ALGORITHMS if not (comp and x in ("mca", "inner"))]
            base = None
            for algo in algos:
                plan = MultiplyPlan(algorithm=algo, complemented=comp, semiring=sem)
                c = masked_multiply(mask, a, b, plan)
                got = csr_as_dict(c)
                if base is None:
                    base = got
                    want = a.to_dense() @ b.to_dense()
                    for (i, j), v in got.items():
                        assert v == pytest.approx(want[i, j], rel=1e-12, abs=1e-12)
                else:
                    # per-row accumulation order is fixed per algorithm, and
                    # identical column-major merge orders make msa/hash/mca/heap
                    # agree bitwise; float comparisons still use equality here
                    assert set(got) == set(base)
                    for key, v in got.items():
                        assert v == pytest.approx(base[key], rel=1e-12)


class TestHashComplementCapacity:
    def test_wide_mask_row_tiny_flops(self):
        # one row with a large mask and a single product: the table must
        # hold every NOT-ALLOWED mark without overflowing
        n = 400
        mask = from_triples(1, n, [(0, j, 1) for j in range(0, n, 2)]).pattern()
        a = from_triples(1, 1, [(0, 0, 2)])
        b = from_triples(1, n, [(0, 1, 3)])  # column 1 is outside the mask
        for comp, want in ((False, {}), (True, {(0, 1): 6})):
            plan = MultiplyPlan(algorithm="hash", complemented=comp, semiring=SR)
            c = masked_multiply(mask, a, b, plan)
            assert csr_as_dict(c) == want

    def test_zero_flop_rows_short_circuit(self):
        n = 64
        mask = from_triples(2, n, [(0, j, 1) for j in range(n)]).pattern()
        a = from_triples(2, 2, [(0, 0, 1)])
        b = from_triples(2, n, [])
        plan = MultiplyPlan(algorithm="hash", complemented=True, semiring=SR)
        assert masked_multiply(mask, a, b, plan).nnz == 0


class TestOperandFormats:
    def test_csc_b_accepted_by_push_algorithms(self, rng):
        a = random_csr(rng, 12, 12, 3)
        b = random_csr(rng, 12, 12, 3)
        mask = random_csr(rng, 12, 12, 3).pattern()
        want = masked_multiply(mask, a, b, MultiplyPlan(semiring=SR))
        for algo in ("msa", "hash", "mca", "heap", "heapdot"):
            c = masked_multiply(mask, a, to_csc(b),
                                MultiplyPlan(algorithm=algo, semiring=SR))
            assert c.equals(want), algo

    def test_csr_b_accepted_by_inner(self, rng):
        a = random_csr(rng, 12, 12, 3)
        b = random_csr(rng, 12, 12, 3)
        mask = random_csr(rng, 12, 12, 3).pattern()
        want = masked_multiply(mask, a, b, MultiplyPlan(semiring=SR))
        c = masked_multiply(mask, a, b, MultiplyPlan(algorithm="inner", semiring=SR))
        assert c.equals(want)


class TestSymbolic:
    def test_full_mask_identity_squared(self):
        eye = from_triples(4, 4, [(i, i, 1) for i in range(4)])
        counts = symbolic_phase(MaskView.full(4, 4), eye, eye,
                                MultiplyPlan(semiring=SR))
        assert counts.tolist() == [1, 1, 1, 1]

    def test_empty_a_all_zero(self, rng):
        b = random_csr(rng, 6, 6, 2)
        empty = from_triples(6, 6, [])
        counts = symbolic_phase(MaskView.full(6, 6), empty, b,
                                MultiplyPlan(semiring=SR))
        assert counts.tolist() == [0] * 6

    def test_counts_match_numeric(self, rng):
        for comp in (False, True):
            a = random_csr(rng, 30, 30, 3)
            b = random_csr(rng, 30, 30, 3)
            mask = random_csr(rng, 30, 30, 4).pattern()
            for plan in plans_for(comp):
                counts = symbolic_phase(mask, a, b, plan)
                c = masked_multiply(mask, a, b, plan)
                assert np.array_equal(counts, np.diff(c.row_ptr)), plan.label()


class TestPhases:
    def test_one_phase_row_bounds(self, rng):
        a = random_csr(rng, 40, 40, 4)
        b = random_csr(rng, 40, 40, 4)
        mask = random_csr(rng, 40, 40, 3)
        c = one_phase_multiply(mask.pattern(), a, b, MultiplyPlan(semiring=SR))
        assert np.all(np.diff(c.row_ptr) <= mask.row_lengths())
        c2 = one_phase_multiply(mask.pattern(), a, b,
                                MultiplyPlan(semiring=SR, complemented=True))
        from maskmul.multiply import flops_per_row
        bound = np.minimum(flops_per_row(a, b.row_lengths()), 40)
        assert np.all(np.diff(c2.row_ptr) <= bound)

    def test_phase_agreement_bitwise(self, rng):
        for _ in range(20):
            a = random_csr(rng, 24, 24, 3)
            b = random_csr(rng, 24, 24, 3)
            mask = random_csr(rng, 24, 24, 3).pattern()
            comp = bool(rng.integers(0, 2))
            algos = [x for x in ALGORITHMS if not (comp and x in ("mca", "inner"))]
            for algo in algos:
                p = MultiplyPlan(algorithm=algo, complemented=comp, semiring=SR)
                c1 = one_phase_multiply(mask, a, b, p)
                c2 = two_phase_multiply(mask, a, b, p)
                assert c1.equals(c2), algo

    def test_two_phase_exact_allocation(self, rng):
        a = random_csr(rng, 30, 30, 3)
        b = random_csr(rng, 30, 30, 3)
        mask = random_csr(rng, 30, 30, 3).pattern()
        plan = MultiplyPlan(phases="2p", semiring=SR)
        counts = symbolic_phase(mask, a, b, plan)
        c = two_phase_multiply(mask, a, b, plan)
        assert c.nnz == int(counts.sum())  # no slack
        assert c.col_idx.shape[0] == c.nnz
        assert c.values.shape[0] == c.nnz

    def test_empty_mask_zero_allocation(self):
        a = from_triples(5, 5, [(0, 0, 1)])
        empty = from_triples(5, 5, []).pattern()
        c, st = masked_multiply_with_stats(empty, a, a,
                                           MultiplyPlan(phases="2p", semiring=SR))
        assert c.nnz == 0 and st.output_nnz == 0


class TestDeterminismAndCounters:
    def test_worker_counts_bitwise_identical(self, rng):
        a = random_csr(rng, 60, 60, 4)
        b = random_csr(rng, 60, 60, 4)
        mask = random_csr(rng, 60, 60, 4).pattern()
        for algo in ALGORITHMS:
            base = None
            for workers, grain in ((1, 64), (2, 8), (4, 3), (3, 1)):
                plan = MultiplyPlan(algorithm=algo, semiring=SR,
                                    workers=workers, grain=grain)
                c, stats = masked_multiply_with_stats(mask, a, b, plan)
                sig = (c.row_ptr.tobytes(), c.col_idx.tobytes(),
                       c.values.tobytes(), stats.evaluated_multiplies,
                       stats.generated_flops)
                if base is None:
                    base = sig
                else:
                    assert sig == base, (algo, workers, grain)

    def test_evaluated_le_generated(self, rng):
        a = random_csr(rng, 30, 30, 4)
        b = random_csr(rng, 30, 30, 4)
        mask = random_csr(rng, 30, 30, 2).pattern()
        for plan in plans_for(False) + plans_for(True):
            _, stats = masked_multiply_with_stats(mask, a, b, plan)
            assert stats.evaluated_multiplies <= stats.generated_flops
            assert stats.generated_flops == flops_of(a, b)

    def test_strictly_fewer_when_mask_excludes(self):
        # row 0 of A touches columns {0, 1} of B; the mask allows only 0
        a = from_triples(1, 1, [(0, 0, 2)])
        b = from_triples(1, 2, [(0, 0, 3), (0, 1, 4)])
        mask = from_triples(1, 2, [(0, 0, 1)]).pattern()
        for algo in ("msa", "hash", "heapdot", "mca"):
            plan = MultiplyPlan(algorithm=algo, semiring=SR)
            _, stats = masked_multiply_with_stats(mask, a, b, plan)
            assert stats.evaluated_multiplies < stats.generated_flops, algo

    def test_heap_ninspect_zero_evaluates_all(self):
        a = from_triples(1, 1, [(0, 0, 2)])
        b = from_triples(1, 2, [(0, 0, 3), (0, 1, 4)])
        mask = from_triples(1, 2, [(0, 0, 1)]).pattern()
        plan = MultiplyPlan(algorithm="heap", n_inspect=0, semiring=SR)
        _, stats = masked_multiply_with_stats(mask, a, b, plan)
        # with no inspection every popped product in the mask range evaluates
        assert stats.evaluated_multiplies == 1


class TestPlanValidation:
    def test_bad_fields(self):
        with pytest.raises(PlanError):
            MultiplyPlan(algorithm="spa")
        with pytest.raises(PlanError):
            MultiplyPlan(phases="3p")
        with pytest.raises(PlanError):
            MultiplyPlan(workers=0)
        with pytest.raises(PlanError):
            MultiplyPlan(n_inspect=2)
        with pytest.raises(PlanError):
            MultiplyPlan(algorithm="mca", complemented=True)

    def test_dimension_mismatch(self):
        a = from_triples(2, 3, [])
        b = from_triples(4, 2, [])
        mask = from_triples(2, 2, []).pattern()
        with pytest.raises(SparseError):
            masked_multiply(mask, a, b, MultiplyPlan(semiring=SR))

    def test_labels(self):
        assert MultiplyPlan(algorithm="msa").label() == "MSA-1P"
        assert MultiplyPlan(algorithm="heapdot", phases="2p").label() == "HeapDot-2P"
        assert MultiplyPlan(algorithm="heap").effective_n_inspect == 1
        assert MultiplyPlan(algorithm="heapdot").effective_n_inspect == math.inf


@st.composite
def small_multiply(draw):
    m = draw(st.integers(1, 10))
    k = draw(st.integers(1, 10))
    n = draw(st.integers(1, 10))
    def entries(rows, cols):
        return st.lists(st.tuples(st.integers(0, rows - 1),
                                  st.integers(0, cols - 1),
                                  st.integers(-4, 4).filter(lambda v: v != 0)),
                        max_size=25)
    return (m, k, n, draw(entries(m, k)), draw(entries(k, n)),
            draw(entries(m, n)), draw(st.booleans()))


class TestProperties:
    @given(small_multiply())
    @settings(max_examples=80, deadline=None)
    def test_pattern_containment(self, inst):
        m, k, n, ae, be, me, comp = inst
        a = from_triples(m, k, ae)
        b = from_triples(k, n, be)
        mask_matrix = from_triples(m, n, me)
        mask_set = set(csr_as_dict(mask_matrix))
        algos = [x for x in ALGORITHMS if not (comp and x in ("mca", "inner"))]
        for algo in algos:
            plan = MultiplyPlan(algorithm=algo, complemented=comp, semiring=SR)
            got = set(csr_as_dict(masked_multiply(mask_matrix.pattern(), a, b, plan)))
            if comp:
                assert got.isdisjoint(mask_set)
            else:
                assert got <= mask_set
