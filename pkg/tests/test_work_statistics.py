import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeezecycle.closed_forms import squeezing_universal, vacuum_cumulants
from squeezecycle.errors import CapacityError, DomainError, PrecisionError
from squeezecycle.gaussian_dynamics import ThermalSpec
from squeezecycle.overlaps import overlap_matrix, squeezed_number_overlap
from squeezecycle.work_statistics import (
    crooks_deviation, cumulants_from_distribution, distribution_json, negative_work_probability,
    skewness, work_distribution, write_distribution_csv)

from oracles import squeeze_populations_expm

S_R1 = squeezing_universal(0.5, 1.0)


class TestOverlap:
    def test_vacuum_elements(self):
        assert squeezed_number_overlap(0, 0, S_R1) == pytest.approx(0.8660254037844386, rel=1e-13)
        assert squeezed_number_overlap(0, 2, S_R1) == pytest.approx(0.10825317547305482, rel=1e-13)

    def test_parity(self):
        assert squeezed_number_overlap(1, 2, 0.7) == 0.0
        assert squeezed_number_overlap(3, 0, 0.7) == 0.0

    def test_identity(self):
        assert squeezed_number_overlap(5, 5, 0.0) == 1.0
        assert squeezed_number_overlap(5, 7, 0.0) == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            squeezed_number_overlap(-1, 0, 0.5)
        with pytest.raises(DomainError):
            squeezed_number_overlap(0, 0, -0.5)

    @pytest.mark.parametrize("s", [0.1, 0.549306144334055, 1.0])
    def test_series_against_matrix_exponential(self, s):
        ref = squeeze_populations_expm(s)
        for n in range(0, 41, 3):
            for m in range(n % 2, 41, 2):
                assert squeezed_number_overlap(n, m, s) == pytest.approx(ref[n, m], rel=1e-9, abs=1e-15)

    @pytest.mark.parametrize("s", [0.1, 0.549306144334055, 1.0])
    def test_block_against_matrix_exponential(self, s):
        ref = squeeze_populations_expm(s)
        assert np.max(np.abs(overlap_matrix(s, 40, 40) - ref[:41, :41])) < 1e-12

    def test_row_sums(self):
        block, tails = overlap_matrix(0.8, 10, 300, with_tails=True)
        assert np.max(np.abs(block.sum(axis=1) + tails - 1.0)) < 1e-12
        for n in range(11):
            assert math.fsum(squeezed_number_overlap(n, m, 0.8) for m in range(300)) == pytest.approx(1.0, abs=1e-10)

    def test_large_index_cancellation(self):
        # the alternating series cancels badly here; block and series must still agree
        block = overlap_matrix(1.0, 150, 400)
        for m in (0, 50, 150, 152, 300):
            assert squeezed_number_overlap(150, m, 1.0) == pytest.approx(block[150, m], rel=1e-8, abs=1e-300)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 60), st.integers(0, 60), st.floats(0.01, 1.5))
    def test_symmetry(self, n, m, s):
        a = squeezed_number_overlap(n, m, s)
        b = squeezed_number_overlap(m, n, s)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-300)


class TestDistribution:
    def test_vacuum_r1(self):
        wd = work_distribution(ThermalSpec.vacuum(), S_R1)
        assert wd.probability(0) == pytest.approx(0.8660254037844386, rel=1e-12)
        assert wd.probability(1) == pytest.approx(0.10825317547305482, rel=1e-12)
        assert wd.probability(2) == pytest.approx(0.020297470401197776, rel=1e-12)
        assert wd.probability_at(4) == wd.probability(2)
        assert wd.probability_at(3) == 0.0
        assert negative_work_probability(wd) == 0.0

    @pytest.mark.parametrize("n", [0.0, 1.0, 2.0])
    def test_mean(self, n):
        for s in (0.3, S_R1, 1.2):
            wd = work_distribution(ThermalSpec.from_occupation(n), s)
            k1 = cumulants_from_distribution(wd, 1)[0]
            assert k1 == pytest.approx((2 * n + 1) * math.sinh(s) ** 2, abs=1e-8 * (1 + k1))

    def test_crooks_ln2(self):
        wd = work_distribution(ThermalSpec.from_occupation(1.0), 0.7)
        assert wd.probability(-1) / wd.probability(1) == pytest.approx(0.25, rel=1e-8)
        assert crooks_deviation(wd) < 1e-8

    def test_vacuum_cumulants(self):
        wd = work_distribution(ThermalSpec.vacuum(), S_R1)
        k = cumulants_from_distribution(wd, 3)
        assert k == pytest.approx([1 / 3, 8 / 9, 80 / 27], abs=1e-6)
        assert skewness(wd) == pytest.approx(3.5355339, abs=1e-4)

    def test_zero_squeezing(self):
        wd = work_distribution(ThermalSpec.from_occupation(1.0), 0.0)
        assert cumulants_from_distribution(wd, 3) == [0.0, 0.0, 0.0]
        assert wd.probability(0) == pytest.approx(1.0, abs=1e-10)

    def test_thermal_r2_mean(self):
        wd = work_distribution(ThermalSpec.from_occupation(1.0), squeezing_universal(0.5, 2.0))
        assert cumulants_from_distribution(wd, 1)[0] == pytest.approx(3.0, abs=1e-6)

    def test_variance_gaussian_oracle(self):
        # vacuum variance closed form 2 cosh^2 sinh^2
        for s in (0.2, 0.9, 1.4):
            wd = work_distribution(ThermalSpec.vacuum(), s)
            assert cumulants_from_distribution(wd, 2)[1] == pytest.approx(vacuum_cumulants(s)[1], rel=1e-6)

    def test_tail_precision_guard(self):
        wd = work_distribution(ThermalSpec.from_occupation(4.0), 1.0, eps_tail=1e-6)
        with pytest.raises(PrecisionError):
            cumulants_from_distribution(wd, 4, tol=1e-12)

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            work_distribution(ThermalSpec.vacuum(), 0.5, eps_tail=1e-3)
        with pytest.raises(DomainError):
            cumulants_from_distribution(work_distribution(ThermalSpec.vacuum(), 0.5), 5)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            work_distribution(ThermalSpec.from_occupation(100.0), 1.0, cap=4000)

    def test_immutable(self):
        wd = work_distribution(ThermalSpec.vacuum(), 0.5)
        with pytest.raises(ValueError):
            wd.values[0] = 1.0

    def test_export(self, tmp_path):
        wd = work_distribution(ThermalSpec.from_occupation(1.0), 0.5)
        path = tmp_path / "wd.csv"
        write_distribution_csv(path, wd)
        lines = path.read_text().splitlines()
        assert lines[0] == "k,W_over_omega,probability"
        assert len(lines) == wd.values.size + 1
        blob = json.loads(json.dumps(distribution_json(wd, r=1.0)))
        assert blob["tail_mass"] == wd.tail_mass and blob["r"] == 1.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 16.0), st.floats(0.0, 1.5))
def test_distribution_invariants(n, s):
    th = ThermalSpec.from_occupation(n)
    wd = work_distribution(th, s)
    assert np.all(wd.values >= 0)
    assert abs(wd.total() + wd.tail_mass - 1.0) <= 1e-12
    assert wd.tail_mass <= 1e-10
    assert all(wd.probability_at(2 * k + 1) == 0.0 for k in range(-5, 5))
    assert crooks_deviation(wd) < 1e-8
    if th.is_vacuum:
        assert negative_work_probability(wd) == 0.0


def _argmax_r(n):
    rs = np.arange(0.1, 4.0001, 0.05)
    pv = [negative_work_probability(work_distribution(ThermalSpec.from_occupation(n),
                                                      squeezing_universal(0.5, r))) for r in rs]
    return rs[int(np.argmax(pv))]


@pytest.mark.slow
def test_negative_work_argmax_trend():
    peaks = [_argmax_r(n) for n in (2.0, 4.0, 8.0, 16.0)]
    assert all(a >= b for a, b in zip(peaks, peaks[1:]))
    assert peaks[0] == pytest.approx(1.2, abs=0.2)
    assert peaks[-1] == pytest.approx(0.5, abs=0.2)
