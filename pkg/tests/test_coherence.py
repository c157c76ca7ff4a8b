import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeezecycle.closed_forms import squeezing_universal, w_irr_universal
from squeezecycle.coherence import (
    closed_form_populations, coherence_entropy, coherence_ratio, dephased_populations,
    entropy_split, population_relative_entropy, thermal_von_neumann, write_sweep_csv)
from squeezecycle.errors import DomainError
from squeezecycle.gaussian_dynamics import ThermalSpec

from oracles import shannon, squeeze_populations_expm, squeezed_vacuum_even

S_R1 = squeezing_universal(0.5, 1.0)
GRID = [(n, r) for n in (0.5, 1.0, 2.0, 4.0) for r in (0.5, 1.0, 2.0, 4.0)]


@pytest.mark.parametrize("n, expected", [
    (0.0, 0.0), (1.0, 2 * math.log(2)), (4.0, 5 * math.log(5) - 4 * math.log(4))])
def test_thermal_entropy(n, expected):
    assert thermal_von_neumann(ThermalSpec.from_occupation(n)) == pytest.approx(expected, rel=1e-14)


def test_thermal_entropy_beta_form():
    # same value written as beta omega e^{beta omega} N + ln N
    for bw in (0.1, 1.0, 3.0):
        th = ThermalSpec.from_beta(bw)
        alt = bw * math.exp(bw) * th.n_beta + math.log(th.n_beta)
        assert thermal_von_neumann(th) == pytest.approx(alt, rel=1e-12)


class TestPopulations:
    def test_vacuum(self):
        pops = dephased_populations(ThermalSpec.vacuum(), S_R1)
        assert pops.probs[0] == pytest.approx(math.sqrt(3) / 2, rel=1e-13)
        assert np.all(pops.probs[1::2] == 0.0)
        for n in range(0, 20):
            assert pops.probs[2 * n] == pytest.approx(squeezed_vacuum_even(S_R1, n), rel=1e-11)

    def test_no_squeezing(self):
        th = ThermalSpec.from_occupation(1.0)
        pops = dephased_populations(th, 0.0)
        assert pops.probs[:30] == pytest.approx(th.populations(29), rel=1e-13)

    def test_against_matrix_exponential(self):
        th = ThermalSpec.from_occupation(1.0)
        ref = th.populations(199) @ squeeze_populations_expm(S_R1)
        pops = dephased_populations(th, S_R1)
        assert np.max(np.abs(pops.probs[:60] - ref[:60])) < 1e-13

    def test_route_agreement_grid(self):
        for n, r in GRID:
            th = ThermalSpec.from_occupation(n)
            pops = dephased_populations(th, squeezing_universal(0.5, r), check=False)
            alt = closed_form_populations(th, pops.squeeze_amp, pops.probs.size - 1)
            assert np.max(np.abs(alt - pops.probs)) < 1e-8

    def test_normalization_and_mean(self):
        th = ThermalSpec.from_occupation(2.0)
        pops = dephased_populations(th, 0.9)
        assert abs(math.fsum(pops.probs) + pops.tail_mass - 1.0) < 1e-12
        assert pops.mean() == pytest.approx(5.0 * math.sinh(0.9) ** 2 + 2.0, rel=1e-10)

    def test_bad_tail(self):
        with pytest.raises(DomainError):
            dephased_populations(ThermalSpec.vacuum(), 0.5, eps_tail=0.01)


class TestSplit:
    def test_vacuum_coherence_is_shannon(self):
        c = coherence_entropy(ThermalSpec.vacuum(), S_R1)
        assert c == pytest.approx(shannon([squeezed_vacuum_even(S_R1, n) for n in range(400)]), abs=1e-10)
        assert population_relative_entropy(ThermalSpec.vacuum(), S_R1) == math.inf

    def test_vacuum_coherence_grows(self):
        cs = [coherence_entropy(ThermalSpec.vacuum(), squeezing_universal(0.5, r)) for r in (1, 2, 4)]
        assert 0 < cs[0] < cs[1] < cs[2] < math.inf

    def test_zero_squeezing(self):
        th = ThermalSpec.from_occupation(1.0)
        assert coherence_entropy(th, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert population_relative_entropy(th, 0.0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("r, expected", [(1.0, math.log(2)), (2.0, 3 * math.log(2))])
    def test_closure_examples(self, r, expected):
        split = entropy_split(ThermalSpec.from_occupation(1.0), squeezing_universal(0.5, r))
        assert split.coherence + split.population == pytest.approx(expected, abs=1e-6)

    def test_closure_grid(self):
        for n, r in GRID:
            th = ThermalSpec.from_occupation(n)
            split = entropy_split(th, squeezing_universal(0.5, r))
            target = th.beta_omega * w_irr_universal(th.beta_omega, 0.5, r)
            assert split.coherence + split.population == pytest.approx(target, abs=1e-6)
            assert split.coherence >= 0 and split.population >= 0
            assert 0 < split.ratio < 1

    def test_small_drive_high_temperature(self):
        r = 0.05
        c = coherence_entropy(ThermalSpec.from_beta(0.01), squeezing_universal(0.5, r))
        assert c == pytest.approx(math.pi**2 * (0.5 * r) ** 2 / 2, rel=0.1)

    def test_ratio_limits(self):
        assert coherence_ratio(ThermalSpec.vacuum(), S_R1) == 0.0
        assert coherence_ratio(ThermalSpec.from_beta(0.01), squeezing_universal(0.5, 0.05)) > 0.99
        # cold limit: C tends to its vacuum value while <S_irr> grows like beta omega
        c_vac = coherence_entropy(ThermalSpec.vacuum(), S_R1)
        ratios = [coherence_ratio(ThermalSpec.from_beta(bw), S_R1) for bw in (5.0, 20.0, 80.0)]
        assert ratios[0] > ratios[1] > ratios[2]
        assert ratios[2] == pytest.approx(c_vac / (80.0 * math.sinh(S_R1) ** 2), rel=1e-6)
        with pytest.raises(DomainError):
            coherence_ratio(ThermalSpec.from_occupation(1.0), 0.0)

    def test_ratio_matches_split(self):
        th = ThermalSpec.from_occupation(1.0)
        split = entropy_split(th, S_R1)
        assert coherence_ratio(th, S_R1) == pytest.approx(split.coherence / (split.coherence + split.population),
                                                          rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 8.0), st.floats(0.0, 1.5))
def test_split_invariants(n, s):
    th = ThermalSpec.from_occupation(n)
    split = entropy_split(th, s)
    assert split.coherence >= 0 and split.population >= 0
    assert split.coherence + split.population == pytest.approx(split.s_irr, abs=1e-6)


def test_sweep_csv(tmp_path):
    row = dict(n_beta=1.0, beta_omega=math.log(2), r=1.0, s=S_R1, C=0.4, D=0.3, S_irr=0.7, ratio=0.57)
    path = tmp_path / "c.csv"
    write_sweep_csv(path, [row], header_lines=["seed: 0"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed: 0"
    assert lines[1] == "n_beta,beta_omega,r,s,C,D,S_irr,ratio"
    assert lines[2].startswith("1,0.69314718056,1,0.549306144334")
