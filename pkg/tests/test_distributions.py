import math
import random
from fractions import Fraction

import pytest

from dfipp.field import InputTensor, PrimeField
from dfipp.distributions import (GranularitySet, Pmf, ProductDistribution, RowTensor,
                                 SamplingCircuit, circuit_pmf, dispersion_rho,
                                 distribution_from_json, distribution_to_json, extend,
                                 extension_row_map, g_cat, granularise,
                                 make_uniform_oracle, marginal_first, sample, tv_distance)

F5 = PrimeField(5)


def test_pmf_validation():
    with pytest.raises(ValueError):
        Pmf([Fraction(1, 2), Fraction(1, 3)])
    with pytest.raises(ValueError):
        Pmf([Fraction(3, 2), Fraction(-1, 2)])


def test_point_mass_sampling():
    D = Pmf.point_mass(2, 4)
    rng = random.Random(0)
    assert all(D.sample(rng) == 2 for _ in range(100))


def test_sampling_deterministic_given_seed():
    D = Pmf([Fraction(1, 3), Fraction(1, 6), Fraction(1, 2)])
    a = [D.sample(random.Random(42)) for _ in range(10)]
    b = [D.sample(random.Random(42)) for _ in range(10)]
    assert a == b


def test_uniform_sampling_frequencies_within_5_sigma():
    D = Pmf.uniform(4)
    rng = random.Random(1)
    n = 10 ** 5
    counts = [0] * 4
    for _ in range(n):
        counts[D.sample(rng)] += 1
    sigma = math.sqrt(n * 0.25 * 0.75)
    for c in counts:
        assert abs(c - n / 4) <= 5 * sigma


def test_circuit_sampling_frequencies():
    C = SamplingCircuit.identity(2)
    rng = random.Random(2)
    n = 10 ** 5
    counts = [0] * 4
    for _ in range(n):
        counts[C.sample(rng)] += 1
    sigma = math.sqrt(n * 0.25 * 0.75)
    for c in counts:
        assert abs(c - n / 4) <= 5 * sigma


def test_dispersion_uniform_is_one():
    for k, m in [(2, 2), (3, 2), (4, 3)]:
        D = Pmf.uniform(k ** m, shape=(k, m))
        assert dispersion_rho(D).rho == 1


def test_dispersion_single_line_cell_is_k():
    # one nonzero cell per line along the first dimension
    k = 3
    masses = [Fraction(0)] * 9
    masses[0] = Fraction(1, 3)   # cells (0,0), (1,1), (2,2) carry each line's mass
    masses[4] = Fraction(1, 3)
    masses[8] = Fraction(1, 3)
    D = Pmf(masses, shape=(3, 2))
    assert dispersion_rho(D).rho == 3


def test_dispersion_simple_ratio():
    D = Pmf([Fraction(3, 4), Fraction(1, 4)], shape=(2, 1))
    report = dispersion_rho(D)
    assert report.rho == Fraction(3, 2)
    assert report.cell == (0,)


def test_marginal_first_examples():
    assert marginal_first(Pmf.uniform(4, shape=(2, 2))).masses == \
        (Fraction(1, 2), Fraction(1, 2))
    D = Pmf([Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10)],
            shape=(2, 2))
    assert marginal_first(D).masses == (Fraction(4, 10), Fraction(6, 10))
    # product distribution: the first factor integrates out
    f1 = Pmf([Fraction(1, 4), Fraction(3, 4)])
    f2 = Pmf([Fraction(2, 3), Fraction(1, 3)])
    joint = ProductDistribution([f1, f2]).joint_pmf()
    assert marginal_first(joint).masses == f2.masses


def test_marginal_requires_m_at_least_two():
    with pytest.raises(ValueError):
        marginal_first(Pmf.uniform(4, shape=(4, 1)))


def test_granularise_examples():
    assert granularise(Pmf([Fraction(1, 2), Fraction(1, 2)])).counts == (8, 8, 0)
    assert granularise(Pmf([Fraction(1), Fraction(0)])).counts == (14, 2, 0)
    third = Fraction(1, 3)
    assert granularise(Pmf([third, third, third])).counts == (8, 8, 8, 0)


def test_granularity_invariants_enforced():
    with pytest.raises(ValueError):
        GranularitySet((8, 9, 0))  # sums to 17, not 16
    with pytest.raises(ValueError):
        GranularitySet((15, 1, 0))  # a_2 < 2


def test_g_cat_examples():
    X = InputTensor(F5, 2, 1, (1, 0))
    cat = g_cat(X)
    assert cat.rows == ((1,), (0,), (0,))
    rng = random.Random(9)
    Y = InputTensor.random(F5, 2, 2, rng)
    cat2 = g_cat(Y)
    assert cat2.rows[0] == Y.row(0) and cat2.rows[1] == Y.row(1)
    assert cat2.rows[2] == (0, 0)


def test_extend_identity():
    X = RowTensor(F5, ((1, 2), (3, 4)))
    out, row_map = extend(X, (1, 1))
    assert out.rows == X.rows
    assert row_map == (0, 1)


def test_extend_example_order():
    rows = RowTensor(F5, ((1, 1), (2, 2), (0, 0)))
    out, row_map = extend(rows, (8, 8, 0))
    assert len(out.rows) == 16
    assert out.rows[0] == (1, 1) and out.rows[1] == (2, 2)
    assert out.rows[2:9] == ((1, 1),) * 7
    assert out.rows[9:] == ((2, 2),) * 7
    assert row_map == (0, 1) + (0,) * 7 + (1,) * 7


def test_extend_counting_matches_granular_distribution():
    pmf = Pmf([Fraction(3, 4), Fraction(1, 4)])
    grains = granularise(pmf)
    row_map = extension_row_map(grains.counts)
    n = len(row_map)
    for j, a in enumerate(grains.counts):
        assert row_map.count(j) == a
        assert Fraction(row_map.count(j), n) == grains.pmf().masses[j]


def test_circuit_pmf_examples():
    assert circuit_pmf(SamplingCircuit.identity(2)).masses == (Fraction(1, 4),) * 4
    # constant output: NOT(x0) AND x0 = 0
    C = SamplingCircuit(1, (("NOT", 0), ("AND", 0, 1)), (2,))
    assert circuit_pmf(C).masses == (Fraction(1), Fraction(0))
    # AND of two bits: P[1] = 1/4
    C2 = SamplingCircuit(2, (("AND", 0, 1),), (2,))
    assert circuit_pmf(C2).masses == (Fraction(3, 4), Fraction(1, 4))


def test_circuit_json_round_trip():
    C = SamplingCircuit(2, (("AND", 0, 1), ("XOR", 0, 2)), (3, 1))
    back = distribution_from_json(distribution_to_json(C))
    assert back == C
    D = Pmf([Fraction(1, 3), Fraction(2, 3)], shape=(2, 1))
    back_d = distribution_from_json(distribution_to_json(D))
    assert back_d.masses == D.masses and back_d.shape == D.shape


def test_tv_distance_l1_convention():
    assert tv_distance(Pmf([1, 0]), Pmf([0, 1])) == 2
    assert tv_distance(Pmf([Fraction(1, 2), Fraction(1, 2)]),
                       Pmf([Fraction(1, 4), Fraction(3, 4)])) == Fraction(1, 2)
    D = Pmf([Fraction(1, 3), Fraction(2, 3)])
    assert tv_distance(D, D) == 0


def test_make_uniform_oracle_layout():
    pmf = Pmf([Fraction(1, 2), Fraction(1, 2)])
    queries = []

    def source(i):
        queries.append(i)
        return [7, 9][i]

    Q, oracle = make_uniform_oracle(pmf, source)
    assert len(Q) == 16
    assert Q[:2] == (0, 1)
    assert Q[2:9] == (0,) * 7
    assert Q[9:16] == (1,) * 7
    assert 2 not in Q  # the appended-zero index never appears when a_{n+1} = 0
    # one virtual query = one source query
    assert oracle.query(5) == 7
    assert queries == [0]


def test_make_uniform_oracle_zero_slots_cost_nothing():
    pmf = Pmf([Fraction(7, 8), Fraction(1, 8)])
    grains = granularise(pmf)
    assert grains.counts[-1] > 0
    queries = []
    Q, oracle = make_uniform_oracle(pmf, lambda i: queries.append(i) or 1)
    zero_slot = Q.index(2)
    assert oracle.query(zero_slot) == 0
    assert queries == []


def test_uniform_virtual_sampling_matches_granular_distribution():
    pmf = Pmf([Fraction(3, 4), Fraction(1, 4)])
    Q, _oracle = make_uniform_oracle(pmf, lambda i: 0)
    grains = granularise(pmf)
    counts = [Q.count(j) for j in range(3)]
    assert counts == list(grains.counts)


def test_sample_dispatch():
    rng = random.Random(5)
    assert sample(Pmf.point_mass(1, 3), rng) == 1
    prod = ProductDistribution([Pmf.point_mass(1, 2), Pmf.point_mass(0, 2)])
    assert sample(prod, rng) == 2  # cell (1, 0) -> flat 1*2+0
