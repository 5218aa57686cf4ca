import random
from itertools import product

import pytest

from dfipp.field import (InputTensor, PrimeField, canonical_embed, lagrange_eval_univariate,
                         lde_eval, lde_eval_batch)

from _oracles import vandermonde_lde_eval

F7 = PrimeField(7)


def test_prime_check():
    with pytest.raises(ValueError):
        PrimeField(15)
    PrimeField(2)
    PrimeField((1 << 61) - 1)  # Mersenne prime, 61 bits


def test_canonical_embed_convention():
    assert canonical_embed(1, 5, F7) == 0
    assert canonical_embed(5, 5, F7) == 4
    assert canonical_embed(3, 5, F7) == 2


def test_canonical_embed_rejects():
    with pytest.raises(ValueError):
        canonical_embed(0, 5, F7)
    with pytest.raises(ValueError):
        canonical_embed(6, 5, F7)
    with pytest.raises(ValueError):
        canonical_embed(1, 8, F7)  # k > modulus


def test_lagrange_constant():
    for t in range(7):
        assert lagrange_eval_univariate(F7, [3, 3, 3], t) == 3


def test_lagrange_line_through_two_points():
    # values (1, 4) over F_7 lie on 1 + 3t
    assert lagrange_eval_univariate(F7, [1, 4], 1) == 4
    assert lagrange_eval_univariate(F7, [1, 4], 2) == 0  # 1 + 6 = 7 = 0 mod 7


def test_lde_constant_tensor():
    X = InputTensor(F7, 2, 2, (5, 5, 5, 5))
    for pt in product(range(7), repeat=2):
        assert lde_eval(X, pt) == 5


def test_lde_grid_agreement():
    rng = random.Random(7)
    X = InputTensor.random(F7, 3, 2, rng)
    for cell in product(range(3), repeat=2):
        assert lde_eval(X, cell) == X.cell(cell)


def test_lde_univariate_example():
    X = InputTensor(F7, 2, 1, (1, 4))
    assert lde_eval(X, (2,)) == 0


def test_lde_batch():
    X = InputTensor(F7, 2, 1, (1, 4))
    assert lde_eval_batch(X, []) == []
    grid = [(0,), (1,)]
    assert lde_eval_batch(X, grid) == [1, 4]
    assert lde_eval_batch(X, [(2,)]) == [0]


@pytest.mark.parametrize("k,m", [(1, 1), (2, 1), (3, 1), (2, 2), (3, 2)])
def test_lde_matches_vandermonde_everywhere(k, m):
    # uniqueness oracle: coefficient-form interpolation via Gaussian elimination
    rng = random.Random(100 * k + m)
    for _ in range(3):
        X = InputTensor.random(F7, k, m, rng)
        for pt in product(range(7), repeat=m):
            assert lde_eval(X, pt) == vandermonde_lde_eval(X.data, k, m, pt, 7)


def test_lde_linearity():
    rng = random.Random(11)
    for _ in range(50):
        X = InputTensor.random(F7, 2, 2, rng)
        Y = InputTensor.random(F7, 2, 2, rng)
        a, b = rng.randrange(7), rng.randrange(7)
        Z = InputTensor(F7, 2, 2, tuple((a * x + b * y) % 7 for x, y in zip(X.data, Y.data)))
        pt = F7.rand_point(2, rng)
        assert lde_eval(Z, pt) == (a * lde_eval(X, pt) + b * lde_eval(Y, pt)) % 7


def test_tensor_row_view_fixes_first_coordinate():
    X = InputTensor(F7, 2, 2, (1, 2, 3, 4))
    assert X.row(0) == (1, 2)
    assert X.row(1) == (3, 4)
    assert X.cell((1, 0)) == 3


def test_tensor_requires_k_at_most_modulus():
    with pytest.raises(ValueError):
        InputTensor(PrimeField(3), 4, 1, (0, 1, 2, 0))
