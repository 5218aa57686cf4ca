"""Prime-field arithmetic, Lagrange interpolation, and low-degree extensions.

A tensor X in F^(k^m) has a unique extension P_X : F^m -> F of individual
degree <= k-1 agreeing with X on the embedded grid [k]^m.  [k] is embedded
into F as {0, ..., k-1} (zero-based, so Lagrange nodes are contiguous).

Field elements are plain ints in [0, p).  Evaluation points are tuples of
ints.  Everything here is immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; the base set covers all n < 3.3 * 10^24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeField:
    """The field F_p for a prime modulus p (up to 64 bits)."""

    __slots__ = ("modulus", "bits")

    def __init__(self, modulus: int):
        if not is_prime(modulus):
            raise ValueError(f"modulus {modulus} is not prime")
        if modulus.bit_length() > 64:
            raise ValueError("modulus must fit in 64 bits")
        self.modulus = modulus
        # canonical fixed-width encoding for cost accounting
        self.bits = max(1, (modulus - 1).bit_length())

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.modulus == self.modulus

    def __hash__(self) -> int:
        return hash(("PrimeField", self.modulus))

    def __repr__(self) -> str:
        return f"PrimeField({self.modulus})"

    def reduce(self, v: int) -> int:
        return v % self.modulus

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return a * b % self.modulus

    def neg(self, a: int) -> int:
        return -a % self.modulus

    def inv(self, a: int) -> int:
        if a % self.modulus == 0:
            raise ZeroDivisionError("inverse of 0")
        return pow(a, self.modulus - 2, self.modulus)

    def rand(self, rng) -> int:
        return rng.randrange(self.modulus)

    def rand_point(self, m: int, rng) -> tuple[int, ...]:
        return tuple(rng.randrange(self.modulus) for _ in range(m))


def canonical_embed(i: int, k: int, field: PrimeField) -> int:
    """Embed the 1-based index i in [k] as the field element i-1."""
    if not 1 <= k <= field.modulus:
        raise ValueError(f"k={k} exceeds field size {field.modulus}")
    if not 1 <= i <= k:
        raise ValueError(f"index {i} outside [1, {k}]")
    return i - 1


@lru_cache(maxsize=4096)
def _bary_weights(p: int, k: int) -> tuple[int, ...]:
    # w_i = prod_{j != i} (i - j)^{-1} mod p over nodes 0..k-1
    weights = []
    for i in range(k):
        acc = 1
        for j in range(k):
            if j != i:
                acc = acc * (i - j) % p
        weights.append(pow(acc, p - 2, p))
    return tuple(weights)


@lru_cache(maxsize=65536)
def lagrange_basis(p: int, k: int, t: int) -> tuple[int, ...]:
    """Evaluations (L_0(t), ..., L_{k-1}(t)) of the Lagrange basis over nodes 0..k-1."""
    if not 1 <= k <= p:
        raise ValueError(f"k={k} exceeds field size {p}")
    t %= p
    if t < k:
        out = [0] * k
        out[t] = 1
        return tuple(out)
    weights = _bary_weights(p, k)
    ell = 1
    for j in range(k):
        ell = ell * (t - j) % p
    return tuple(ell * w % p * pow(t - i, p - 2, p) % p for i, w in enumerate(weights))


def lagrange_eval_univariate(field: PrimeField, values: Sequence[int], t: int) -> int:
    """Evaluate the unique degree-(k-1) polynomial through {(i, values[i])} at t."""
    basis = lagrange_basis(field.modulus, len(values), t)
    return sum(b * v for b, v in zip(basis, values)) % field.modulus


@dataclass(frozen=True)
class InputTensor:
    """An element of F^(k^m), flat data in lexicographic cell order.

    The first coordinate is the most significant, so the row X[i,.] (the
    slice fixing the first coordinate, as used by folding) is contiguous:
    data[i*k^(m-1) : (i+1)*k^(m-1)].
    """

    field: PrimeField
    k: int
    m: int
    data: tuple[int, ...]

    def __post_init__(self):
        if self.k > self.field.modulus:
            raise ValueError("LDE needs k distinct nodes: k exceeds field size")
        if len(self.data) != self.k ** self.m:
            raise ValueError(f"expected {self.k ** self.m} cells, got {len(self.data)}")
        if any(not 0 <= v < self.field.modulus for v in self.data):
            object.__setattr__(self, "data", tuple(v % self.field.modulus for v in self.data))

    @property
    def n(self) -> int:
        return self.k ** self.m

    def flat(self, coords: Sequence[int]) -> int:
        idx = 0
        for c in coords:
            idx = idx * self.k + c
        return idx

    def coords(self, flat: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.m):
            flat, c = divmod(flat, self.k)
            out.append(c)
        return tuple(reversed(out))

    def cell(self, coords: Sequence[int]) -> int:
        return self.data[self.flat(coords)]

    def row(self, i: int) -> tuple[int, ...]:
        step = self.k ** (self.m - 1)
        return self.data[i * step:(i + 1) * step]

    @staticmethod
    def random(field: PrimeField, k: int, m: int, rng) -> "InputTensor":
        return InputTensor(field, k, m, tuple(rng.randrange(field.modulus) for _ in range(k ** m)))


def lde_eval(X: InputTensor, point: Sequence[int]) -> int:
    """P_X(point) = sum_{i in [k]^m} X_i * prod_t L_{i_t}(point_t)."""
    if len(point) != X.m:
        raise ValueError(f"point has {len(point)} coordinates, tensor has {X.m}")
    p, k = X.field.modulus, X.k
    data = list(X.data)
    # contract the leading dimension once per coordinate
    for t in range(X.m):
        basis = lagrange_basis(p, k, point[t])
        step = len(data) // k
        data = [
            sum(basis[i] * data[i * step + u] for i in range(k)) % p
            for u in range(step)
        ]
    return data[0]


def lde_eval_batch(X: InputTensor, points: Iterable[Sequence[int]]) -> list[int]:
    """Pointwise lde_eval; output order matches the input order."""
    return [lde_eval(X, j) for j in points]


def basis_row(field: PrimeField, k: int, m: int, point: Sequence[int]) -> tuple[int, ...]:
    """Coefficient vector c with P_X(point) = sum_cell c[cell] * X[cell].

    Built by Kronecker products of per-coordinate Lagrange basis vectors;
    used by the brute-force enumeration oracles so that membership scans
    cost one dot product per candidate.
    """
    p = field.modulus
    row = (1,)
    for t in range(m):
        basis = lagrange_basis(p, k, point[t])
        row = tuple(r * b % p for r in row for b in basis)
    return row
