"""Distribution models: explicit PMFs, product distributions, white-box
sampling circuits, dispersion, marginals, granularisation, concatenation,
and tensor extensions.

Masses are exact Fractions everywhere.  Samplers convert to 64-bit
fixed-point cumulative tables only inside the RNG path; the table
derivation is deterministic, so (seed -> draws) is reproducible.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .field import InputTensor, PrimeField
from .tensors import BudgetExceeded

_TABLE_BITS = 64
_TABLE_ONE = 1 << _TABLE_BITS


def _parse_rational(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(s)


class Pmf:
    """A distribution over [n] (optionally shaped as [k]^m in flat layout)."""

    __slots__ = ("masses", "shape", "_cum")

    def __init__(self, masses: Sequence, shape: Optional[tuple[int, int]] = None):
        ms = tuple(_parse_rational(v) for v in masses)
        if any(v < 0 for v in ms):
            raise ValueError("negative mass")
        if sum(ms) != 1:
            raise ValueError(f"masses sum to {sum(ms)}, not 1")
        if shape is not None:
            k, m = shape
            if k ** m != len(ms):
                raise ValueError(f"shape {shape} does not match {len(ms)} masses")
        self.masses = ms
        self.shape = shape
        self._cum = None

    @property
    def n(self) -> int:
        return len(self.masses)

    def mass(self, i) -> Fraction:
        if isinstance(i, tuple):
            i = self.flat(i)
        return self.masses[i]

    def flat(self, coords: Sequence[int]) -> int:
        k, m = self.shape
        idx = 0
        for c in coords:
            idx = idx * k + c
        return idx

    def coords(self, flat: int) -> tuple[int, ...]:
        k, m = self.shape
        out = []
        for _ in range(m):
            flat, c = divmod(flat, k)
            out.append(c)
        return tuple(reversed(out))

    @staticmethod
    def uniform(n: int, shape=None) -> "Pmf":
        return Pmf([Fraction(1, n)] * n, shape=shape)

    @staticmethod
    def point_mass(i: int, n: int, shape=None) -> "Pmf":
        return Pmf([Fraction(1) if j == i else Fraction(0) for j in range(n)], shape=shape)

    def _table(self):
        if self._cum is None:
            cum = []
            acc = Fraction(0)
            for v in self.masses:
                acc += v
                cum.append(math.floor(acc * _TABLE_ONE))
            cum[-1] = _TABLE_ONE
            self._cum = cum
        return self._cum

    def sample(self, rng) -> int:
        """Draw a flat index; deterministic given the rng state."""
        u = rng.getrandbits(_TABLE_BITS)
        return bisect_right(self._table(), u)

    def __eq__(self, other) -> bool:
        return isinstance(other, Pmf) and other.masses == self.masses

    def __repr__(self) -> str:
        return f"Pmf({[str(v) for v in self.masses]}, shape={self.shape})"


class ProductDistribution:
    """D_1 x ... x D_m over [k]^m; the joint mass of a cell is the factor product."""

    __slots__ = ("factors", "k", "m")

    def __init__(self, factors: Sequence[Pmf]):
        ks = {f.n for f in factors}
        if len(ks) != 1:
            raise ValueError("all factors must share the support size k")
        self.factors = tuple(factors)
        self.k = ks.pop()
        self.m = len(self.factors)

    @property
    def n(self) -> int:
        return self.k ** self.m

    def mass(self, i) -> Fraction:
        coords = i if isinstance(i, tuple) else self.joint_coords(i)
        out = Fraction(1)
        for f, c in zip(self.factors, coords):
            out *= f.mass(c)
        return out

    def joint_coords(self, flat: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.m):
            flat, c = divmod(flat, self.k)
            out.append(c)
        return tuple(reversed(out))

    def joint_pmf(self) -> Pmf:
        masses = [Fraction(1)]
        for f in self.factors:
            masses = [a * b for a in masses for b in f.masses]
        return Pmf(masses, shape=(self.k, self.m))

    def sample(self, rng) -> int:
        idx = 0
        for f in self.factors:
            idx = idx * self.k + f.sample(rng)
        return idx


@dataclass(frozen=True)
class SamplingCircuit:
    """An acyclic AND/XOR/NOT circuit mapping l input bits to an output index.

    Wires 0..n_inputs-1 are the inputs; gate g defines wire n_inputs+g.
    The output index is sum_j outputs[j] bit * 2^j (LSB first).
    """

    n_inputs: int
    gates: tuple[tuple, ...]  # ("AND", a, b) | ("XOR", a, b) | ("NOT", a)
    outputs: tuple[int, ...]

    def __post_init__(self):
        for g, gate in enumerate(self.gates):
            op = gate[0]
            if op not in ("AND", "XOR", "NOT"):
                raise ValueError(f"unknown gate {op}")
            wire = self.n_inputs + g
            if any(src >= wire for src in gate[1:]):
                raise ValueError("gate inputs must reference earlier wires")

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    def eval(self, x: int) -> int:
        wires = [(x >> j) & 1 for j in range(self.n_inputs)]
        for gate in self.gates:
            if gate[0] == "AND":
                wires.append(wires[gate[1]] & wires[gate[2]])
            elif gate[0] == "XOR":
                wires.append(wires[gate[1]] ^ wires[gate[2]])
            else:
                wires.append(1 - wires[gate[1]])
        out = 0
        for j, w in enumerate(self.outputs):
            out |= wires[w] << j
        return out

    def sample(self, rng) -> int:
        return self.eval(rng.getrandbits(self.n_inputs))

    @staticmethod
    def identity(n_bits: int) -> "SamplingCircuit":
        return SamplingCircuit(n_bits, (), tuple(range(n_bits)))

    @staticmethod
    def from_table(n_inputs: int, table: Sequence[int], n_outputs: int) -> "SamplingCircuit":
        """Synthesize gates for an arbitrary truth table f: {0,1}^l -> [2^b].

        Each output bit is the XOR of its minterms (minterms are disjoint,
        so XOR == OR); each minterm is an AND tree over the input literals.
        """
        gates: list[tuple] = []
        n_wires = n_inputs

        def emit(gate) -> int:
            nonlocal n_wires
            gates.append(gate)
            n_wires += 1
            return n_wires - 1

        literal_neg = [emit(("NOT", i)) for i in range(n_inputs)]
        minterm_wire: dict[int, int] = {}

        def minterm(x: int) -> int:
            if x not in minterm_wire:
                acc = None
                for i in range(n_inputs):
                    lit = i if (x >> i) & 1 else literal_neg[i]
                    acc = lit if acc is None else emit(("AND", acc, lit))
                minterm_wire[x] = acc
            return minterm_wire[x]

        outputs = []
        zero = emit(("AND", 0, literal_neg[0]))  # constant 0
        for j in range(n_outputs):
            acc = None
            for x in range(2 ** n_inputs):
                if (table[x] >> j) & 1:
                    w = minterm(x)
                    acc = w if acc is None else emit(("XOR", acc, w))
            outputs.append(zero if acc is None else acc)
        return SamplingCircuit(n_inputs, tuple(gates), tuple(outputs))


def circuit_pmf(C: SamplingCircuit, budget: int = 20) -> Pmf:
    """Exact output distribution by enumerating all 2^l inputs."""
    if C.n_inputs > budget:
        raise BudgetExceeded(
            f"circuit arity {C.n_inputs} exceeds exhaustive budget {budget}")
    n = 2 ** C.n_outputs
    counts = [0] * n
    for x in range(2 ** C.n_inputs):
        counts[C.eval(x)] += 1
    total = 2 ** C.n_inputs
    return Pmf([Fraction(c, total) for c in counts])


def sample(D, rng) -> int:
    """Draw a flat index from a Pmf, ProductDistribution, or SamplingCircuit."""
    return D.sample(rng)


@dataclass(frozen=True)
class DispersionReport:
    rho: Fraction
    dim: int
    cell: tuple[int, ...]


def dispersion_rho(D: Pmf) -> DispersionReport:
    """Largest ratio of a cell's mass to the average mass along any axis line.

    0/0 lines count as ratio 1, so the uniform distribution reports exactly 1
    and every distribution over [k]^m reports at most k.
    """
    if D.shape is None:
        raise ValueError("dispersion needs a shaped PMF")
    k, m = D.shape
    best = Fraction(1)
    witness = (0, D.coords(0))
    for dim in range(m):
        lo = k ** (m - 1 - dim)  # stride of the varied coordinate
        seen = set()
        for flat in range(D.n):
            base = flat - (flat // lo % k) * lo
            if (dim, base) in seen:
                continue
            seen.add((dim, base))
            line = [base + t * lo for t in range(k)]
            total = sum(D.masses[i] for i in line)
            if total == 0:
                continue
            top = max(line, key=lambda i: D.masses[i])
            ratio = Fraction(k) * D.masses[top] / total
            if ratio > best:
                best = ratio
                witness = (dim, D.coords(top))
    return DispersionReport(best, witness[0], witness[1])


def marginal_first(D: Pmf) -> Pmf:
    """Sum out the FIRST coordinate (the direction consumed by row folding)."""
    if D.shape is None or D.shape[1] < 2:
        raise ValueError("need a shaped PMF with m >= 2")
    k, m = D.shape
    step = k ** (m - 1)
    masses = [sum(D.masses[t * step + u] for t in range(k)) for u in range(step)]
    return Pmf(masses, shape=(k, m - 1))


@dataclass(frozen=True)
class GranularitySet:
    """Granularities {a_i} of an 8n-grained distribution over [n+1]."""

    counts: tuple[int, ...]

    def __post_init__(self):
        n = len(self.counts) - 1
        if sum(self.counts) != 8 * n:
            raise ValueError("granularities must sum to 8n")
        if any(a < 2 for a in self.counts[:-1]):
            raise ValueError("a_i >= 2 required for i <= n")
        if self.counts[-1] < 0:
            raise ValueError("remainder must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    @property
    def total(self) -> int:
        return 8 * self.n

    def pmf(self) -> Pmf:
        return Pmf([Fraction(a, self.total) for a in self.counts])


def granularise(p: Pmf) -> GranularitySet:
    """a_i = floor(6n*p_i) + 2 for i <= n; a_{n+1} absorbs the remainder to 8n."""
    n = p.n
    counts = [math.floor(6 * n * v) + 2 for v in p.masses]
    counts.append(8 * n - sum(counts))
    return GranularitySet(tuple(counts))


@dataclass(frozen=True)
class RowTensor:
    """A stack of rows over F, each of length row_len (a [rows] x [k]^(m-1) view)."""

    field: PrimeField
    rows: tuple[tuple[int, ...], ...]

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def row_len(self) -> int:
        return len(self.rows[0]) if self.rows else 0


def g_cat(X: InputTensor) -> RowTensor:
    """Concatenate the all-zero slice to the first dimension."""
    rows = [X.row(i) for i in range(X.k)]
    rows.append((0,) * X.k ** (X.m - 1))
    return RowTensor(X.field, tuple(rows))


def extension_row_map(B: Sequence[int]) -> tuple[int, ...]:
    """Source-row index for each extension row.

    Rows with b_j >= 1 appear once each in original order, then the extra
    copies are appended in order (b_1 - 1 copies of row 1, ...); rows with
    b_j = 0 are omitted entirely, so the output length is sum(B).
    """
    if sum(B) == 0:
        raise ValueError("extension must keep at least one row")
    out = [j for j, b in enumerate(B) if b >= 1]
    for j, b in enumerate(B):
        out.extend([j] * (b - 1))
    return tuple(out)


def extend(X: RowTensor, B: Sequence[int]) -> tuple[RowTensor, tuple[int, ...]]:
    """Replicate rows of X per the granularities B; returns (tensor, row_map)."""
    if len(B) != X.num_rows:
        raise ValueError(f"B has {len(B)} entries for {X.num_rows} rows")
    row_map = extension_row_map(B)
    return RowTensor(X.field, tuple(X.rows[j] for j in row_map)), row_map


def tv_distance(p: Pmf, q: Pmf) -> Fraction:
    """sum_i |p_i - q_i| (the L1 form, without the conventional 1/2 factor)."""
    if p.n != q.n:
        raise ValueError("support size mismatch")
    return sum((abs(a - b) for a, b in zip(p.masses, q.masses)), Fraction(0))


class VirtualUniformOracle:
    """Oracle for the 8n-slot virtual input X'_i = g_cat(X)[Q_i].

    A query to a slot backed by a real source index issues exactly one
    source query; a slot backed by the appended zero returns 0 for free.
    """

    def __init__(self, Q: Sequence[int], n: int, source_query: Callable[[int], int]):
        self.Q = tuple(Q)
        self.n = n
        self._source = source_query

    def query(self, i: int) -> int:
        src = self.Q[i]
        if src == self.n:
            return 0
        return self._source(src)


def make_uniform_oracle(p: Pmf, source_query: Callable[[int], int]):
    """Q maps the uniform distribution over 8n slots to granularise(p) over [n+1].

    Q_i = i for i in [0, n); then a_j - 1 extra copies of each j in order;
    the final a_{n+1} slots map to index n, the appended zero.  Uniform
    slot-sampling therefore reproduces the granular distribution exactly.
    """
    n = p.n
    grains = granularise(p)
    Q = list(range(n))
    for j, a in enumerate(grains.counts[:-1]):
        Q.extend([j] * (a - 1))
    Q.extend([n] * grains.counts[-1])
    return tuple(Q), VirtualUniformOracle(Q, n, source_query)


# --- JSON wire format -------------------------------------------------------

def distribution_to_json(D) -> dict:
    if isinstance(D, Pmf):
        out = {"kind": "explicit", "masses": [str(v) for v in D.masses]}
        if D.shape is not None:
            out["shape"] = list(D.shape)
        return out
    if isinstance(D, ProductDistribution):
        return {"kind": "product",
                "factors": [[str(v) for v in f.masses] for f in D.factors]}
    if isinstance(D, SamplingCircuit):
        return {"kind": "circuit", "inputs": D.n_inputs,
                "gates": [list(g) for g in D.gates], "outputs": list(D.outputs)}
    raise TypeError(f"not a distribution: {D!r}")


def distribution_from_json(obj: dict):
    kind = obj["kind"]
    if kind == "explicit":
        shape = tuple(obj["shape"]) if "shape" in obj else None
        return Pmf([Fraction(s) for s in obj["masses"]], shape=shape)
    if kind == "product":
        return ProductDistribution([Pmf([Fraction(s) for s in f]) for f in obj["factors"]])
    if kind == "circuit":
        return SamplingCircuit(obj["inputs"],
                               tuple(tuple(g) for g in obj["gates"]),
                               tuple(obj["outputs"]))
    raise ValueError(f"unknown distribution kind {kind!r}")
