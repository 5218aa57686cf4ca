"""Core protocols: HAM/symmetric IPP, PVAL claim generation, polynomial
folding, the recursive PVAL IPP, the composed df-IPPs, the RLCC
transformation, and brute-force lemma checks.

Asymptotic parameter formulas degenerate at desk scale; every clamp that
fires is appended to the session notes so run reports stay auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .field import InputTensor, PrimeField, lagrange_eval_univariate, lde_eval, lde_eval_batch
from .tensors import INF, PvalInstance, dist_to_pval_bruteforce, metric_fn
from .distributions import Pmf, dispersion_rho, marginal_first
from .session import (ACCEPT, CostLedger, OracleHandles, ProtocolViolation, ProverStrategy,
                      Session, Verdict, run_session)


@dataclass
class RunResult:
    verdict: Verdict
    ledger: CostLedger
    transcript: list
    notes: list[str]


def _run(verifier, prover, oracles, seed) -> RunResult:
    return RunResult(*run_session(verifier, prover, oracles, seed))


# --- weight classes and folding state ----------------------------------------

def fold_kappa(r: int, k: int) -> int:
    """kappa = 8 * log2(max(r,2)) * log2(k), floored to at least 1."""
    return max(1, math.ceil(8 * math.log2(max(r, 2)) * math.log2(max(k, 2))))


def weight_classes(k: int, kappa: int, notes: Optional[list] = None) -> list[tuple[int, int]]:
    """(a, weight) pairs: a in 1..max(1, ceil(log2(k/kappa)))+1, weights clamped to [1,k]."""
    e = 0
    while (kappa << e) < k:
        e += 1
    count = max(1, e) + 1
    out = []
    for a in range(1, count + 1):
        target = (1 << a) * kappa
        weight = min(max(target, 1), k)
        if weight != target and notes is not None:
            notes.append(f"clamp: weight class a={a} target {target} clamped to {weight} (k={k})")
        out.append((a, weight))
    return out


@dataclass(frozen=True)
class FoldState:
    """One node of the folding tree: histories plus the current PVAL claim.

    rowmaps[s] is None for a plain fold; for extended folds it maps each
    extension row to a source row of the g_cat stack, whose last index
    (= k) is the appended all-zero row.
    """

    zs: tuple[tuple[int, ...], ...]
    supports: tuple[tuple[int, ...], ...]
    rowmaps: tuple[Optional[tuple[int, ...]], ...]
    weights: tuple[int, ...]
    points: tuple[tuple[int, ...], ...]
    values: tuple[int, ...]

    @property
    def tau(self) -> int:
        """Query locality per folded coordinate: the product of support sizes.

        Exact for plain folds; an upper bound for extended folds, where
        support entries backed by the appended zero row cost nothing.
        """
        t = 1
        for s in self.supports:
            t *= len(s)
        return t


def project_points(points: Sequence[tuple[int, ...]]):
    """Distinct tail projections in first-occurrence order + column index per point."""
    j2: list[tuple[int, ...]] = []
    index: dict[tuple[int, ...], int] = {}
    cols = []
    for pt in points:
        rest = pt[1:]
        if rest not in index:
            index[rest] = len(j2)
            j2.append(rest)
        cols.append(index[rest])
    return j2, cols


def folded_eval(oracles: OracleHandles, base: InputTensor, st: FoldState,
                coords: tuple[int, ...]) -> int:
    """Evaluate one coordinate of z_s . (... (z_1 . X)) through the query oracle.

    Every support index is recursed even when its sampled coefficient is 0,
    so the cost is exactly the product of support sizes; extension rows that
    map to the appended zero row contribute 0 at zero query cost.
    """
    p = base.field.modulus
    k = base.k

    def rec(level: int, idx: tuple[int, ...]) -> int:
        if level == 0:
            return oracles.query(base.flat(idx))
        z = st.zs[level - 1]
        rowmap = st.rowmaps[level - 1]
        acc = 0
        for i in st.supports[level - 1]:
            src = i if rowmap is None else rowmap[i]
            if rowmap is not None and src == k:
                continue
            acc += z[i] * rec(level - 1, (src,) + idx)
        return acc % p

    return rec(len(st.zs), coords)


def _fold_phase(session: Session, live: list[FoldState], k: int, field: PrimeField,
                kappa: int, ask_payload, tag: str = "fold/matrix"):
    """One parallel polynomial-folding round over every live tuple.

    Returns (children, None) on success or (None, verdict) on rejection.
    All matrices ride in one prover message and all folding vectors in one
    verifier message, so each phase costs exactly two messages.
    """
    p, fb = field.modulus, field.bits
    projections = [project_points(st.points) for st in live]
    expect = [(k * len(j2), fb) for (j2, _) in projections]
    msg = session.ask(tag, ask_payload, expect=expect)

    matrices = []
    for st, (j2, cols), sec in zip(live, projections, msg.sections):
        t2 = len(j2)
        Y = [sec.values[i * t2:(i + 1) * t2] for i in range(k)]
        for (pt, v), c in zip(zip(st.points, st.values), cols):
            column = [Y[i][c] for i in range(k)]
            if lagrange_eval_univariate(field, column, pt[0]) != v:
                return None, Verdict(False, "fold-consistency")
        matrices.append((Y, j2))

    classes = weight_classes(k, kappa, session.notes)
    children: list[FoldState] = []
    z_sections = []
    for st, (Y, j2) in zip(live, matrices):
        for a, weight in classes:
            support = tuple(sorted(session.rng.sample(range(k), weight)))
            z = [0] * k
            for i in support:
                z[i] = session.rng.randrange(p)
            va = tuple(sum(z[i] * Y[i][c] for i in range(k)) % p for c in range(len(j2)))
            children.append(FoldState(
                zs=st.zs + (tuple(z),),
                supports=st.supports + (support,),
                rowmaps=st.rowmaps + (None,),
                weights=st.weights + (a,),
                points=tuple(j2),
                values=va,
            ))
            z_sections.append((tuple(z), fb))
    session.tell("fold/vectors", z_sections)
    return children, None


def poly_fold(session: Session, inst: PvalInstance, kappa: int):
    """Single folding round as a stand-alone operation.

    The outputs are tuples (a, z_a, J_2, v_a = z_a . Y') carried inside
    FoldState records; tau_a is the support size of z_a.
    """
    root = FoldState((), (), (), (), inst.points, inst.values)
    return _fold_phase(session, [root], inst.k, inst.field, kappa,
                       ask_payload=(0, inst.points, inst.values))


# --- HAM and symmetric languages ----------------------------------------------

def _ham_body(session: Session, n: int, w: int, eps: Fraction, c: int) -> Verdict:
    width = max(1, n.bit_length())
    iterations = math.ceil(Fraction(c) / eps)
    for _ in range(iterations):
        i0, xi = session.oracles.sample()
        i = i0 + 1  # the binary split runs on 1-based inclusive intervals
        lo, hi, v = 1, n, w
        path: tuple[int, ...] = ()
        while lo < hi:
            mid = (lo + hi) // 2
            msg = session.ask("ham/split", (lo, hi, mid, path), expect=[(2, width)])
            h0, h1 = msg.values()
            if h0 + h1 != v:
                return Verdict(False, "sum")
            if h0 > mid - lo + 1 or h1 > hi - mid:
                return Verdict(False, "range")
            bit = 0 if i <= mid else 1
            session.tell("ham/dir", [((bit,), 1)])
            if bit == 0:
                hi, v = mid, h0
            else:
                lo, v = mid + 1, h1
            path += (bit,)
        if xi != v:
            return Verdict(False, "leaf")
    return ACCEPT


def run_ham_ipp(x_bits: Sequence[int], D, w: int, eps: Fraction,
                prover: ProverStrategy, seed: int, c: int = 2) -> RunResult:
    """df-IPP for the weight-w language; samples only, no input queries."""
    n = len(x_bits)
    oracles = OracleHandles(x_bits, dist=D)
    return _run(lambda s: _ham_body(s, n, w, eps, c), prover, oracles, seed)


def run_symmetric_ipp(x_bits: Sequence[int], D, predicate: Callable[[int], bool],
                      eps: Fraction, prover: ProverStrategy, seed: int,
                      c: int = 2) -> RunResult:
    """The prover announces the weight; the verifier gates on the predicate
    before delegating to the weight protocol."""
    n = len(x_bits)
    width = max(1, n.bit_length())

    def verifier(session: Session) -> Verdict:
        msg = session.ask("ham/weight", None, expect=[(1, width)])
        w = msg.values()[0]
        if not predicate(w):
            return Verdict(False, "predicate")
        return _ham_body(session, n, w, eps, c)

    return _run(verifier, prover, OracleHandles(x_bits, dist=D), seed)


class HonestHamProver(ProverStrategy):
    """Answers splits with the true interval weights of its committed string.

    Instantiate on the real input for honesty, or on any alternative string
    to get the committed (fixed-alternative) adversary.
    """

    def __init__(self, x_bits: Sequence[int]):
        self.prefix = [0]
        for b in x_bits:
            self.prefix.append(self.prefix[-1] + b)
        self.n = len(x_bits)
        self.width = max(1, self.n.bit_length())

    def weight(self, lo: int, hi: int) -> int:  # 1-based inclusive
        return self.prefix[hi] - self.prefix[lo - 1]

    def reply(self, tag, payload):
        if tag == "ham/weight":
            return [((self.weight(1, self.n),), self.width)]
        if tag == "ham/split":
            lo, hi, mid, _path = payload
            return [((self.weight(lo, mid), self.weight(mid + 1, hi)), self.width)]
        raise ProtocolViolation(f"unexpected tag {tag}")


class BadSumHamProver(HonestHamProver):
    """Violates the sum check at the root split."""

    def reply(self, tag, payload):
        if tag == "ham/split" and payload[3] == ():
            lo, hi, mid, _ = payload
            return [((self.weight(lo, mid) + 1, self.weight(mid + 1, hi)), self.width)]
        return super().reply(tag, payload)


def extract_committed_string(prover: ProverStrategy, n: int, w: int) -> list[int]:
    """Walk every binary-descent path and read off the implied leaf string.

    For any path-consistent strategy that passes all sum/range checks, the
    implied string has Hamming weight exactly w.
    """
    out = []
    for i in range(1, n + 1):
        lo, hi, v = 1, n, w
        path: tuple[int, ...] = ()
        while lo < hi:
            mid = (lo + hi) // 2
            h0, h1 = prover.reply("ham/split", (lo, hi, mid, path))[0][0]
            if i <= mid:
                hi, v = mid, h0
                path += (0,)
            else:
                lo, v = mid + 1, h1
                path += (1,)
        out.append(v)
    return out


# --- NC -> PVAL claim generation ----------------------------------------------

@dataclass
class ClaimGenerator:
    """Idealized stand-in for the interactive NC -> PVAL reduction.

    honest: J is a fresh uniform i.i.d. point set (verifier's coins) and the
    prover supplies v, so honest provers yield v = P_X(J) with certainty.
    adversarial: a fixed (J, v), modelling a reduction run whose guarantee
    failed; downstream protocols must still reject under the hybrid promise.
    """

    mode: str = "honest"
    t: Optional[int] = None
    instance: Optional[PvalInstance] = None

    def point_count(self, n: int, eps: Fraction) -> int:
        if self.t is not None:
            return self.t
        return max(1, math.ceil(4 * eps * n * math.log2(n))) if n > 1 else 1


def generate_pval_claims(session: Session, gen: ClaimGenerator, field: PrimeField,
                         k: int, m: int, eps: Fraction) -> PvalInstance:
    fb = field.bits
    if gen.mode == "honest":
        t = gen.point_count(k ** m, eps)
        points = tuple(field.rand_point(m, session.rng) for _ in range(t))
        flat = tuple(c for pt in points for c in pt)
        session.tell("claims/points", [(flat, fb)])
        msg = session.ask("claims/values", points, expect=[(t, fb)])
        return PvalInstance(field, k, m, points, msg.values())
    if gen.mode == "adversarial":
        inst = gen.instance
        flat = tuple(c for pt in inst.points for c in pt)
        session.tell("claims/points", [(flat, fb)])
        session._record("prover", "claims/values", [(inst.values, fb)])
        return inst
    raise ValueError(f"unknown claim generator mode {gen.mode!r}")


# --- FinIPP: recursive PVAL IPP over dispersed distributions -------------------

def _fin_preconditions(session: Session, field: PrimeField, k: int, m: int,
                       r: int, eps: Fraction) -> None:
    checks = [
        ("r <= log_k(n)", r <= m),
        ("k^r <= 1/eps", Fraction(k ** r) <= 1 / eps),
        ("10r <= |F|", 10 * r <= field.modulus),
        ("|F| <= 1/eps", Fraction(field.modulus) <= 1 / eps),
    ]
    for name, ok in checks:
        if not ok:
            session.note(f"precondition violated (reported, not enforced): {name}")


def _fin_core(session: Session, X: InputTensor, inst: PvalInstance, eps: Fraction,
              rho: Fraction, r: int, dist_mode: str,
              kappa_override: Optional[int] = None) -> Verdict:
    """Folding phases, then leaf PVAL checks and uniform + distribution spot checks.

    dist_mode "oracle": the distribution batch comes from the sample oracle,
    folded by dropping the first r coordinates.  dist_mode "uniform": both
    batches are uniform verifier coins (the uniform-PVAL substitution; costs
    zero samples).
    """
    field, k, m = inst.field, inst.k, inst.m
    if not 1 <= r <= m - 1:
        raise ValueError("round parameter must satisfy 1 <= r <= m-1")
    kappa = kappa_override if kappa_override is not None else fold_kappa(r, k)
    session.note(f"kappa = {kappa}")
    _fin_preconditions(session, field, k, m, r, eps)

    live = [FoldState((), (), (), (), inst.points, inst.values)]
    for s in range(r):
        payload = (s, inst.points, inst.values) if s == 0 else (s,)
        live, verdict = _fold_phase(session, live, k, field, kappa, payload)
        if verdict is not None:
            return verdict

    leaf_len = k ** (m - r)
    fb = field.bits
    msg = session.ask("fin/leaves", r, expect=[(leaf_len, fb)] * len(live))
    for st, sec in zip(live, msg.sections):
        leaf = InputTensor(field, k, m - r, sec.values)
        for pt, v in zip(st.points, st.values):
            if lde_eval(leaf, pt) != v:
                return Verdict(False, "leaf-pval")
        eps_r = eps
        for a in st.weights:
            eps_r = eps_r * Fraction(2 ** a, 4) / rho
        nq = math.ceil(Fraction(10) / eps_r)
        session.note(f"leaf weights={'.'.join(map(str, st.weights))} "
                     f"tau={st.tau} nq={nq} eps_r={eps_r}")
        batches = [[tuple(session.rng.randrange(k) for _ in range(m - r))
                    for _ in range(nq)]]
        if dist_mode == "oracle":
            drawn = []
            for _ in range(nq):
                i, _val = session.oracles.sample()
                drawn.append(X.coords(i)[r:])
            batches.append(drawn)
        else:
            batches.append([tuple(session.rng.randrange(k) for _ in range(m - r))
                            for _ in range(nq)])
        for batch in batches:
            for coords in batch:
                if leaf.cell(coords) != folded_eval(session.oracles, X, st, coords):
                    return Verdict(False, "leaf-sample")
    return ACCEPT


def run_fin_ipp(X: InputTensor, inst: PvalInstance, D, eps: Fraction,
                rho: Fraction, r: int, prover: ProverStrategy, seed: int,
                dist_mode: str = "oracle",
                kappa_override: Optional[int] = None) -> RunResult:
    oracles = OracleHandles(X.data, dist=D)
    return _run(lambda s: _fin_core(s, X, inst, eps, rho, r, dist_mode, kappa_override),
                prover, oracles, seed)


def run_poly_fold(X: InputTensor, inst: PvalInstance, kappa: int,
                  prover: ProverStrategy, seed: int):
    """Stand-alone folding round; returns (RunResult, fold outputs or None)."""
    holder: dict = {}

    def verifier(session: Session) -> Verdict:
        children, verdict = poly_fold(session, inst, kappa)
        if verdict is not None:
            return verdict
        holder["children"] = children
        return ACCEPT

    result = _run(verifier, prover, OracleHandles(X.data), seed)
    return result, holder.get("children")


# --- composed df-IPPs -----------------------------------------------------------

def _df_nc_verifier(session: Session, X: InputTensor, eps: Fraction,
                    gen: ClaimGenerator, r: int,
                    kappa_override: Optional[int]) -> Verdict:
    field, k, m = X.field, X.k, X.m
    inst = generate_pval_claims(session, gen, field, k, m, eps)
    session.note(f"queries before fin leaf phase: {session.ledger.queries}")

    T = math.ceil(Fraction(3) / eps)
    idx_width = max(1, (X.n - 1).bit_length())
    indices, labels = [], []
    for _ in range(T):
        i, xi = session.oracles.sample()
        indices.append(i)
        labels.append(xi)
    session.tell("nc/samples", [(tuple(indices), idx_width), (tuple(labels), field.bits)])
    # sampled cells pin the LDE at their embedded grid points (grid agreement)
    ext = PvalInstance(field, k, m,
                       inst.points + tuple(X.coords(i) for i in indices),
                       inst.values + tuple(labels))
    return _fin_core(session, X, ext, eps, Fraction(1), r, "uniform", kappa_override)


def run_df_ipp_nc(X: InputTensor, D, eps: Fraction, gen: ClaimGenerator,
                  prover: ProverStrategy, seed: int, r: int = 1,
                  kappa_override: Optional[int] = None) -> RunResult:
    """NC df-IPP: claims, T = ceil(3/eps) fresh samples, uniform PVAL IPP."""
    oracles = OracleHandles(X.data, dist=D)
    return _run(lambda s: _df_nc_verifier(s, X, eps, gen, r, kappa_override),
                prover, oracles, seed)


def run_dispersed_ipp_nc(X: InputTensor, D: Pmf, eps: Fraction, gen: ClaimGenerator,
                         rho: Fraction, r: int, prover: ProverStrategy, seed: int,
                         kappa_override: Optional[int] = None) -> RunResult:
    """Claims, then FinIPP against the true distribution (hybrid soundness)."""

    def verifier(session: Session) -> Verdict:
        inst = generate_pval_claims(session, gen, X.field, X.k, X.m, eps)
        session.note(f"queries before fin leaf phase: {session.ledger.queries}")
        return _fin_core(session, X, inst, eps, rho, r, "oracle", kappa_override)

    return _run(verifier, prover, OracleHandles(X.data, dist=D), seed)


# --- RLCC transformation ---------------------------------------------------------

@dataclass
class CorrectorHandle:
    """Local corrector: fn(query_fn, i, rng) -> corrected value, or None to abort.

    Must issue exactly query_budget oracle queries per invocation; on true
    codewords it returns X_i with probability 1.
    """

    query_budget: int
    radius: Fraction
    fn: Callable


def run_rlcc_transform(x_bits: Sequence[int], D, uniform_ipp: Callable[[Session], Verdict],
                       corrector: CorrectorHandle, eps: Fraction,
                       prover: ProverStrategy, seed: int,
                       repetitions: int = 4) -> RunResult:
    """Uniform IPP, then sampled corrector spot checks.

    A corrector abort (None) is no evidence and never rejects by itself;
    only a returned value different from the sampled label rejects.
    """
    if eps > corrector.radius:
        raise ValueError("eps must not exceed the correcting radius")
    per_round = math.ceil(Fraction(1) / eps)

    def verifier(session: Session) -> Verdict:
        inner = uniform_ipp(session)
        if not inner.accepted:
            return Verdict(False, "uniform-ipp")
        for _ in range(repetitions):
            picks = [session.oracles.sample() for _ in range(per_round)]
            for i, xi in picks:
                got = corrector.fn(session.oracles.query, i, session.rng)
                if got is not None and got != xi:
                    return Verdict(False, "corrector")
        return ACCEPT

    return _run(verifier, prover, OracleHandles(x_bits, dist=D), seed)


def hadamard_codeword(message: int, bits: int) -> tuple[int, ...]:
    """The table of x -> parity(message & x) over {0,1}^bits."""
    return tuple(bin(message & x).count("1") & 1 for x in range(1 << bits))


def hadamard_corrector(bits: int) -> CorrectorHandle:
    n = 1 << bits

    def fn(query, i, rng):
        r = rng.randrange(n)
        return query(i ^ r) ^ query(r)

    # relative distance of the code is 1/2; stay well inside delta/2
    return CorrectorHandle(query_budget=2, radius=Fraction(1, 8), fn=fn)


def blr_linearity_ipp(eps: Fraction, bits: int) -> Callable[[Session], Verdict]:
    """Prover-free uniform IPP for the Hadamard code: BLR linearity checks."""
    n = 1 << bits
    trials = math.ceil(Fraction(2) / eps)

    def verifier(session: Session) -> Verdict:
        for _ in range(trials):
            x = session.rng.randrange(n)
            y = session.rng.randrange(n)
            q = session.oracles.query
            if q(x) ^ q(y) != q(x ^ y):
                return Verdict(False, "uniform-ipp")
        return ACCEPT

    return verifier


class NullProver(ProverStrategy):
    """For prover-free (sub)protocols."""

    def reply(self, tag, payload):
        raise ProtocolViolation(f"null prover asked for {tag}")


# --- the honest prover (and adversarial variants) for folding protocols ----------

class HonestFoldProver(ProverStrategy):
    """Prover side of claims, folding, FinIPP, and the NC pipeline.

    Commits to the tensor handed to it: pass the true X for honesty, or any
    alternative W for the fixed-alternative-string adversary (committing to
    the mu-closest PVAL member is the analysis-optimal cheating strategy).
    All live folded tensors are materialized; at desk scale they are tiny.
    """

    def __init__(self, tensor: InputTensor, dist_desc=None):
        self.X = tensor
        self.dist_desc = dist_desc
        self.field = tensor.field
        self.k = tensor.k
        self.live: list[tuple[int, ...]] = []
        self.live_m = tensor.m
        self.points: tuple[tuple[int, ...], ...] = ()

    def observe(self, tag: str, sections) -> None:
        if tag == "fold/vectors":
            self._expand([tuple(v) for v in sections])

    def _expand(self, zs: list[tuple[int, ...]]) -> None:
        p = self.field.modulus
        per_tuple = len(zs) // len(self.live)
        step = len(self.live[0]) // self.k
        new_live = []
        for idx, data in enumerate(self.live):
            for j in range(per_tuple):
                z = zs[idx * per_tuple + j]
                out = [0] * step
                for i, zi in enumerate(z):
                    if zi:
                        base = i * step
                        for u in range(step):
                            out[u] = (out[u] + zi * data[base + u]) % p
                new_live.append(tuple(out))
        self.live = new_live
        self.live_m -= 1

    def reply(self, tag: str, payload):
        fb = self.field.bits
        if tag == "claims/values":
            return [(tuple(lde_eval_batch(self.X, payload)), fb)]
        if tag == "fold/matrix":
            if payload[0] == 0:
                _s, points, _values = payload
                self.live = [self.X.data]
                self.live_m = self.X.m
                self.points = tuple(points)
            return self._matrices()
        if tag == "fin/leaves":
            return [(data, fb) for data in self.live]
        raise ProtocolViolation(f"unexpected tag {tag}")

    def _matrices(self):
        fb = self.field.bits
        j2, _cols = project_points(self.points)
        sections = []
        row_m = self.live_m - 1
        for data in self.live:
            step = len(data) // self.k
            flat: list[int] = []
            for i in range(self.k):
                row = InputTensor(self.field, self.k, row_m, data[i * step:(i + 1) * step])
                flat.extend(lde_eval(row, pt) for pt in j2)
            sections.append((tuple(flat), fb))
        self.points = tuple(j2)  # children inherit the projected point set
        return sections


class RowTamperFoldProver(HonestFoldProver):
    """Corrupts one matrix entry of a chosen row in the first fold round."""

    def __init__(self, tensor: InputTensor, row: int, col: int = 0, delta: int = 1):
        super().__init__(tensor)
        self._tamper = (row, col, delta)

    def reply(self, tag, payload):
        sections = super().reply(tag, payload)
        if tag == "fold/matrix" and self._tamper is not None:
            row, col, delta = self._tamper
            self._tamper = None
            values, width = sections[0]
            t2 = len(values) // self.k
            values = list(values)
            values[row * t2 + col] = (values[row * t2 + col] + delta) % self.field.modulus
            sections[0] = (tuple(values), width)
        return sections


class RandomLieFoldProver(HonestFoldProver):
    """Perturbs each reply value independently with probability lie_prob."""

    def __init__(self, tensor: InputTensor, lie_prob: float, rng):
        super().__init__(tensor)
        self.lie_prob = lie_prob
        self.rng = rng

    def reply(self, tag, payload):
        sections = super().reply(tag, payload)
        p = self.field.modulus
        out = []
        for values, width in sections:
            vals = list(values)
            for i in range(len(vals)):
                if self.rng.random() < self.lie_prob:
                    vals[i] = (vals[i] + 1 + self.rng.randrange(p - 1)) % p
            out.append((tuple(vals), width))
        return out


# --- lemma checks ------------------------------------------------------------------

@dataclass
class InequalityReport:
    lhs: object
    rhs: object
    holds: bool
    vacuous: bool = False
    detail: str = ""


def check_distance_preservation(X: InputTensor, D: Pmf, Y: Sequence[Sequence[int]],
                                inst: PvalInstance,
                                budget: int = 10 ** 7) -> InequalityReport:
    """Row-distance preservation for the folding step.

    Given Y passing the step-1 column checks, verifies
        sum_i mu_{D^(p),U}(X[i,.], PVAL(J_2, Y[i,.]))  >=  (k/rho) * mu_{D,U}(X, PVAL(J,v))
    with exhaustive PVAL distance oracles on both sides.  Stated non-strict
    at the exact distance: that is the sharp form of the "far implies far"
    implication quantified over every eps below the true distance.
    """
    field, k, m = inst.field, inst.k, inst.m
    j2, cols = project_points(inst.points)
    for (pt, v), c in zip(zip(inst.points, inst.values), cols):
        column = [Y[i][c] for i in range(k)]
        if lagrange_eval_univariate(field, column, pt[0]) != v:
            return InequalityReport(None, None, False, detail="step-1 check fails")

    rho = dispersion_rho(D).rho
    uniform_full = Pmf.uniform(X.n, shape=(k, m))
    mu = dist_to_pval_bruteforce(X, inst, ("hybrid", D, uniform_full), budget=budget)
    if mu == INF:
        return InequalityReport(INF, INF, True, vacuous=True, detail="PVAL(J,v) empty")
    if mu == 0:
        return InequalityReport(None, Fraction(0), True, vacuous=True,
                                detail="member instance; bound vacuous")

    lhs = Fraction(0)
    for d_i in row_distances(X, D, Y, j2, budget=budget):
        if d_i == INF:
            return InequalityReport(INF, Fraction(k) / rho * mu, True,
                                    detail="some row PVAL empty")
        lhs += d_i
    rhs = Fraction(k) / rho * mu
    return InequalityReport(lhs, rhs, lhs >= rhs)


def row_distances(X: InputTensor, D: Pmf, Y: Sequence[Sequence[int]],
                  j2: Sequence[tuple[int, ...]], budget: int = 10 ** 7) -> list:
    """eps_i = mu_{D^(p),U}(X[i,.], PVAL(J_2, Y[i,.])) for every row, by brute force."""
    field, k, m = X.field, X.k, X.m
    marg = marginal_first(D)
    uniform_sub = Pmf.uniform(k ** (m - 1), shape=(k, m - 1))
    out = []
    for i in range(k):
        row = InputTensor(field, k, m - 1, X.row(i))
        row_inst = PvalInstance(field, k, m - 1, tuple(j2), tuple(Y[i]))
        out.append(dist_to_pval_bruteforce(row, row_inst, ("hybrid", marg, uniform_sub),
                                           budget=budget))
    return out


def span(field: PrimeField, basis: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    p = field.modulus
    vectors = [tuple(0 for _ in basis[0])]
    for b in basis:
        vectors = [tuple((v + c * bb) % p for v, bb in zip(vec, b))
                   for vec in vectors for c in range(p)]
        vectors = list(dict.fromkeys(vectors))  # collapse dependent bases
    return vectors


def check_subspace_lemma(field: PrimeField, S_basis, T_basis, metric) -> dict:
    """Exact form of the two-subspace distance lemma.

    If some s in S has d(s,T) = eps_max > 0, the fraction of r in S with
    d(r,T) < eps_max/2 is at most 1/(|F|-1).  S and T are exhausted, so the
    reported fraction has no sampling error; the strict < on the close side
    matches the one-point-per-line counting in the proof.
    """
    d = metric_fn(metric)
    S = span(field, S_basis)
    T = span(field, T_basis)
    dist_to_T = [min(d(s, t) for t in T) for s in S]
    eps_max = max(dist_to_T)
    if eps_max == 0:
        return {"vacuous": True, "fraction": None, "bound": None}
    close = sum(1 for v in dist_to_T if v < eps_max / 2)
    fraction = Fraction(close, len(S))
    bound = Fraction(1, field.modulus - 1)
    return {"vacuous": False, "eps": eps_max, "fraction": fraction, "bound": bound,
            "holds": fraction <= bound}


def check_appendix_claims(X: InputTensor, D: Pmf, Y: Sequence[Sequence[int]],
                          inst: PvalInstance, kappa: int, trials: int, seed: int,
                          budget: int = 10 ** 7) -> dict:
    """Statistical checks of the folding soundness claims.

    - witness search: some b in {0..log2 k} admits a row set I with
      |I| >= 2^b / (4 log2 k) and eps_i >= k*mu/(2^(b+1) rho) on I, whenever
      step 1 passed and the instance is certifiably far;
    - support-hit and folded-farness events over the verifier's choice of
      z_{a*}, measured against their stated probability bounds.
    """
    import random as _random

    field, k, m = inst.field, inst.k, inst.m
    p = field.modulus
    rho = dispersion_rho(D).rho
    uniform_full = Pmf.uniform(X.n, shape=(k, m))
    mu = dist_to_pval_bruteforce(X, inst, ("hybrid", D, uniform_full), budget=budget)
    j2, _cols = project_points(inst.points)
    eps_i = row_distances(X, D, Y, j2, budget=budget)
    log2k = math.log2(k)

    report: dict = {"mu": mu, "eps_i": eps_i, "rho": rho}
    if mu == 0 or mu == INF:
        report["sum_eps"] = {"vacuous": True}
        return report

    found = None
    for b in range(int(log2k) + 1):
        threshold = Fraction(k) * mu / (2 ** (b + 1) * rho)
        I = [i for i in range(k) if eps_i[i] >= threshold]
        if len(I) * 4 * log2k >= 2 ** b:
            found = {"b": b, "rows": I}
            break
    report["sum_eps"] = {"vacuous": False, "witness": found, "holds": found is not None}

    # a* = min(log(k/kappa), log k - b), clamped into the available classes
    classes = weight_classes(k, kappa)
    b = found["b"] if found else 0
    e = 0
    while (kappa << e) < k:
        e += 1
    a_star = min(max(min(e, int(log2k) - b), 1), len(classes))
    weight = classes[a_star - 1][1]

    marg = marginal_first(D)
    uniform_sub = Pmf.uniform(k ** (m - 1), shape=(k, m - 1))
    hit_threshold = mu * (2 ** a_star) / (2 * rho)
    far_threshold = mu * (2 ** a_star) / (4 * rho)
    rng = _random.Random(seed)
    misses = 0
    not_far = 0
    step = k ** (m - 1)
    for _ in range(trials):
        support = sorted(rng.sample(range(k), weight))
        if not any(eps_i[i] >= hit_threshold for i in support):
            misses += 1
        z = [0] * k
        for i in support:
            z[i] = rng.randrange(p)
        folded = tuple(
            sum(z[i] * X.data[i * step + u] for i in range(k)) % p
            for u in range(step))
        va = tuple(sum(z[i] * Y[i][c] for i in range(k)) % p for c in range(len(j2)))
        fold_inst = PvalInstance(field, k, m - 1, tuple(j2), va)
        fold_tensor = InputTensor(field, k, m - 1, folded)
        d = dist_to_pval_bruteforce(fold_tensor, fold_inst,
                                    ("hybrid", marg, uniform_sub), budget=budget)
        if d < far_threshold:
            not_far += 1

    miss_bound = math.exp(-kappa / (4 * log2k))
    far_bound = 1 / (p - 1) + math.exp(-kappa / (4 * log2k))
    report["support_hit"] = {"a_star": a_star, "weight": weight, "trials": trials,
                             "miss_rate": misses / trials, "bound": miss_bound}
    report["folded_far"] = {"fail_rate": not_far / trials, "bound": far_bound}
    return report
