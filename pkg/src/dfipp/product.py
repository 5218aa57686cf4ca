"""Product-distribution machinery: the parallel set-lower-bound interactive
proof, extended polynomial folding over granular extensions, the white-box
product-distribution PVAL IPP, the product distance-preservation check, and
the learnable-distribution pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .field import InputTensor, PrimeField, lagrange_eval_univariate, lde_eval
from .tensors import BudgetExceeded, INF, PvalInstance, dist_to_pval_bruteforce
from .distributions import (GranularitySet, Pmf, ProductDistribution, SamplingCircuit,
                            extension_row_map, granularise, make_uniform_oracle)
from .session import (ACCEPT, OracleHandles, ProtocolViolation, ProverStrategy, Session,
                      Verdict)
from .protocols import (FoldState, RunResult, _run, folded_eval, project_points,
                        weight_classes)

_RATIONAL_BITS = 64


def _encode_fraction(f: Fraction) -> tuple[int, int]:
    if f.numerator < 0 or f.numerator >= (1 << _RATIONAL_BITS) or \
            f.denominator >= (1 << _RATIONAL_BITS):
        raise ProtocolViolation(f"rational {f} does not fit the wire format")
    return f.numerator, f.denominator


@dataclass(frozen=True)
class MarginalClaim:
    """Claimed factor probabilities with the lower-bound slack and error budget."""

    probs: tuple[Fraction, ...]
    tau: Fraction
    delta: Fraction

    def __post_init__(self):
        if any(p < 0 for p in self.probs):
            raise ValueError("negative claimed probability")
        if sum(self.probs) > 1:
            raise ValueError("claimed probabilities exceed 1")


# --- parallel Goldwasser-Sipser set lower bound --------------------------------

def _bucket_bits(N: Fraction, ell: int, tau: Fraction, delta_sym: Fraction) -> int:
    """Largest b with 2^b <= delta*tau^2*N^2 / (4*2^ell); one Chebyshev round
    then meets both error bounds.  0 means exact counting."""
    cap = delta_sym * tau * tau * N * N / (4 * (1 << ell))
    b = 0
    while (1 << (b + 1)) <= cap:
        b += 1
    return b if cap >= 1 else 0


def _hash_zero(rows: Sequence[int], c: int, x: int) -> bool:
    for j, row in enumerate(rows):
        if (bin(row & x).count("1") & 1) != ((c >> j) & 1):
            return False
    return True


def slb_verify(session: Session, circuit: SamplingCircuit, claim: MarginalClaim,
               symbol_of: Callable[[int], int], n_symbols: int,
               bucket_bits: Optional[int] = None,
               tag_prefix: str = "slb") -> Verdict:
    """One parallel set-lower-bound interactive proof.

    For each symbol i with claimed probability p_i > 0, the verifier draws a
    random affine GF(2) hash, the prover returns every preimage of i hashed
    to zero, and the verifier re-evaluates each witness.  Accepts iff every
    estimated preimage count clears (1 - tau/2) * p_i * 2^ell.

    Completeness >= 1-delta when the true masses dominate the claims;
    soundness <= delta when some claim overstates by 1/(1-tau).
    """
    ell = circuit.n_inputs
    active = [i for i in range(n_symbols) if claim.probs[i] > 0]
    if not active:
        return ACCEPT
    delta_sym = claim.delta / len(active)

    hashes = []
    hash_sections = []
    for i in active:
        N = claim.probs[i] * (1 << ell)
        b = bucket_bits if bucket_bits is not None else _bucket_bits(
            N, ell, claim.tau, delta_sym)
        rows = tuple(session.rng.getrandbits(ell) for _ in range(b))
        c = session.rng.getrandbits(b) if b else 0
        hashes.append((i, N, b, rows, c))
        hash_sections.append((rows + (c,), max(ell, 1)))
    session.tell(f"{tag_prefix}/hash", hash_sections)

    msg = session.ask(f"{tag_prefix}/witness",
                      [(i, b, rows, c) for (i, N, b, rows, c) in hashes])
    if len(msg.sections) != len(active):
        raise ProtocolViolation("one witness list per active symbol required")
    for (i, N, b, rows, c), sec in zip(hashes, msg.sections):
        witnesses = sec.values
        if sec.width != max(ell, 1) or len(witnesses) > (1 << ell):
            raise ProtocolViolation("witness section malformed")
        seen = set()
        for x in witnesses:
            if x in seen or x >= (1 << ell) or not _hash_zero(rows, c, x) \
                    or symbol_of(circuit.eval(x)) != i:
                return Verdict(False, "witness")
            seen.add(x)
        if Fraction(len(witnesses) * (1 << b)) < (1 - claim.tau / 2) * N:
            return Verdict(False, "lower-bound")
    return ACCEPT


class HonestSlbProver(ProverStrategy):
    """Enumerates all 2^ell circuit inputs and answers hash rounds exactly."""

    def __init__(self, circuit: SamplingCircuit, symbol_of: Callable[[int], int],
                 budget: int = 20):
        if circuit.n_inputs > budget:
            raise BudgetExceeded("honest prover enumeration over budget")
        self.circuit = circuit
        self.symbol_of = symbol_of
        self.ell = circuit.n_inputs
        self._preimages: dict[int, list[int]] = {}
        for x in range(1 << self.ell):
            self._preimages.setdefault(symbol_of(circuit.eval(x)), []).append(x)

    def reply(self, tag, payload):
        if not tag.endswith("/witness"):
            raise ProtocolViolation(f"unexpected tag {tag}")
        out = []
        for i, b, rows, c in payload:
            xs = [x for x in self._preimages.get(i, ()) if _hash_zero(rows, c, x)]
            out.append((tuple(xs), max(self.ell, 1)))
        return out


def run_set_lower_bound(circuit: SamplingCircuit, claim: MarginalClaim,
                        prover: ProverStrategy, seed: int,
                        symbol_of: Optional[Callable[[int], int]] = None,
                        n_symbols: Optional[int] = None,
                        bucket_bits: Optional[int] = None) -> RunResult:
    symbol_of = symbol_of or (lambda y: y)
    n_symbols = n_symbols or len(claim.probs)
    oracles = OracleHandles((), circuit=circuit)
    return _run(lambda s: slb_verify(s, circuit, claim, symbol_of, n_symbols,
                                     bucket_bits),
                prover, oracles, seed)


# --- extended polynomial folding -------------------------------------------------

def wb_fold_kappa(r: int, k: int) -> int:
    """kappa = 32 * log2(8k) * log2(max(r,2)), floored to at least 1."""
    return max(1, math.ceil(32 * math.log2(8 * k) * math.log2(max(r, 2))))


def extended_fold_phase(session: Session, live: list[FoldState], k: int,
                        field: PrimeField, kappa: int, B: GranularitySet,
                        ask_payload):
    """Fold every live tuple through the B-extension of g_cat of its view.

    The prover sends the plain k-row matrices; the verifier checks columns
    against the current claims, extends g_cat(Y~) by B into 8k rows, and
    draws folding vectors in F^(8k).  Children carry the extension row map
    so folded coordinates trace back to source rows (or the zero row).
    """
    p, fb = field.modulus, field.bits
    projections = [project_points(st.points) for st in live]
    expect = [(k * len(j2), fb) for (j2, _) in projections]
    msg = session.ask("fold/matrix", ask_payload, expect=expect)

    counts = B.counts if isinstance(B, GranularitySet) else tuple(B)
    rowmap = extension_row_map(counts)
    ext_rows = len(rowmap)
    matrices = []
    for st, (j2, cols), sec in zip(live, projections, msg.sections):
        t2 = len(j2)
        Y = [sec.values[i * t2:(i + 1) * t2] for i in range(k)]
        for (pt, v), c in zip(zip(st.points, st.values), cols):
            column = [Y[i][c] for i in range(k)]
            if lagrange_eval_univariate(field, column, pt[0]) != v:
                return None, Verdict(False, "fold-consistency")
        zero_row = (0,) * t2
        U = [zero_row if src == k else Y[src] for src in rowmap]
        matrices.append((U, j2))

    classes = weight_classes(ext_rows, kappa, session.notes)
    children: list[FoldState] = []
    z_sections = []
    for st, (U, j2) in zip(live, matrices):
        for a, weight in classes:
            support = tuple(sorted(session.rng.sample(range(ext_rows), weight)))
            z = [0] * ext_rows
            for i in support:
                z[i] = session.rng.randrange(p)
            va = tuple(sum(z[i] * U[i][c] for i in range(ext_rows)) % p
                       for c in range(len(j2)))
            children.append(FoldState(
                zs=st.zs + (tuple(z),),
                supports=st.supports + (support,),
                rowmaps=st.rowmaps + (rowmap,),
                weights=st.weights + (a,),
                points=tuple(j2),
                values=va,
            ))
            z_sections.append((tuple(z), fb))
    session.tell("fold/vectors", z_sections)
    return children, None


def run_extended_poly_fold(X: InputTensor, inst: PvalInstance, B,
                           kappa: int, prover: ProverStrategy, seed: int):
    """Stand-alone extended folding round; returns (RunResult, outputs or None)."""
    holder: dict = {}

    def verifier(session: Session) -> Verdict:
        root = FoldState((), (), (), (), inst.points, inst.values)
        children, verdict = extended_fold_phase(
            session, [root], inst.k, inst.field, kappa, B,
            ask_payload=(0, inst.points, inst.values))
        if verdict is not None:
            return verdict
        holder["children"] = children
        return ACCEPT

    result = _run(verifier, prover, OracleHandles(X.data), seed)
    return result, holder.get("children")


# --- the white-box product IPP ----------------------------------------------------

def _coord_of(idx: int, k: int, m: int, dim: int) -> int:
    return (idx // k ** (m - 1 - dim)) % k


def whitebox_verifier(session: Session, X: InputTensor, inst: PvalInstance,
                      eps: Fraction, circuit: SamplingCircuit, r: int,
                      tau: Fraction, delta: Fraction,
                      kappa_override: Optional[int],
                      bucket_bits: Optional[int]) -> Verdict:
    field, k, m = inst.field, inst.k, inst.m
    if not 1 <= r <= m - 1:
        raise ValueError("round parameter must satisfy 1 <= r <= m-1")
    kappa = kappa_override if kappa_override is not None else wb_fold_kappa(r, k)
    session.note(f"kappa = {kappa}")

    live = [FoldState((), (), (), (), inst.points, inst.values)]
    for rnd in range(r):
        msg = session.ask("wb/marginal", rnd, expect=[(2 * k, _RATIONAL_BITS)])
        pairs = msg.values()
        probs = tuple(Fraction(pairs[2 * i], pairs[2 * i + 1] or 1) for i in range(k))
        if any(p < 0 for p in probs) or sum(probs) != 1:
            return Verdict(False, "marginal")
        claim = MarginalClaim(probs, tau, delta)
        verdict = slb_verify(session, circuit, claim,
                             symbol_of=lambda y, d=rnd: _coord_of(y, k, m, d),
                             n_symbols=k, bucket_bits=bucket_bits)
        if not verdict.accepted:
            return Verdict(False, "learner")
        B = granularise(Pmf(probs))
        payload = (rnd, inst.points, inst.values) if rnd == 0 else (rnd,)
        live, verdict = extended_fold_phase(session, live, k, field, kappa, B, payload)
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
            eps_r = eps_r * Fraction(2 ** a, 16)
        nq = math.ceil(Fraction(10) / eps_r)
        session.note(f"leaf weights={'.'.join(map(str, st.weights))} "
                     f"tau={st.tau} nq={nq} eps_r={eps_r}")
        batches = [[tuple(session.rng.randrange(k) for _ in range(m - r))
                    for _ in range(nq)]]
        # truncated-product draws via the sampling device: a full index from C,
        # first r coordinates dropped -- the suffix of a product is the product
        # of the remaining factors
        drawn = []
        for _ in range(nq):
            idx = circuit.eval(session.rng.getrandbits(circuit.n_inputs))
            drawn.append(X.coords(idx)[r:])
        batches.append(drawn)
        for batch in batches:
            for coords in batch:
                if leaf.cell(coords) != folded_eval(session.oracles, X, st, coords):
                    return Verdict(False, "leaf-sample")
    return ACCEPT


def run_whitebox_product_ipp(X: InputTensor, inst: PvalInstance, eps: Fraction,
                             circuit: SamplingCircuit, r: int,
                             prover: ProverStrategy, seed: int,
                             tau: Fraction = Fraction(1, 1000),
                             delta: Optional[Fraction] = None,
                             kappa_override: Optional[int] = None,
                             bucket_bits: Optional[int] = None) -> RunResult:
    """White-box PVAL IPP over m-product distributions.

    No sample oracle is bound: every distribution access goes through the
    sampling circuit, so the ledger's sample count stays 0.
    """
    delta = delta if delta is not None else Fraction(1, 20 * r)
    oracles = OracleHandles(X.data, circuit=circuit)
    return _run(lambda s: whitebox_verifier(s, X, inst, eps, circuit, r, tau, delta,
                                            kappa_override, bucket_bits),
                prover, oracles, seed)


class WhiteboxFoldProver(ProverStrategy):
    """Prover side of the white-box IPP.

    Sends the true factor marginals (an honest learner never trips the set
    lower bound), mirrors the verifier's granularisation and extensions on
    its committed tensor, and answers folding and leaf requests from that
    state.  Commit to a tensor other than X to get the fixed-alternative
    adversary; override marginal() for distribution-lying strategies.
    """

    def __init__(self, tensor: InputTensor, factors: Sequence[Pmf],
                 circuit: SamplingCircuit, budget: int = 20):
        self.X = tensor
        self.field = tensor.field
        self.k = tensor.k
        self.factors = tuple(factors)
        self.slb = HonestSlbProver(circuit, lambda y: y, budget=budget)
        self.live: list[tuple[int, ...]] = []
        self.live_m = tensor.m
        self.points: tuple = ()
        self.round = -1
        self.claims_sent: list[tuple[Fraction, ...]] = []

    def marginal(self, rnd: int) -> tuple[Fraction, ...]:
        return tuple(self.factors[rnd].masses)

    def reply(self, tag, payload):
        fb = self.field.bits
        if tag == "wb/marginal":
            self.round = payload
            probs = self.marginal(payload)
            self.claims_sent.append(probs)
            flat = []
            for p in probs:
                flat.extend(_encode_fraction(p))
            return [(tuple(flat), _RATIONAL_BITS)]
        if tag == "slb/witness":
            dim = self.round
            k, m = self.k, self.X.m
            out = []
            for i, b, rows, c in payload:
                xs = [x for x in range(1 << self.slb.ell)
                      if _coord_of(self.slb.circuit.eval(x), k, m, dim) == i
                      and _hash_zero(rows, c, x)]
                out.append((tuple(xs), max(self.slb.ell, 1)))
            return out
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

    def observe(self, tag, sections):
        if tag == "fold/vectors":
            self._expand([tuple(v) for v in sections])

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
        self.points = tuple(j2)
        return sections

    def _expand(self, zs):
        p = self.field.modulus
        B = granularise(Pmf(self.claims_sent[-1]))
        rowmap = extension_row_map(B.counts)
        per_tuple = len(zs) // len(self.live)
        step = len(self.live[0]) // self.k
        new_live = []
        for idx, data in enumerate(self.live):
            for j in range(per_tuple):
                z = zs[idx * per_tuple + j]
                out = [0] * step
                for i, zi in enumerate(z):
                    src = rowmap[i]
                    if zi == 0 or src == self.k:
                        continue
                    base = src * step
                    for u in range(step):
                        out[u] = (out[u] + zi * data[base + u]) % p
                new_live.append(tuple(out))
        self.live = new_live
        self.live_m -= 1


# --- product distance preservation -------------------------------------------------

@dataclass
class ProductDplReport:
    gamma: object
    lhs: object
    rhs: object
    holds: bool
    vacuous: bool = False


def check_product_dpl(X: InputTensor, tail_factors: Sequence[Pmf],
                      Y: Sequence[Sequence[int]], B: GranularitySet,
                      inst: PvalInstance, tau: Fraction,
                      budget: int = 10 ** 7) -> ProductDplReport:
    """Distance preservation for one extended folding round.

    gamma = mu_{D-hat, U-hat}(X, PVAL(J, v)); the lemma's consequent is
    sum_{i=1}^{8k} mu(X'_i, PVAL(J_2, U_i)) > 2k(1-tau)*gamma, checked in
    its sharp non-strict form at the exact gamma.
    """
    field, k, m = inst.field, inst.k, inst.m
    Dhat = ProductDistribution(tail_factors).joint_pmf()
    uniform_full = Pmf.uniform(X.n, shape=(k, m))
    gamma = dist_to_pval_bruteforce(X, inst, ("hybrid", Dhat, uniform_full),
                                    budget=budget)
    if gamma == 0 or gamma == INF:
        return ProductDplReport(gamma, None, None, True, vacuous=True)

    j2, _cols = project_points(inst.points)
    rowmap = extension_row_map(B.counts)
    Dhat2 = ProductDistribution(tail_factors[1:]).joint_pmf()
    uniform_sub = Pmf.uniform(k ** (m - 1), shape=(k, m - 1))
    zero_data = (0,) * k ** (m - 1)
    zero_claims = (0,) * len(j2)

    lhs = Fraction(0)
    for src in rowmap:
        row_data = zero_data if src == k else X.row(src)
        row_claims = zero_claims if src == k else tuple(Y[src])
        row = InputTensor(field, k, m - 1, row_data)
        row_inst = PvalInstance(field, k, m - 1, tuple(j2), row_claims)
        d = dist_to_pval_bruteforce(row, row_inst, ("hybrid", Dhat2, uniform_sub),
                                    budget=budget)
        if d == INF:
            return ProductDplReport(gamma, INF, 2 * k * (1 - tau) * gamma, True)
        lhs += d
    rhs = 2 * k * (1 - tau) * gamma
    return ProductDplReport(gamma, lhs, rhs, lhs >= rhs)


# --- learnable-distribution pipeline ------------------------------------------------

def run_learnable_ipp(x_bits: Sequence[int], D, eps: Fraction,
                      learner: Callable[[Session], Optional[Pmf]],
                      uniform_ipp_factory: Callable,
                      prover: ProverStrategy, seed: int) -> RunResult:
    """Learn the distribution at eps/2, granularise, run a uniform IPP at eps/4.

    The learner returns a Pmf (claimed within eps/2 total variation in the
    L1 convention, without the 1/2 factor) or None for reject.  uniform_ipp_factory(Q, eps4)
    builds the uniform verifier for the extended parameterised language; it
    receives a virtual-oracle query function whose every real-slot query
    costs exactly one source query.
    """
    n = len(x_bits)

    def verifier(session: Session) -> Verdict:
        learned = learner(session)
        if learned is None:
            return Verdict(False, "learner-abort")
        Q, virt = make_uniform_oracle(learned, session.oracles.query)
        width = max(1, n.bit_length())
        session.tell("learn/q", [(Q, width)])
        inner = uniform_ipp_factory(Q, eps / 4)
        return inner(session, virt.query)

    return _run(verifier, prover, OracleHandles(x_bits, dist=D), seed)


def extension_member(base_language: Callable[[tuple], bool], Q: Sequence[int],
                     n: int, virt: Sequence[int]) -> bool:
    """Is virt the Q-extension of g_cat of some member of the base language?

    Needs: zero slots hold 0, slots backed by the same source index agree,
    and the implied base string is a member.
    """
    source: dict[int, int] = {}
    for slot, src in enumerate(Q):
        if src == n:
            if virt[slot] != 0:
                return False
        elif src in source:
            if virt[slot] != source[src]:
                return False
        else:
            source[src] = virt[slot]
    return base_language(tuple(source[i] for i in range(n)))


def explicit_set_uniform_ipp(base_language: Callable[[tuple], bool], n: int,
                             c: int = 10):
    """The generic uniform IPP for an explicitly decidable language: the
    prover sends a claimed member of the extended language, the verifier
    checks membership and spot-checks agreement with the virtual input on
    ceil(c/eps) uniform coordinates."""

    def factory(Q, eps4: Fraction):
        n_virtual = len(Q)

        def ipp(session: Session, vquery) -> Verdict:
            msg = session.ask("set/member", None, expect=[(n_virtual, 1)])
            cand = msg.values()
            if not extension_member(base_language, Q, n, cand):
                return Verdict(False, "not-member")
            trials = math.ceil(Fraction(c) / eps4)
            for _ in range(trials):
                j = session.rng.randrange(n_virtual)
                if cand[j] != vquery(j):
                    return Verdict(False, "spot-check")
            return ACCEPT
        return ipp

    return factory


class ExtensionEchoProver(ProverStrategy):
    """Sends the extension of g_cat of its committed string along the told Q."""

    def __init__(self, bits: Sequence[int]):
        self.bits = tuple(bits)
        self.Q: Optional[tuple[int, ...]] = None

    def observe(self, tag, sections):
        if tag == "learn/q":
            self.Q = tuple(sections[0])

    def reply(self, tag, payload):
        if tag == "set/member":
            n = len(self.bits)
            virt = tuple(0 if q == n else self.bits[q] for q in self.Q)
            return [(virt, 1)]
        raise ProtocolViolation(f"unexpected tag {tag}")


class FixedStringProver(ProverStrategy):
    """Sends a fixed virtual string (the optimal cheating strategy commits
    to the closest member of the extended language)."""

    def __init__(self, virt_bits: Sequence[int]):
        self.virt = tuple(virt_bits)

    def reply(self, tag, payload):
        if tag == "set/member":
            return [(self.virt, 1)]
        raise ProtocolViolation(f"unexpected tag {tag}")


def exact_learner(D: Pmf):
    """Learner fixture that returns the true distribution (zero TV error)."""
    return lambda session: D


def aborting_learner(session: Session):
    return None


# --- fixtures -----------------------------------------------------------------------

def _dyadic_factor(k: int, profile: str, rng, grain_bits: int = 4) -> Pmf:
    if profile == "uniform":
        return Pmf.uniform(k)
    if profile == "point":
        return Pmf.point_mass(0, k)
    if profile == "dyadic-random":
        total = 1 << grain_bits
        counts = [0] * k
        for _ in range(total):
            counts[rng.randrange(k)] += 1
        return Pmf([Fraction(c, total) for c in counts])
    raise ValueError(f"unknown factor profile {profile!r}")


def _factor_circuit(factor: Pmf, out_bits: int) -> SamplingCircuit:
    denom = 1
    for mass in factor.masses:
        denom = math.lcm(denom, mass.denominator)
    if denom & (denom - 1):
        raise ValueError("factor masses must be dyadic")
    d = max(1, denom.bit_length() - 1)
    table = []
    acc = Fraction(0)
    bounds = []
    for mass in factor.masses:
        acc += mass
        bounds.append(acc * (1 << d))
    for u in range(1 << d):
        sym = next(i for i, bd in enumerate(bounds) if u < bd)
        table.append(sym)
    return SamplingCircuit.from_table(d, table, out_bits)


def _concat_circuits(circuits: Sequence[SamplingCircuit]) -> SamplingCircuit:
    """Independent inputs side by side; factor 1's output lands in the top bits."""
    total_inputs = sum(c.n_inputs for c in circuits)
    gates: list[tuple] = []
    outputs_rev: list[int] = []
    in_off = 0
    m = len(circuits)
    out_groups = []
    for c in circuits:
        gate_off = total_inputs + len(gates)

        def remap(w, in_off=in_off, gate_off=gate_off, c=c):
            return in_off + w if w < c.n_inputs else gate_off + (w - c.n_inputs)

        for g in c.gates:
            gates.append((g[0],) + tuple(remap(w) for w in g[1:]))
        out_groups.append([remap(w) for w in c.outputs])
        in_off += c.n_inputs
    # flat cell index = sum_t i_t * k^(m-t): factor m occupies the low bits
    outputs: list[int] = []
    for grp in reversed(out_groups):
        outputs.extend(grp)
    return SamplingCircuit(total_inputs, tuple(gates), tuple(outputs))


def gen_product_fixture(k: int, m: int, profile: str, rng=None,
                        grain_bits: int = 4):
    """(ProductDistribution, SamplingCircuit) pairs with exactly matching laws.

    profile: "uniform" | "row-concentrated" | "dyadic-random".  Masses are
    dyadic and k must be a power of two so a circuit realizes the
    distribution exactly (circuit_pmf round-trips).
    """
    if k & (k - 1):
        raise ValueError("k must be a power of two for exact circuit samplers")
    out_bits = k.bit_length() - 1
    if profile == "uniform":
        profiles = ["uniform"] * m
    elif profile == "row-concentrated":
        profiles = ["point"] + ["uniform"] * (m - 1)
    elif profile == "dyadic-random":
        if rng is None:
            raise ValueError("dyadic-random needs an rng")
        profiles = ["dyadic-random"] * m
    else:
        raise ValueError(f"unknown profile {profile!r}")
    factors = [_dyadic_factor(k, pr, rng, grain_bits) for pr in profiles]
    circuit = _concat_circuits([_factor_circuit(f, out_bits) for f in factors])
    return ProductDistribution(factors), circuit
