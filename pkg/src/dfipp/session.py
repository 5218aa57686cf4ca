"""Two-party interactive session harness with exact cost accounting.

A protocol is a verifier function driving a Session; the prover is a
strategy object answering typed requests.  The prover strategy receives
only the explicit inputs, the full input X, the distribution description,
and the verifier's messages -- never the oracle handles or the verifier's
rng.  Every payload crossing between the parties is recorded as a Message
whose bit length uses a canonical fixed-width encoding (field elements are
ceil(log2 p) bits wide), so comm_bits is reproducible from the transcript.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

VERIFIER = "verifier"
PROVER = "prover"


class ProtocolViolation(Exception):
    """A malformed prover reply (wrong arity, width overflow, bad tag)."""


@dataclass(frozen=True)
class Section:
    """A run of equal-width values inside a message payload."""

    values: tuple[int, ...]
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be >= 1")
        for v in self.values:
            if not 0 <= v < (1 << self.width):
                raise ProtocolViolation(f"value {v} does not fit in {self.width} bits")

    @property
    def bits(self) -> int:
        return len(self.values) * self.width

    def to_hex(self) -> str:
        acc = 0
        for i, v in enumerate(self.values):
            acc |= v << (i * self.width)
        nbytes = (self.bits + 7) // 8
        return acc.to_bytes(max(nbytes, 1), "little").hex() if self.values else ""

    @staticmethod
    def from_hex(hexstr: str, count: int, width: int) -> "Section":
        if count == 0:
            return Section((), width)
        acc = int.from_bytes(bytes.fromhex(hexstr), "little")
        mask = (1 << width) - 1
        return Section(tuple((acc >> (i * width)) & mask for i in range(count)), width)


@dataclass(frozen=True)
class Message:
    sender: str
    tag: str
    sections: tuple[Section, ...]

    @property
    def bits(self) -> int:
        return sum(s.bits for s in self.sections)

    def values(self, i: int = 0) -> tuple[int, ...]:
        return self.sections[i].values


@dataclass
class CostLedger:
    """Exact counts of input queries, O_D(X) samples, payload bits, messages."""

    queries: int = 0
    samples: int = 0
    comm_bits: int = 0
    messages: int = 0

    @property
    def rounds(self) -> int:
        return (self.messages + 1) // 2

    def merge(self, other: "CostLedger") -> None:
        self.queries += other.queries
        self.samples += other.samples
        self.comm_bits += other.comm_bits
        self.messages += other.messages


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reject_reason: Optional[str] = None

    def __post_init__(self):
        if self.accepted and self.reject_reason is not None:
            raise ValueError("accepting verdicts carry no reject reason")
        if not self.accepted and self.reject_reason is None:
            raise ValueError("rejecting verdicts must name the failed step")


ACCEPT = Verdict(True)


class OracleHandles:
    """Query oracle i -> X_i, sample oracle -> (i, X_i), optional white-box handle.

    Queries and samples increment the session ledger; the prover never sees
    these handles.  `dist` may be a Pmf, ProductDistribution, or None (the
    white-box setting, where `circuit` carries the sampling device).
    """

    def __init__(self, values: Sequence[int], dist=None, circuit=None):
        self.values = values
        self.dist = dist
        self.circuit = circuit
        self.ledger: Optional[CostLedger] = None
        self._rng: Optional[random.Random] = None

    def bind(self, ledger: CostLedger, rng: random.Random) -> None:
        self.ledger = ledger
        self._rng = rng

    def query(self, i: int) -> int:
        self.ledger.queries += 1
        return self.values[i]

    def sample(self) -> tuple[int, int]:
        if self.dist is None:
            raise ProtocolViolation("no sample oracle bound (white-box session?)")
        self.ledger.samples += 1
        i = self.dist.sample(self._rng)
        return i, self.values[i]


class ProverStrategy:
    """Base class: concrete strategies implement reply(tag, payload) -> sections.

    payload carries only values already shared (explicit inputs or prior
    verifier messages); replies are lists of (values, width) pairs.  The
    harness delivers every verifier message through observe().
    """

    def reply(self, tag: str, payload) -> list[tuple[Sequence[int], int]]:
        raise NotImplementedError

    def observe(self, tag: str, sections) -> None:
        pass


class Session:
    """One deterministic protocol execution: rng, oracles, transcript, ledger."""

    def __init__(self, prover: ProverStrategy, oracles: OracleHandles, seed: int):
        self.prover = prover
        self.oracles = oracles
        self.seed = seed
        self.rng = random.Random(seed)
        self.ledger = CostLedger()
        self.transcript: list[Message] = []
        self.notes: list[str] = []
        oracles.bind(self.ledger, self.rng)

    def note(self, text: str) -> None:
        self.notes.append(text)

    def _record(self, sender: str, tag: str, sections) -> Message:
        msg = Message(sender, tag, tuple(Section(tuple(v), w) for v, w in sections))
        self.transcript.append(msg)
        self.ledger.messages += 1
        self.ledger.comm_bits += msg.bits
        return msg

    def tell(self, tag: str, sections) -> Message:
        """Record a verifier -> prover message and deliver it to the prover."""
        msg = self._record(VERIFIER, tag, sections)
        self.prover.observe(tag, [s.values for s in msg.sections])
        return msg

    def ask(self, tag: str, payload, expect: Optional[list[tuple[int, int]]] = None) -> Message:
        """Obtain and record a prover -> verifier message.

        `expect` is a list of (count, width) shapes; any mismatch raises
        ProtocolViolation, which run_session converts to reject "malformed".
        """
        raw = self.prover.reply(tag, payload)
        try:
            msg = self._record(PROVER, tag, raw)
        except ProtocolViolation:
            raise
        except Exception as exc:  # wrong structure from an adversarial strategy
            raise ProtocolViolation(str(exc))
        if expect is not None:
            if len(msg.sections) != len(expect):
                raise ProtocolViolation(
                    f"{tag}: expected {len(expect)} sections, got {len(msg.sections)}")
            for s, (count, width) in zip(msg.sections, expect):
                if len(s.values) != count or s.width != width:
                    raise ProtocolViolation(
                        f"{tag}: expected {count} values of width {width}, "
                        f"got {len(s.values)} of width {s.width}")
        return msg


def run_session(verifier: Callable[[Session], Verdict], prover: ProverStrategy,
                oracles: OracleHandles, seed: int):
    """Drive the interaction to completion; deterministic given the seed."""
    session = Session(prover, oracles, seed)
    try:
        verdict = verifier(session)
    except ProtocolViolation as exc:
        session.note(f"malformed: {exc}")
        verdict = Verdict(False, "malformed")
    return verdict, session.ledger, session.transcript, session.notes


def amplify(run_once: Callable[[int], tuple], repetitions: int, rule: str, seed: int):
    """Independent sessions with derived seeds; verdicts combined per rule."""
    if repetitions < 1:
        raise ValueError("repetitions >= 1")
    if rule not in ("all-accept", "majority"):
        raise ValueError(f"unknown rule {rule!r}")
    seeder = random.Random(seed)
    total = CostLedger()
    accepts = 0
    first_reject = None
    for _ in range(repetitions):
        result = run_once(seeder.getrandbits(63))
        verdict, ledger = result[0], result[1]
        total.merge(ledger)
        if verdict.accepted:
            accepts += 1
        elif first_reject is None:
            first_reject = verdict
    if rule == "all-accept":
        verdict = ACCEPT if accepts == repetitions else first_reject
    else:
        verdict = ACCEPT if 2 * accepts > repetitions else \
            (first_reject or Verdict(False, "majority"))
    return verdict, total


# --- transcript dump / replay ------------------------------------------------

def dump_transcript(path: str, header: dict, transcript: Sequence[Message],
                    verdict: Verdict, ledger: CostLedger) -> None:
    """JSON lines: one header line, one line per message, one trailer line."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"header": header}, sort_keys=True) + "\n")
        for msg in transcript:
            fh.write(json.dumps({
                "sender": msg.sender, "tag": msg.tag,
                "sections": [{"hex": s.to_hex(), "n": len(s.values), "w": s.width}
                             for s in msg.sections],
            }, sort_keys=True) + "\n")
        fh.write(json.dumps({"trailer": {
            "accepted": verdict.accepted, "reject_reason": verdict.reject_reason,
            "queries": ledger.queries, "samples": ledger.samples,
            "comm_bits": ledger.comm_bits, "messages": ledger.messages,
        }}, sort_keys=True) + "\n")


def load_transcript(path: str):
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    header = lines[0]["header"]
    trailer = lines[-1]["trailer"]
    messages = [
        Message(rec["sender"], rec["tag"],
                tuple(Section.from_hex(s["hex"], s["n"], s["w"]) for s in rec["sections"]))
        for rec in lines[1:-1]
    ]
    return header, messages, trailer


class ReplayProver(ProverStrategy):
    """Replays the prover messages of a recorded transcript in order."""

    def __init__(self, messages: Sequence[Message]):
        self._queue = [m for m in messages if m.sender == PROVER]
        self._pos = 0

    def reply(self, tag, payload):
        if self._pos >= len(self._queue):
            raise ProtocolViolation("transcript exhausted")
        msg = self._queue[self._pos]
        self._pos += 1
        if msg.tag != tag:
            raise ProtocolViolation(f"transcript tag {msg.tag!r} != requested {tag!r}")
        return [(s.values, s.width) for s in msg.sections]
