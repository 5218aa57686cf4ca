import math

import pytest

from dfipp.session import (ACCEPT, OracleHandles, ProtocolViolation, ProverStrategy,
                           ReplayProver, Section, Verdict, amplify, dump_transcript,
                           load_transcript, run_session)
from dfipp.distributions import Pmf


class EchoProver(ProverStrategy):
    def __init__(self):
        self.x = None

    def observe(self, tag, sections):
        if tag == "echo/x":
            self.x = tuple(sections[0])

    def reply(self, tag, payload):
        return [(self.x, 1)]


class WrongArityProver(EchoProver):
    def reply(self, tag, payload):
        return [(self.x[:-1], 1)]


def echo_verifier(bits):
    def verifier(session):
        x = tuple(session.rng.getrandbits(1) for _ in range(bits))
        session.tell("echo/x", [(x, 1)])
        msg = session.ask("echo/reply", None, expect=[(bits, 1)])
        return ACCEPT if msg.values() == x else Verdict(False, "echo-mismatch")
    return verifier


def test_echo_accounting():
    bits = 16
    verdict, ledger, transcript, _ = run_session(echo_verifier(bits), EchoProver(),
                                                 OracleHandles(()), seed=1)
    assert verdict.accepted
    assert ledger.comm_bits == 2 * bits
    assert ledger.messages == 2
    assert ledger.rounds == 1
    assert ledger.queries == 0 and ledger.samples == 0


def test_wrong_arity_is_malformed():
    verdict, *_ = run_session(echo_verifier(8), WrongArityProver(), OracleHandles(()), 1)
    assert not verdict.accepted
    assert verdict.reject_reason == "malformed"


def test_same_seed_same_everything():
    runs = [run_session(echo_verifier(32), EchoProver(), OracleHandles(()), seed=99)
            for _ in range(2)]
    (v1, l1, t1, _), (v2, l2, t2, _) = runs
    assert v1 == v2
    assert (l1.queries, l1.samples, l1.comm_bits, l1.messages) == \
        (l2.queries, l2.samples, l2.comm_bits, l2.messages)
    assert t1 == t2


def test_ledger_conservation():
    _, ledger, transcript, _ = run_session(echo_verifier(20), EchoProver(),
                                           OracleHandles(()), seed=5)
    assert ledger.comm_bits == sum(m.bits for m in transcript)


def test_oracles_count_and_label():
    values = (5, 6, 7, 8)
    oracles = OracleHandles(values, dist=Pmf.point_mass(2, 4))

    def verifier(session):
        i, v = session.oracles.sample()
        assert (i, v) == (2, 7)
        assert session.oracles.query(0) == 5
        return ACCEPT

    verdict, ledger, _, _ = run_session(verifier, EchoProver(), oracles, 0)
    assert verdict.accepted
    assert ledger.samples == 1 and ledger.queries == 1


def test_section_width_validation():
    with pytest.raises(ProtocolViolation):
        Section((2,), 1)
    sec = Section((1, 0, 1), 1)
    assert sec.bits == 3
    assert Section.from_hex(sec.to_hex(), 3, 1) == sec


def test_section_hex_round_trip_wide():
    sec = Section((1023, 0, 512), 10)
    assert Section.from_hex(sec.to_hex(), 3, 10) == sec


def test_verdict_invariants():
    with pytest.raises(ValueError):
        Verdict(True, "reason")
    with pytest.raises(ValueError):
        Verdict(False)


def coin_protocol(p_reject: float):
    def run_once(seed):
        def verifier(session):
            if session.rng.random() < p_reject:
                return Verdict(False, "coin")
            return ACCEPT
        return run_session(verifier, EchoProver(), OracleHandles(()), seed)
    return run_once


def test_amplify_single_repetition_identity():
    verdict, ledger = amplify(coin_protocol(0.0), 1, "all-accept", seed=3)
    assert verdict.accepted


def test_amplify_preserves_perfect_completeness():
    verdict, _ = amplify(coin_protocol(0.0), 25, "all-accept", seed=4)
    assert verdict.accepted


def test_amplify_all_accept_reject_rate():
    p, reps, trials = 0.3, 4, 1000
    rejected = 0
    for t in range(trials):
        verdict, _ = amplify(coin_protocol(p), reps, "all-accept", seed=t)
        if not verdict.accepted:
            rejected += 1
    target = 1 - (1 - p) ** reps
    sigma = math.sqrt(target * (1 - target) / trials)
    assert rejected / trials >= target - 3 * sigma


def test_amplify_majority():
    verdict, _ = amplify(coin_protocol(1.0), 5, "majority", seed=0)
    assert not verdict.accepted
    verdict, _ = amplify(coin_protocol(0.0), 5, "majority", seed=0)
    assert verdict.accepted


def test_transcript_dump_and_replay_prover(tmp_path):
    path = str(tmp_path / "run.jsonl")
    verdict, ledger, transcript, _ = run_session(echo_verifier(12), EchoProver(),
                                                 OracleHandles(()), seed=77)
    dump_transcript(path, {"config": {"bits": 12}, "seed": 77}, transcript, verdict, ledger)
    header, messages, trailer = load_transcript(path)
    assert header["seed"] == 77
    assert trailer["comm_bits"] == ledger.comm_bits
    assert messages == transcript

    # replaying the recorded prover against the same verifier seed matches
    verdict2, ledger2, transcript2, _ = run_session(
        echo_verifier(12), ReplayProver(messages), OracleHandles(()), seed=77)
    assert verdict2 == verdict
    assert transcript2 == transcript


def test_prover_never_sees_oracles():
    # structural isolation: the strategy object holds no oracle reference
    prover = EchoProver()
    run_session(echo_verifier(4), prover, OracleHandles((1, 2)), seed=0)
    assert not any(isinstance(v, OracleHandles) for v in vars(prover).values())
