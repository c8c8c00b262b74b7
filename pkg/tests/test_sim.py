"""End-to-end executions: traffic identities, verdicts, determinism."""

import random

import pytest

from codedbft.diagnosis import ConfigurationError
from codedbft.sim import (
    ALG1,
    ALG2,
    CSV_COLUMNS,
    OUTCOME_DECIDED,
    OUTCOME_DIAGNOSED,
    OUTCOME_TERMINATED,
    SEND_SILENT,
    STEP_OWN,
    AdversaryScript,
    ExecutionConfig,
    check_complexity,
    load_case,
    random_inputs,
    random_script,
    replay_identical,
    run_execution,
    serialize_case,
    sweep,
)


def fault_free_config(algorithm, n, t, q, l_bits, d_bits, seed=1, sharers=None):
    inputs = random_inputs(random.Random(seed), n, l_bits, sharers=sharers)
    return ExecutionConfig(
        algorithm=algorithm, n=n, t=t, q=q,
        l_bits=l_bits, d_bits=d_bits, inputs=inputs, seed=seed,
    )


# ------------------------------------------------------ config validation


def test_config_rejects_bad_shapes():
    good = dict(algorithm=ALG1, n=4, t=1, l_bits=240, d_bits=24,
                inputs=tuple("00" * 30 for _ in range(4)))
    ExecutionConfig(**good)  # sanity: the base case is accepted
    bad = [
        dict(good, algorithm="alg3"),
        dict(good, n=3),                       # n < 3t+1
        dict(good, t=-1),
        dict(good, l_bits=241),                # not a multiple of 8
        dict(good, d_bits=20),                 # not a multiple of 8k
        dict(good, d_bits=0),
        dict(good, inputs=good["inputs"][:3]),  # wrong count
        dict(good, inputs=("zz" * 30,) * 4),   # not hex
        dict(good, inputs=("00" * 29,) * 4),   # wrong length
        dict(good, broadcast_coefficient=0),
    ]
    for kwargs in bad:
        with pytest.raises(ConfigurationError):
            ExecutionConfig(**kwargs)


def test_config_alg2_needs_q_in_range():
    base = dict(algorithm=ALG2, n=7, t=2, l_bits=240, d_bits=24,
                inputs=tuple("00" * 30 for _ in range(7)))
    ExecutionConfig(**base, q=3)
    with pytest.raises(ConfigurationError):
        ExecutionConfig(**base)
    for q in (2, 6):  # outside t+1 .. n-t
        with pytest.raises(ConfigurationError):
            ExecutionConfig(**base, q=q)


def test_script_rejects_rules_for_honest_processors():
    script = AdversaryScript([4])
    with pytest.raises(ValueError):
        script.add_send(1, STEP_OWN, 2, 1, SEND_SILENT)
    with pytest.raises(ValueError):
        script.add_broadcast(1, "detected", 2, "silent")
    with pytest.raises(ValueError):
        script.add_send(1, "sideways", 4, 1, SEND_SILENT)


def test_validate_shapes_checks_payload_sizes():
    config = fault_free_config(ALG1, 4, 1, None, 240, 24)
    too_many = AdversaryScript([3, 4])
    with pytest.raises(ConfigurationError):
        too_many.validate_shapes(config)
    wrong_size = AdversaryScript([4])
    wrong_size.add_send(1, STEP_OWN, 4, 1, "corrupt", b"\xff\x00")
    with pytest.raises(ConfigurationError):
        wrong_size.validate_shapes(config)  # sym_bytes is 1 here
    bad_vector = AdversaryScript([4])
    bad_vector.add_broadcast(1, "coded", 4, "replace", ["00"] * 3)
    with pytest.raises(ConfigurationError):
        bad_vector.validate_shapes(config)


# -------------------------------------------------- fault-free identities


def test_headline_traffic_four_processors():
    # n(n-1)/(n-t) * L with n=4, t=1, L=2400
    config = fault_free_config(ALG1, 4, 1, None, 2400, 240)
    result = run_execution(config, AdversaryScript())
    report = check_complexity(result)
    assert result.passed
    assert {o["kind"] for o in result.outcomes} == {OUTCOME_DECIDED}
    assert report.data_bits == 9600
    assert report.data_formula_bits == 9600
    assert report.overhead_bits == 640  # ten generations of four 1-bit flags


def test_headline_traffic_seven_processors():
    config = fault_free_config(ALG1, 7, 2, None, 8400, 840)
    report = check_complexity(run_execution(config, AdversaryScript()))
    assert report.data_bits == 70560 == report.data_formula_bits


def test_identical_inputs_decide_the_input():
    config = fault_free_config(ALG1, 4, 1, None, 480, 48)
    result = run_execution(config, AdversaryScript())
    want = config.padded_input(1)
    assert result.passed
    assert all(out == want for out in result.outputs.values())


def test_quorum_variant_per_generation_symbols_exact():
    # (2n-q)(n-1) matching symbols per generation, met with equality
    for q in (3, 4, 5):
        config = fault_free_config(
            ALG2, 7, 2, q, 8 * q * 4, 8 * q, sharers=range(1, q + 1)
        )
        result = run_execution(config, AdversaryScript())
        report = check_complexity(result)
        assert result.passed
        want = (2 * 7 - q) * 6
        assert report.alg2_symbol_bound == want
        per_gen = report.alg2_symbols_per_generation
        assert len(per_gen) == config.generations == 4
        assert set(per_gen.values()) == {want}
        assert report.data_matches_formula


def test_broadcast_coefficient_scales_overhead():
    cheap = fault_free_config(ALG1, 4, 1, None, 480, 48)
    doc = cheap.to_jsonable()
    doc["broadcast_coefficient"] = 4
    costly = ExecutionConfig.from_jsonable(doc)
    plain = check_complexity(run_execution(cheap, AdversaryScript()))
    scaled = check_complexity(run_execution(costly, AdversaryScript()))
    assert scaled.overhead_bits == 4 * plain.overhead_bits
    assert scaled.data_bits == plain.data_bits


# ------------------------------------------------------ verdict shapes


def test_split_inputs_terminate_on_identical_zero_default():
    rng = random.Random(5)
    first, second = rng.randbytes(60).hex(), rng.randbytes(60).hex()
    config = ExecutionConfig(
        algorithm=ALG1, n=4, t=1, l_bits=480, d_bits=48,
        inputs=(first, first, second, second), seed=5,
    )
    result = run_execution(config, AdversaryScript())
    assert result.passed
    assert {o["kind"] for o in result.outcomes} == {OUTCOME_TERMINATED}
    assert set(result.outputs.values()) == {bytes(config.padded_bytes)}


def test_starved_outsider_is_not_blamed():
    """A quorum member that stays silent toward an outsider burns only
    its own edge: the outsider announces the reconstruction failure and
    diagnosis must not convict either side."""
    rng = random.Random(13)
    config = ExecutionConfig(
        algorithm=ALG2, n=4, t=1, q=3, l_bits=72, d_bits=24,
        inputs=random_inputs(rng, 4, 72, sharers=(1, 2, 3)), seed=13,
    )
    script = AdversaryScript([1])
    for g in (1, 2, 3):
        script.add_send(g, STEP_OWN, 1, 4, SEND_SILENT)
    result = run_execution(config, script)
    assert result.passed
    want = config.padded_input(2)  # the shared value survives
    assert all(out == want for out in result.outputs.values())
    removed = {
        (ev["i"], ev["j"]) for ev in result.transcript.of_type("EDGE_REMOVED")
    }
    assert removed <= {(1, 4)}
    assert not result.transcript.of_type("CONVICTED")


def test_two_faulty_equivocators_lose_their_votes():
    config = fault_free_config(ALG1, 7, 2, None, 240, 40, seed=21)
    script = AdversaryScript([6, 7])
    mask = bytes([0xFF])
    for sender in (6, 7):
        for receiver in (1, 2):
            script.add_send(1, STEP_OWN, sender, receiver, "corrupt", mask)
    result = run_execution(config, script)
    assert result.passed
    assert all(out == config.padded_input(1) for out in result.outputs.values())
    kinds = {o["kind"] for o in result.outcomes}
    assert kinds <= {OUTCOME_DECIDED, OUTCOME_DIAGNOSED}


# --------------------------------------------------- randomized batteries


@pytest.mark.parametrize("n,t", [(4, 1), (7, 2)])
def test_random_adversaries_never_violate(n, t):
    bound_alg1 = t + t * (t + 1)
    bound_alg2 = t * (t + 1)
    q_options = list(range(t + 1, n - t + 1))
    for i in range(80):
        seed = 5000 * n + i
        if i % 2 == 0:
            algorithm, q = ALG1, None
        else:
            algorithm, q = ALG2, q_options[(i // 2) % len(q_options)]
        k = q if q is not None else n - t
        rng = random.Random(seed)
        style = i % 3
        l_bits = 8 * k * 3
        if style == 0:
            inputs = random_inputs(rng, n, l_bits)
        elif style == 1:
            inputs = random_inputs(rng, n, l_bits, sharers=range(1, n - t + 1))
        else:
            inputs = tuple(rng.randbytes(l_bits // 8).hex() for _ in range(n))
        config = ExecutionConfig(
            algorithm=algorithm, n=n, t=t, q=q,
            l_bits=l_bits, d_bits=8 * k, inputs=inputs, seed=seed,
        )
        result = run_execution(config, random_script(config, seed))
        assert result.passed, f"seed {seed}: {result.violations}"
        bound = bound_alg1 if algorithm == ALG1 else bound_alg2
        assert result.diagnosis_count <= bound


def test_sweep_collects_rows_and_failures():
    configs = []
    for seed in range(6):
        config = fault_free_config(ALG1, 4, 1, None, 72, 24, seed=seed)
        configs.append((config, random_script(config, seed)))
    report = sweep(configs, workers=2)
    assert len(report.results) == 6
    assert report.failures == []
    assert report.max_diagnosis_count(ALG1) <= 3
    lines = report.to_csv().strip().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 7


# ----------------------------------------------------------- determinism


def test_serialized_case_replays_byte_identical():
    config = fault_free_config(ALG1, 4, 1, None, 72, 24, seed=31)
    script = random_script(config, 31)
    assert replay_identical(config, script)


def test_case_round_trip_preserves_everything():
    config = fault_free_config(ALG2, 7, 2, 4, 96, 32, seed=17,
                               sharers=range(1, 6))
    script = random_script(config, 17)
    loaded_config, loaded_script = load_case(serialize_case(config, script))
    assert loaded_config == config
    assert loaded_script.to_jsonable() == script.to_jsonable()


def test_transcript_header_records_padding_policy():
    config = fault_free_config(ALG1, 4, 1, None, 80, 24)  # pads 80 -> 96
    result = run_execution(config, AdversaryScript())
    header = result.transcript.of_type("header")[0]
    assert header["padding"] == "zero-fill-tail"
    assert header["original_l_bits"] == 80
    assert header["padded_bits"] == 96
    assert header["generations"] == 4
