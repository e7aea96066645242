"""Zero-communication compression: experiments, exact law, MC, extraction."""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from commlb.bounds import LabeledRectangleStrategy
from commlb.compression import (
    BOT,
    CompressionParameters,
    ExperimentInputs,
    compression_parameters,
    conditional_distance_check,
    exact_output_distribution,
    experiment_probabilities,
    extract_strategy,
    mc_output_distribution,
    run_experiment,
    run_zero_comm,
    verify_compression,
)
from commlb.core import (
    EMPTY_RECTANGLE,
    FiniteDistribution,
    InputDistribution,
    Rectangle,
)
from commlb.corpus import make_function, make_protocol
from commlb.errors import (
    CapacityError,
    ConditioningError,
    DimensionError,
    ParameterError,
)
from commlb.protocol import factorization

UNIFORM_2x2 = InputDistribution(
    ((Fraction(1, 4), Fraction(1, 4)), (Fraction(1, 4), Fraction(1, 4)))
)

ONE = Fraction(1)


def _trivial_inputs(delta_exp=1) -> ExperimentInputs:
    return ExperimentInputs((ONE,), (ONE,), (ONE,), (ONE,), delta_exp)


# ---------------------------------------------------------------------------
# Single sampling experiment
# ---------------------------------------------------------------------------


def test_experiment_inputs_validation():
    with pytest.raises(ParameterError):
        ExperimentInputs((ONE,), (ONE,), (ONE,), (ONE,), 0)
    with pytest.raises(ParameterError):
        # p_a*p_b sums to 1/2, not 1
        ExperimentInputs((Fraction(1, 2),), (ONE,), (ONE,), (ONE,), 1)
    with pytest.raises(DimensionError):
        ExperimentInputs((ONE,), (ONE, ONE), (ONE,), (ONE,), 1)


def test_experiment_probabilities_point_universe():
    table = experiment_probabilities(_trivial_inputs(1))
    assert table.both == (Fraction(1, 4),)
    assert table.alice_only == (Fraction(1, 4),)
    assert table.bob_only == (Fraction(1, 4),)
    assert table.neither == Fraction(1, 4)
    assert table.alice_accept_total() == Fraction(1, 2)
    assert table.accepted_distribution().weights == (1,)


def test_alice_accept_identity_exact():
    # Sum of Alice-accept probabilities is exactly 1 / (|U| * 2**delta_exp).
    rng = random.Random(23)
    for _ in range(20):
        size = rng.randint(1, 4)
        delta_exp = rng.randint(1, 6)
        # Build exact factor pairs: tau = p_a * p_b with p_b = tau / p_a.
        raw = [Fraction(rng.randint(1, 8)) for _ in range(size)]
        tau = [r / sum(raw) for r in raw]
        p_a = [min(1, t + Fraction(rng.randint(0, 4), 8) * (1 - t)) for t in tau]
        p_b = [t / a for t, a in zip(tau, p_a)]
        q_a = [t / a for t, a in zip(tau, p_a)]
        q_b = [t / b for t, b in zip(tau, p_b)]
        inp = ExperimentInputs(tuple(p_a), tuple(q_a), tuple(p_b), tuple(q_b), delta_exp)
        table = experiment_probabilities(inp)
        assert table.alice_accept_total() == Fraction(1, size * 2**delta_exp)
        # Both-accept never exceeds the hashing-scale budget.
        assert sum(table.both) <= Fraction(1, size * 4**delta_exp)


def test_run_experiment_matches_table():
    inp = _trivial_inputs(1)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(42)))
    counts = {"both": 0, "alice_only": 0, "bob_only": 0, "neither": 0}
    n = 40_000
    for _ in range(n):
        counts[run_experiment(inp, rng).kind] += 1
    for kind in counts:
        # each category has probability 1/4; 5 sigma band
        assert abs(counts[kind] / n - 0.25) < 5 * math.sqrt(0.25 * 0.75 / n)


def test_accepted_distribution_requires_acceptance():
    # Alice's estimate vanishes wherever Bob's factor lives, so the two
    # parties never accept the same sample.
    zero = Fraction(0)
    table = experiment_probabilities(
        ExperimentInputs((ONE, ONE), (zero, ONE), (ONE, zero), (ONE, zero), 1)
    )
    assert sum(table.both) == 0
    with pytest.raises(ConditioningError):
        table.accepted_distribution()


# ---------------------------------------------------------------------------
# Parameter derivation
# ---------------------------------------------------------------------------


def test_parameters_pinned_small():
    p = compression_parameters(0.9, 0.01, 2)
    assert (p.delta_exp, p.trials, p.hash_bits) == (5, 140, 14)
    assert p.lambda_exponent == 19
    assert p.lambda_exact == Fraction(1, 2**19)
    assert p.lambda_ == math.ldexp(1.0, -19)
    assert p.mode == "paper-exact"


def test_parameters_delta_exp_growth():
    assert compression_parameters(0.5, 1.0, 1).delta_exp == 136


def test_parameters_overrides():
    p = compression_parameters(0.5, 1.0, 1, overrides=(3, 30, 2))
    assert (p.delta_exp, p.trials, p.hash_bits) == (3, 30, 2)
    assert p.mode == "override"
    assert p.lambda_exact == Fraction(1, 32)


def test_parameters_validation():
    with pytest.raises(ParameterError):
        compression_parameters(1.5, 1.0, 1)
    with pytest.raises(ParameterError):
        compression_parameters(0.5, -1.0, 1)
    with pytest.raises(ParameterError):
        compression_parameters(0.5, 1.0, 0)
    with pytest.raises(ParameterError):
        compression_parameters(0.5, 1.0, 1, overrides=(0, 1, 0))
    with pytest.raises(ParameterError):
        CompressionParameters(0.5, 1.0, 1, 0, 0, "override")


# ---------------------------------------------------------------------------
# Exact law: closed cases and a brute-force oracle
# ---------------------------------------------------------------------------


def _categories(pi, mu, x, y, params):
    """Per-output-value category probabilities, as floats."""
    inp = ExperimentInputs.from_factorization(
        factorization(pi, mu, x, y), params.delta_exp
    )
    table = experiment_probabilities(inp)
    outputs = pi.leaf_outputs()
    nz = pi.z_size
    both = [0.0] * nz
    aonly = [0.0] * nz
    bonly = [0.0] * nz
    for u, z in enumerate(outputs):
        both[z] += float(table.both[u])
        aonly[z] += float(table.alice_only[u])
        bonly[z] += float(table.bob_only[u])
    return both, aonly, bonly


def _brute_force_law(both, aonly, bonly, trials, hash_bits, nz):
    """Enumerate every per-trial (category, hash-match) assignment."""
    rho = math.ldexp(1.0, -hash_bits)
    cats = (
        [("b", z, both[z]) for z in range(nz)]
        + [("a", z, aonly[z]) for z in range(nz)]
        + [("o", z, bonly[z]) for z in range(nz)]
        + [("n", None, 1.0 - sum(both) - sum(aonly) - sum(bonly))]
    )
    out = [0.0] * nz
    abort = 0.0
    for assignment in itertools.product(cats, repeat=trials):
        for matches in itertools.product((True, False), repeat=trials):
            p = 1.0
            for (_, _, cp), m in zip(assignment, matches):
                p *= cp * (rho if m else 1.0 - rho)
            if p == 0.0:
                continue
            a_out = BOT
            for (kind, z, _), m in zip(assignment, matches):
                if kind in ("b", "a"):
                    a_out = z if m else BOT
                    break
            b_out = BOT
            for (kind, z, _), m in zip(assignment, matches):
                if kind in ("b", "o") and m:
                    b_out = z
                    break
            if a_out != BOT and a_out == b_out:
                out[a_out] += p
            else:
                abort += p
    return out, abort


@pytest.mark.parametrize("trials,hash_bits", [(1, 0), (2, 1), (3, 2), (4, 1)])
def test_dp_matches_brute_force(trials, hash_bits):
    pi = make_protocol("noisy_bit", flip=0.25)
    params = compression_parameters(0.5, 1.0, 2, overrides=(2, trials, hash_bits))
    for x, y in ((0, 0), (1, 0)):
        law = exact_output_distribution(pi, UNIFORM_2x2, x, y, params)
        both, aonly, bonly = _categories(pi, UNIFORM_2x2, x, y, params)
        out, abort = _brute_force_law(both, aonly, bonly, trials, hash_bits, 2)
        assert law.output == pytest.approx(tuple(out), abs=1e-12)
        assert law.abort == pytest.approx(abort, abs=1e-12)
        assert law.not_abort + law.abort == pytest.approx(1.0, abs=1e-12)


def test_single_trial_law_closed_form():
    # With T=1 and hash_bits=0 the run outputs z exactly when the one trial
    # lands in the both-accept category for z.
    pi = make_protocol("noisy_bit", flip=0.25)
    params = compression_parameters(0.5, 1.0, 2, overrides=(2, 1, 0))
    both, _, _ = _categories(pi, UNIFORM_2x2, 0, 0, params)
    law = exact_output_distribution(pi, UNIFORM_2x2, 0, 0, params)
    assert law.output == pytest.approx(tuple(both), abs=1e-15)


def test_dp_caps_enforced():
    pi = make_protocol("trivial_const")
    params = compression_parameters(0.5, 1.0, 1, overrides=(1, 10_000, 2))
    with pytest.raises(CapacityError):
        exact_output_distribution(pi, UNIFORM_2x2, 0, 0, params)


# ---------------------------------------------------------------------------
# Scalar runs and the Monte Carlo engine
# ---------------------------------------------------------------------------


def test_run_zero_comm_deterministic():
    pi = make_protocol("noisy_bit", flip=0.25)
    params = compression_parameters(0.5, 1.0, 2, overrides=(2, 20, 2))
    outs = [run_zero_comm(pi, UNIFORM_2x2, 0, 1, params, seed=s) for s in range(8)]
    assert outs == [run_zero_comm(pi, UNIFORM_2x2, 0, 1, params, seed=s) for s in range(8)]
    assert set(outs) <= {BOT, 0, 1}


def test_run_zero_comm_frequencies_match_dp():
    pi = make_protocol("noisy_bit", flip=0.25)
    params = compression_parameters(0.5, 1.0, 2, overrides=(2, 12, 1))
    law = exact_output_distribution(pi, UNIFORM_2x2, 0, 0, params)
    n = 3000
    counts = [0, 0, 0]  # z=0, z=1, BOT
    for s in range(n):
        out = run_zero_comm(pi, UNIFORM_2x2, 0, 0, params, seed=s)
        counts[2 if out == BOT else out] += 1
    expect = [law.output[0], law.output[1], law.abort]
    for got, p in zip(counts, expect):
        se = math.sqrt(max(p * (1 - p), 1e-12) / n)
        assert abs(got / n - p) < 5 * se + 1e-9


def test_mc_matches_dp():
    pi = make_protocol("noisy_bit", flip=0.25)
    params = compression_parameters(0.5, 1.0, 2, overrides=(2, 15, 1))
    law = exact_output_distribution(pi, UNIFORM_2x2, 1, 1, params)
    mc = mc_output_distribution(pi, UNIFORM_2x2, 1, 1, params, samples=200_000, seed=5)
    freqs = mc.frequencies
    assert sum(mc.counts) == mc.samples
    expect = list(law.output) + [law.abort]
    for got, p in zip(freqs, expect):
        se = math.sqrt(max(p * (1 - p), 1e-12) / mc.samples)
        assert abs(got - p) < 5 * se + 1e-9
    assert mc.max_standard_error() > 0


# ---------------------------------------------------------------------------
# Compression verification
# ---------------------------------------------------------------------------


def test_verify_compression_paper_exact_trivial_protocol():
    pi = make_protocol("trivial_const")
    params = compression_parameters(0.9, 0.0, pi.universe_size)
    assert (params.delta_exp, params.trials, params.hash_bits) == (5, 70, 14)
    report = verify_compression(pi, None, UNIFORM_2x2, 0.9, params)
    assert report.all_pass
    assert report.collision_bound_pass
    lam = params.lambda_
    assert (1 - 0.9) * lam <= report.aggregate_not_abort <= (1 + 0.9) * lam
    assert report.eq4_distance <= 0.9


def test_verify_compression_override_informational():
    pi = make_protocol("noisy_bit", flip=0.25)
    params = compression_parameters(0.5, 1.0, 2, overrides=(2, 10, 1))
    report = verify_compression(pi, None, UNIFORM_2x2, 0.5, params)
    assert report.collision_bound_pass is None
    assert len(report.inputs) == 4
    rows = report.csv_rows()
    assert rows[0].startswith("# engine=dp mode=override")
    assert rows[1] == "x,y,prob_not_abort,lambda,eq5_pass,eq6_pass"
    assert rows[-1].startswith("eq4,")
    assert rows[-2].startswith("aggregate,")


def test_verify_compression_skips_zero_marginals():
    pi = make_protocol("trivial_const")
    mu = InputDistribution(((Fraction(1, 2), Fraction(1, 2)), (Fraction(0), Fraction(0))))
    params = compression_parameters(0.9, 0.0, 1)
    report = verify_compression(pi, None, mu, 0.9, params)
    assert {(r.x, r.y) for r in report.inputs} == {(0, 0), (0, 1)}


def test_verify_compression_rejects_bad_delta():
    pi = make_protocol("trivial_const")
    params = compression_parameters(0.9, 0.0, 1)
    with pytest.raises(ParameterError):
        verify_compression(pi, None, UNIFORM_2x2, 1.0, params)


# ---------------------------------------------------------------------------
# Strategy extraction
# ---------------------------------------------------------------------------


def test_extract_strategy_trivial_protocol():
    pi = make_protocol("trivial_const")
    f = make_function("CONST,1")
    params = compression_parameters(0.9, 0.0, 1, overrides=(1, 30, 0))
    strategy, report = extract_strategy(pi, f, UNIFORM_2x2, 0.9, params, 1000, seed=3)
    assert isinstance(strategy, LabeledRectangleStrategy)
    assert report.weight_total == 1
    assert report.seeds == 1000
    # hash_bits=0 means every accepted trial matches; with 30 trials both
    # parties output 1 near-certainly, so half the weight (1/|Z| per seed)
    # sits on the full rectangle labeled 1.
    weight = strategy.weight_map()
    full = Rectangle(0b11, 0b11)
    assert weight.get((full, 1), 0) >= Fraction(49, 100)
    assert weight.get((EMPTY_RECTANGLE, 0), 0) >= Fraction(49, 100)
    assert report.eps == 0.0


def test_extract_strategy_validation():
    pi = make_protocol("trivial_const")
    f = make_function("CONST,1")
    params = compression_parameters(0.9, 0.0, 1, overrides=(1, 5, 0))
    with pytest.raises(ParameterError):
        extract_strategy(pi, f, UNIFORM_2x2, 0.9, params, 0)
    with pytest.raises(ParameterError):
        extract_strategy(pi, f, UNIFORM_2x2, 1.5, params, 10)


# ---------------------------------------------------------------------------
# Conditional-distance utility
# ---------------------------------------------------------------------------


def test_conditional_distance_trivial_events():
    pi_dist = FiniteDistribution((Fraction(1, 2), Fraction(1, 2)))
    weights = (Fraction(1, 4),) * 4
    value_map = (0, 1, 0, 1)
    # H = whole space, F empty: conditional law equals pi exactly, bound = c.
    holds, measured, bound = conditional_distance_check(
        pi_dist, weights, value_map, 0b0000, 0b1111, Fraction(0)
    )
    assert holds and measured == 0 and bound == 0


def test_conditional_distance_with_bad_event():
    pi_dist = FiniteDistribution((Fraction(1, 2), Fraction(1, 2)))
    weights = (Fraction(1, 4),) * 4
    value_map = (0, 0, 0, 1)
    # H = {0, 3} gives the right law; H = {0, 1, 3} skews it by the mass of
    # the bad point 1, which F absorbs.
    holds, measured, bound = conditional_distance_check(
        pi_dist, weights, value_map, 0b0010, 0b1011, Fraction(0)
    )
    assert holds
    assert measured == Fraction(1, 6)
    assert bound == Fraction(1, 3)


def test_conditional_distance_errors():
    pi_dist = FiniteDistribution((Fraction(1), Fraction(0)))
    with pytest.raises(ConditioningError):
        conditional_distance_check(pi_dist, (Fraction(1),), (0,), 0, 0, 0)
    with pytest.raises(DimensionError):
        conditional_distance_check(pi_dist, (Fraction(1),), (0, 0), 0, 1, 0)
