"""Unit tests for the runtime module behavior."""

import math
import unittest

import numpy as np

from lapbc_sim.isa import parse_isa
from lapbc_sim.layout import default_mapping, gen_standard
from lapbc_sim.runtime import (
    RuntimeParams,
    RuntimeResult,
    expected_rounds,
    results_csv,
    run_trials,
    sample_distill_rounds,
    simulate,
    summarize,
)
from lapbc_sim.scheduler import ScheduleParams, schedule


def _scheduled(body: str, qubits: int = 1, **params):
    layout = gen_standard(2, 2)
    program = parse_isa(f"flavor lapbc\nqubits {qubits}\n{body}")
    schedule_params = ScheduleParams(**params)
    return schedule(program, layout, default_mapping(layout, qubits), schedule_params), schedule_params


class DistillRoundTests(unittest.TestCase):
    def test_closed_form(self) -> None:
        """Verify that closed form."""
        self.assertAlmostEqual(expected_rounds(0.25, 4), 1.0 / (1.0 - 0.75**4))
        self.assertAlmostEqual(expected_rounds(0.25, 4), 1.4629, places=4)
        self.assertEqual(expected_rounds(1.0, 3), 1.0)

    def test_sample_mean(self) -> None:
        """Verify that sample mean."""
        rng = np.random.default_rng(11)
        rounds = sample_distill_rounds(0.25, 4, rng, size=100_000)
        self.assertAlmostEqual(float(rounds.mean()), expected_rounds(0.25, 4), delta=0.02)
        self.assertGreaterEqual(int(rounds.min()), 1)

    def test_sample_mean_grid(self) -> None:
        """Verify that sample mean grid."""
        rng = np.random.default_rng(29)
        for p in (0.1, 0.25, 0.5):
            for patches in (1, 2, 4):
                rounds = sample_distill_rounds(p, patches, rng, size=1_000_000)
                expected = expected_rounds(p, patches)
                with self.subTest(p=p, D=patches):
                    self.assertAlmostEqual(float(rounds.mean()), expected, delta=0.01 * expected)

    def test_certain_success(self) -> None:
        """Verify that certain success."""
        self.assertEqual(sample_distill_rounds(1.0, 2, np.random.default_rng(0)), 1)

    def test_rejects_bad_arguments(self) -> None:
        """Verify that rejects bad arguments."""
        rng = np.random.default_rng(0)
        with self.assertRaises(ValueError):
            sample_distill_rounds(0.0, 4, rng)
        with self.assertRaises(ValueError):
            sample_distill_rounds(0.5, 0, rng)
        for p in (0.0, 1.5):
            with self.subTest(p=p):
                with self.assertRaises(ValueError):
                    RuntimeParams(p_success=p)
        with self.assertRaises(ValueError):
            RuntimeParams(trials=0)


class SimulateTests(unittest.TestCase):
    def test_certain_success_reproduces_the_schedule(self) -> None:
        """Verify that certain success reproduces the schedule."""
        result_schedule, params = _scheduled("init 0\neighth +Z0\nquarter +Z0Z1\nmeas +Y1 @0\n", qubits=2)
        result = simulate(result_schedule, params, RuntimeParams(p_success=1.0))
        self.assertEqual(result.total_cycles, result_schedule.makespan)
        self.assertEqual(result.added_cycles, 0)
        self.assertEqual(result.starts, tuple(record.start for record in result_schedule.records))
        self.assertEqual(result.delayed_distills, 0)

    def test_one_extra_round(self) -> None:
        """Verify that one extra round."""
        result_schedule, params = _scheduled("eighth +Z0\n")
        result = simulate(result_schedule, params, RuntimeParams(p_success=1.0), forced_rounds={0: 2})
        self.assertEqual(result.total_cycles, 78)
        self.assertEqual(result.added_cycles, 27)
        self.assertEqual(result.delayed_distills, 1)
        self.assertEqual(result.distill_delay_cycles, 27)

    def test_delay_propagates_through_shared_patches(self) -> None:
        """Verify that delay propagates through shared patches."""
        result_schedule, params = _scheduled("eighth +Z0\neighth +Z0\n")
        self.assertEqual(result_schedule.makespan, 102)
        result = simulate(result_schedule, params, RuntimeParams(p_success=1.0), forced_rounds={0: 2})
        self.assertEqual(result.starts[1], 78)
        self.assertEqual(result.total_cycles, 129)

    def test_delay_stays_local_on_disjoint_patches(self) -> None:
        """Verify that delay stays local on disjoint patches."""
        result_schedule, params = _scheduled("eighth +Z0\neighth +Z3\n", qubits=4, distill_patches=1)
        result = simulate(result_schedule, params, RuntimeParams(p_success=1.0), forced_rounds={0: 2})
        self.assertEqual(result.ends, (78, 51))
        self.assertEqual(result.total_cycles, 78)

    def test_more_rounds_never_finish_sooner(self) -> None:
        """Verify that adding distillation rounds to any eighth never shortens the run."""
        result_schedule, params = _scheduled(
            "init 0\neighth +Z0\neighth -X0\nquarter +Z0Z1\neighth +Z1\neighth +Y0\n", qubits=2
        )
        eighths = [record.id for record in result_schedule.records if record.distill_cells]
        self.assertEqual(eighths, [1, 2, 4, 5])
        rt = RuntimeParams(p_success=1.0)
        forced = {record_id: 1 for record_id in eighths}
        baseline = simulate(result_schedule, params, rt, forced_rounds=forced)
        previous = baseline
        for step in range(12):
            forced[eighths[(3 * step) % len(eighths)]] += 1 + step % 2
            current = simulate(result_schedule, params, rt, forced_rounds=forced)
            with self.subTest(forced=dict(forced)):
                self.assertGreaterEqual(current.total_cycles, previous.total_cycles)
                for before, after in zip(previous.ends, current.ends):
                    self.assertGreaterEqual(after, before)
            previous = current
        self.assertGreater(previous.total_cycles, baseline.total_cycles)
        for record_id in eighths:
            single = simulate(result_schedule, params, rt, forced_rounds={record_id: 3})
            with self.subTest(record_id=record_id):
                self.assertGreaterEqual(single.total_cycles, baseline.total_cycles)

    def test_rejects_zero_forced_rounds(self) -> None:
        """Verify that rejects zero forced rounds."""
        result_schedule, params = _scheduled("eighth +Z0\n")
        with self.assertRaises(ValueError):
            simulate(result_schedule, params, RuntimeParams(), forced_rounds={0: 0})

    def test_never_finishes_early(self) -> None:
        """Verify that never finishes early."""
        result_schedule, params = _scheduled("init 0\neighth +Z0\neighth -X0\neighth +Z1\n", qubits=2)
        for seed in range(20):
            result = simulate(result_schedule, params, RuntimeParams(p_success=0.3, seed=seed))
            with self.subTest(seed=seed):
                self.assertGreaterEqual(result.total_cycles, result_schedule.makespan)
                for start, record in zip(result.starts, result_schedule.records):
                    self.assertGreaterEqual(start, record.start)


class TrialTests(unittest.TestCase):
    def test_seeded_trials_are_reproducible(self) -> None:
        """Verify that seeded trials are reproducible."""
        result_schedule, params = _scheduled("eighth +Z0\neighth +Z0\n")
        rt = RuntimeParams(p_success=0.25, seed=5, trials=20)
        first = run_trials(result_schedule, params, rt)
        self.assertEqual(first, run_trials(result_schedule, params, rt))
        self.assertEqual(len(first), 20)

    def test_workers_do_not_change_results(self) -> None:
        """Verify that workers do not change results."""
        result_schedule, params = _scheduled("eighth +Z0\n")
        rt = RuntimeParams(p_success=0.25, seed=3, trials=8)
        self.assertEqual(
            run_trials(result_schedule, params, rt, workers=2),
            run_trials(result_schedule, params, rt, workers=1),
        )

    def test_mean_matches_the_closed_form(self) -> None:
        """Verify that mean matches the closed form."""
        result_schedule, params = _scheduled("eighth +Z0\n")
        rt = RuntimeParams(p_success=0.25, seed=1, trials=10_000)
        summary = summarize(run_trials(result_schedule, params, rt))
        expected = 51 + 27 * (expected_rounds(0.25, 4) - 1)
        self.assertAlmostEqual(summary.mean, expected, delta=1.0)
        self.assertGreater(summary.stddev, 15.0)
        self.assertEqual(summary.minimum, 51)


class SummaryTests(unittest.TestCase):
    def test_summarize_totals(self) -> None:
        """Verify that summarize totals."""
        summary = summarize([10, 20])
        self.assertEqual(summary.mean, 15.0)
        self.assertAlmostEqual(summary.stddev, math.sqrt(50.0))
        self.assertEqual((summary.minimum, summary.maximum), (10, 20))
        self.assertEqual(summarize([7]).stddev, 0.0)
        self.assertEqual(summary.to_dict()["max"], 20)
        with self.assertRaises(ValueError):
            summarize([])

    def test_results_csv(self) -> None:
        """Verify that results csv."""
        results = [RuntimeResult(78, (0,), (78,), 1, 27, 27), RuntimeResult(51, (0,), (51,), 0, 0, 0)]
        self.assertEqual(
            results_csv(results),
            "trial,total_cycles,delayed_distills,added_cycles\n0,78,1,27\n1,51,0,0\n",
        )


if __name__ == "__main__":
    unittest.main()
