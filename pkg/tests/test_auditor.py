import collections
import json

import pytest

from rngsentinel.auditor import (
    AuditEvent,
    Auditor,
    AuditorConfig,
    Mode,
)
from rngsentinel.errors import (
    AuditorStopped,
    DrainTimeout,
    InvalidConfig,
    UnknownSlot,
)
from rngsentinel.generators import Algorithm, SecurityClass, make_generator
from rngsentinel.policy import Directive
from rngsentinel.transforms import (
    Laplace,
    Normal,
    UniformInt,
    UniformReal,
    sample_stream,
)


def _auditor(mode=Mode.ASN, **kwargs):
    return Auditor(AuditorConfig(mode=mode, **kwargs))


class TestConfig:
    def test_defaults(self):
        config = AuditorConfig()
        assert config.batch_size == 100
        assert config.stride == 10
        assert config.warn_threshold == 0.01
        assert config.queue_capacity == 1024

    @pytest.mark.parametrize("kwargs", [
        {"batch_size": 19},
        {"stride": 0},
        {"queue_capacity": 0},
        {"warn_threshold": 0.0},
        {"warn_threshold": 1.0},
        {"continuous_test": "anderson"},
        {"discrete_bins": 1},
    ])
    def test_invalid_configs(self, kwargs):
        with pytest.raises(InvalidConfig):
            AuditorConfig(**kwargs).validate()


class TestWrapBatching:
    def test_no_event_below_batch_size(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=1),
                               Normal(0.0, 1.0))
            for _ in range(99):
                gen.draw()
            assert auditor.drain_reports(timeout=5.0) == []

    def test_one_event_at_batch_size(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=1),
                               Normal(0.0, 1.0))
            for _ in range(100):
                gen.draw()
            records = auditor.drain_reports(timeout=5.0)
            assert len(records) == 1
            assert records[0].sequence_index == 1
            assert records[0].report.sample_size == 100

    def test_rasn_audits_every_stride_th_batch(self):
        with _auditor(mode=Mode.RASN, stride=10) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=1),
                               Normal(0.0, 1.0))
            for _ in range(1000):
                gen.draw()
            records = auditor.drain_reports(timeout=10.0)
            assert len(records) == 1
            assert records[0].sequence_index == 10


class TestTransparency:
    @pytest.mark.parametrize("mode", list(Mode))
    @pytest.mark.parametrize("spec", [
        Normal(2.0, 0.5), UniformReal(-1.0, 1.0), UniformInt(0, 12),
    ])
    def test_wrapped_values_bit_identical(self, mode, spec):
        unwrapped = sample_stream(make_generator(Algorithm.MT19937, seed=42),
                                  spec, 450)
        with _auditor(mode=mode) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=42), spec)
            wrapped = [gen.draw() for _ in range(450)]
        assert wrapped == unwrapped

    def test_static_wrapper_transparent_and_silent(self):
        unwrapped = sample_stream(make_generator(Algorithm.PHILOX, seed=9),
                                  Normal(0.0, 1.0), 500)
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.PHILOX, seed=9),
                               Normal(0.0, 1.0), dynamic=False)
            values = [gen.draw() for _ in range(500)]
            assert auditor.drain_reports(timeout=5.0) == []
        assert values == unwrapped


class TestModes:
    def test_blocking_reports_arrive_in_submission_order(self):
        with _auditor(mode=Mode.BLOCKING) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=3),
                               Normal(0.0, 1.0))
            for _ in range(20 * 100):
                gen.draw()
            records = auditor.drain_reports(timeout=10.0)
        assert [r.sequence_index for r in records] == list(range(1, 21))

    def test_blocking_report_ready_before_next_draw(self):
        with _auditor(mode=Mode.BLOCKING) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=3),
                               Normal(0.0, 1.0))
            for _ in range(100):
                gen.draw()
            # the submitting draw returned, so the report must already exist
            records = auditor.drain_reports(timeout=0.001)
            assert len(records) == 1

    def test_asn_multiset_of_sequence_indices_preserved(self):
        with _auditor(mode=Mode.ASN) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=4),
                               Normal(0.0, 1.0))
            for _ in range(50 * 100):
                gen.draw()
            records = auditor.drain_reports(timeout=30.0)
        assert collections.Counter(r.sequence_index for r in records) == \
               collections.Counter(range(1, 51))

    def test_rasn_exactness_deterministic(self):
        # floor(total_batches / stride) reports, counter-based
        for total, stride, expect in [(1000, 10, 100), (95, 10, 9), (9, 10, 0),
                                      (40, 4, 10)]:
            with _auditor(mode=Mode.RASN, stride=stride) as auditor:
                gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=5),
                                   UniformReal(0.0, 1.0))
                for _ in range(total * 100):
                    gen.draw()
                records = auditor.drain_reports(timeout=30.0)
            assert len(records) == expect
            assert [r.sequence_index for r in records] == \
                   [stride * (i + 1) for i in range(expect)]


class TestLiveness:
    def test_every_event_yields_exactly_one_report(self):
        # 10^4 events through a small queue: no loss, no duplication
        with _auditor(mode=Mode.ASN, queue_capacity=8) as auditor:
            spec = UniformReal(0.0, 1.0)
            samples = [0.5] * 100
            for i in range(10_000):
                auditor.submit(AuditEvent("src", spec, list(samples), i + 1))
            records = auditor.drain_reports(timeout=120.0)
        assert len(records) == 10_000
        assert collections.Counter(r.sequence_index for r in records) == \
               collections.Counter(range(1, 10_001))

    def test_capacity_one_queue_still_lossless(self):
        with _auditor(mode=Mode.ASN, queue_capacity=1) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=6),
                               Normal(0.0, 1.0))
            for _ in range(50 * 100):
                gen.draw()
            assert len(auditor.drain_reports(timeout=30.0)) == 50


class TestLifecycle:
    def test_submit_after_stop_raises(self):
        auditor = _auditor()
        auditor.start()
        auditor.stop()
        with pytest.raises(AuditorStopped):
            auditor.submit(AuditEvent("s", UniformReal(0.0, 1.0), [0.5] * 100, 1))

    def test_stop_is_idempotent(self):
        auditor = _auditor().start()
        auditor.stop()
        auditor.stop()

    def test_drain_after_stop_returns_remaining_then_empty(self):
        auditor = _auditor().start()
        gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=7),
                           Normal(0.0, 1.0))
        for _ in range(300):
            gen.draw()
        auditor.stop()
        assert len(auditor.drain_reports(timeout=5.0)) == 3
        assert auditor.drain_reports(timeout=5.0) == []

    def test_drain_timeout(self):
        auditor = _auditor()  # never started: nothing will complete
        auditor._accepted = 1
        with pytest.raises(DrainTimeout):
            auditor.drain_reports(timeout=0.05)

    def test_no_events_drains_empty(self):
        with _auditor() as auditor:
            assert auditor.drain_reports(timeout=1.0) == []


class TestSelection:
    def test_discrete_spec_uses_chi_square(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=8),
                               UniformInt(0, 10))
            for _ in range(100):
                gen.draw()
            records = auditor.drain_reports(timeout=5.0)
        assert records[0].report.test == "chi_square"

    def test_continuous_spec_uses_ks(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=8),
                               Laplace(0.0, 1.0))
            for _ in range(100):
                gen.draw()
            records = auditor.drain_reports(timeout=5.0)
        assert records[0].report.test == "ks"

    def test_z_selection_for_normal(self):
        with _auditor(continuous_test="z") as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=8),
                               Normal(0.0, 1.0))
            for _ in range(100):
                gen.draw()
            records = auditor.drain_reports(timeout=5.0)
        assert records[0].report.test == "z"

    def test_honest_stream_passes(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.PHILOX, seed=99),
                               Normal(3.0, 2.0))
            for _ in range(2000):
                gen.draw()
            records = auditor.drain_reports(timeout=10.0)
        warns = sum(r.report.verdict == "warn" for r in records)
        assert warns <= 2

    def test_wrong_family_warns(self):
        # uniform samples audited against a normal declaration
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=10),
                               Normal(0.0, 1.0))
            gen.set_actual(UniformReal(0.0, 1.0))
            for _ in range(300):
                gen.draw()
            records = auditor.drain_reports(timeout=5.0)
        assert all(r.report.verdict == "warn" for r in records)
        assert len(records) == 3


class TestRoundTripCalibration:
    """Every (algorithm, family) pair: honest generation audited against
    its own spec stays near the nominal warn rate."""

    @pytest.mark.parametrize("algorithm", [
        Algorithm.MT19937, Algorithm.PHILOX, Algorithm.WEAK_LCG,
        Algorithm.CSPRNG_CTR,
    ])
    @pytest.mark.parametrize("spec", [
        UniformReal(0.0, 1.0), UniformInt(0, 10), Normal(0.0, 1.0),
        Laplace(0.0, 1.0),
    ])
    def test_honest_pair_low_warn_rate(self, algorithm, spec):
        if algorithm is Algorithm.CSPRNG_CTR:
            inner = make_generator(algorithm)
        else:
            inner = make_generator(algorithm, seed=987_000 + hash(spec) % 1000)
        with _auditor() as auditor:
            gen = auditor.wrap(inner, spec)
            for _ in range(30 * 100):
                gen.draw()
            records = auditor.drain_reports(timeout=60.0)
        warns = sum(r.report.verdict == "warn" for r in records)
        assert len(records) == 30
        assert warns <= 4

    def test_small_batch_discrete_bins_adapt(self):
        # batch 20 over 10 values cannot hold 10 bins at 5 expected each;
        # the worker narrows the binning instead of erroring
        with Auditor(AuditorConfig(mode=Mode.ASN, batch_size=20)) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=15),
                               UniformInt(0, 10))
            for _ in range(10 * 20):
                gen.draw()
            records = auditor.drain_reports(timeout=10.0)
        assert len(records) == 10
        assert all(r.report.test == "chi_square" for r in records)


class TestEnforce:
    def test_replace_with_csprng(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=11),
                               Normal(0.0, 1.0), slot="dp_noise")
            assert gen.security_class is SecurityClass.STATISTICAL
            auditor.enforce([("dp_noise", Directive.REPLACE_WITH_CSPRNG)])
            assert gen.security_class is SecurityClass.CRYPTOGRAPHIC
            assert gen.inner.algorithm is Algorithm.CSPRNG_CTR
            gen.draw()  # draws flow through the replacement

    def test_empty_plan_is_noop(self):
        with _auditor() as auditor:
            auditor.enforce([])
            assert auditor.audit_log == []

    def test_reseed_twice_logs_both_and_stays_deterministic(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=12),
                               UniformReal(0.0, 1.0), slot="s")
            auditor.enforce([("s", Directive.RESEED_FROM_OS_ENTROPY)])
            auditor.enforce([("s", Directive.RESEED_FROM_OS_ENTROPY)])
            rebinds = [r for r in auditor.audit_log if r["type"] == "rebind"]
            assert len(rebinds) == 2
            # deterministic per current seed
            seed = gen.inner.seed
            replay = sample_stream(make_generator(Algorithm.MT19937, seed=seed),
                                   UniformReal(0.0, 1.0), 50)
            assert [gen.draw() for _ in range(50)] == replay

    def test_unknown_slot(self):
        with _auditor() as auditor:
            with pytest.raises(UnknownSlot):
                auditor.enforce([("ghost", Directive.REPLACE_WITH_CSPRNG)])

    def test_replacement_clears_substitution(self):
        with _auditor() as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=13),
                               Normal(0.0, 1.0), slot="w")
            gen.set_actual(UniformReal(0.0, 1.0))
            assert gen.actual_spec is not None
            auditor.enforce([("w", Directive.REPLACE_WITH_CSPRNG)])
            assert gen.actual_spec is None


class TestAuditLog:
    def test_ndjson_log_file(self, tmp_path):
        path = tmp_path / "audit.ndjson"
        with Auditor(AuditorConfig(mode=Mode.ASN), log_path=str(path)) as auditor:
            gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=14),
                               Normal(0.0, 1.0), slot="w")
            for _ in range(200):
                gen.draw()
            auditor.drain_reports(timeout=5.0)
            auditor.enforce([("w", Directive.RESEED_FROM_OS_ENTROPY)])
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(lines) == 3
        kinds = [entry["type"] for entry in lines]
        assert kinds.count("report") == 2
        assert kinds.count("rebind") == 1
        report = next(e for e in lines if e["type"] == "report")
        assert set(report) == {"type", "source", "sequence_index", "test",
                               "statistic", "p_value", "sample_size", "target",
                               "verdict"}
