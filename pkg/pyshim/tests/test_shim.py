import json
import os
import subprocess
import sys
import time

import pytest

import fakeml
import pyshim
from pyshim import (
    EndpointUnavailable,
    HostImportError,
    InterceptionEntry,
    InterceptionMap,
    Shim,
    ShimError,
    export_manifest,
)

NORMAL = {"family": "normal", "mu": 0.0, "sigma": 1.0}
UNIFORM = {"family": "uniform_real", "a": 0.0, "b": 1.0}
FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _map(*entries):
    return InterceptionMap(list(entries))


def normal_map():
    return _map(InterceptionEntry("fakeml.randn", NORMAL))


class TestInterceptionMap:
    def test_duplicate_paths_rejected(self):
        imap = _map(InterceptionEntry("fakeml.randn", NORMAL),
                    InterceptionEntry("fakeml.randn", UNIFORM))
        with pytest.raises(ShimError):
            imap.validate()

    def test_unsupported_family_rejected(self):
        imap = _map(InterceptionEntry("fakeml.randn", {"family": "poisson"}))
        with pytest.raises(ShimError):
            imap.validate()

    def test_unresolvable_path(self):
        with pytest.raises(HostImportError):
            Shim(_map(InterceptionEntry("fakeml.no_such_fn", NORMAL))).install()
        with pytest.raises(HostImportError):
            Shim(_map(InterceptionEntry("nosuchmodule.fn", NORMAL))).install()

    def test_bad_engine_command(self):
        with pytest.raises(EndpointUnavailable):
            Shim(normal_map(), engine=["/nonexistent/engine"]).install()


class TestTransparency:
    def test_host_results_bit_identical_under_fixed_seed(self):
        fakeml.seed(123)
        baseline = [fakeml.randn() for _ in range(500)]
        fakeml.seed(123)
        with Shim(normal_map()):
            shimmed = [fakeml.randn() for _ in range(500)]
        assert shimmed == baseline

    def test_all_argument_shapes_pass_through(self):
        fakeml.seed(9)
        with Shim(_map(InterceptionEntry("fakeml.randint",
                                         {"family": "uniform_int",
                                          "a": 0, "b": 50}))):
            values = [fakeml.randint(0, 50) for _ in range(10)]
        assert all(0 <= v < 50 for v in values)

    def test_uninstall_restores_original(self):
        original = fakeml.randn
        shim = Shim(normal_map()).install()
        assert fakeml.randn is not original
        shim.uninstall()
        assert fakeml.randn is original


class TestForwarding:
    def test_hundred_draws_one_event(self):
        fakeml.seed(31)
        shim = Shim(normal_map()).install()
        try:
            for _ in range(100):
                fakeml.randn()
        finally:
            shim.uninstall()
        reports = shim.reports("fakeml.randn")
        assert len(reports) == 1
        assert reports[0]["sample_size"] == 100
        assert reports[0]["test"] == "ks"

    def test_honest_stream_passes(self):
        fakeml.seed(32)
        shim = Shim(normal_map()).install()
        try:
            for _ in range(20 * 100):
                fakeml.randn()
        finally:
            shim.uninstall()
        reports = shim.reports()
        assert len(reports) == 20
        warns = sum(r["verdict"] == "warn" for r in reports)
        assert warns <= 2

    def test_downstream_function_inherits_interception(self):
        # init_weights never appears in the map, but it calls randn
        fakeml.seed(33)
        shim = Shim(normal_map()).install()
        try:
            fakeml.init_weights(300)
        finally:
            shim.uninstall()
        assert len(shim.reports("fakeml.randn")) == 3

    def test_no_events_after_uninstall(self):
        fakeml.seed(34)
        shim = Shim(normal_map()).install()
        for _ in range(100):
            fakeml.randn()
        shim.uninstall()
        seen = shim.stats()[0]["samples_seen"]
        for _ in range(200):
            fakeml.randn()
        assert shim.stats()[0]["samples_seen"] == seen

    def test_live_reports_stream_while_host_runs(self):
        fakeml.seed(35)
        shim = Shim(normal_map()).install()
        try:
            for _ in range(10 * 100):
                fakeml.randn()
            deadline = time.monotonic() + 20.0
            while time.monotonic() < deadline and \
                    len(shim.reports("fakeml.randn")) < 1:
                time.sleep(0.05)
            assert len(shim.reports("fakeml.randn")) >= 1
        finally:
            shim.uninstall()

    def test_drops_are_counted_never_silent(self):
        # an engine that never reads: the pipe fills, the queue fills,
        # further batches drop and the counter says so
        stall = [sys.executable, "-c",
                 "import time\ntime.sleep(60)"]
        fakeml.seed(36)
        shim = Shim(normal_map(), engine=stall, queue_batches=1).install()
        try:
            for _ in range(400 * 100):
                fakeml.randn()
        finally:
            shim.uninstall(timeout=2.0)
        stats = shim.stats()[0]
        assert stats["dropped_batches"] > 0
        assert stats["samples_seen"] == 400 * 100


class TestAttackDetection:
    def test_attacker_replaced_normal_sampler_is_flagged(self):
        # supply-chain compromise happens before the shim wraps the path
        original = fakeml.randn
        fakeml.seed(41)
        fakeml.randn = lambda: fakeml.rand()  # uniforms where normals belong
        try:
            shim = Shim(normal_map()).install()
            try:
                for _ in range(5 * 100):
                    fakeml.randn()
            finally:
                shim.uninstall()
        finally:
            fakeml.randn = original
        reports = shim.reports("fakeml.randn")
        assert len(reports) == 5
        assert all(r["verdict"] == "warn" for r in reports)

    def test_rebind_restores_passing_stream(self):
        # remediation: swap the host function for an honest implementation
        original = fakeml.randn
        fakeml.seed(42)
        fakeml.randn = lambda: fakeml.rand()
        try:
            shim = Shim(normal_map()).install()
            try:
                for _ in range(3 * 100):
                    fakeml.randn()
                shim.rebind("fakeml.randn", original)
                for _ in range(3 * 100):
                    fakeml.randn()
            finally:
                shim.uninstall()
        finally:
            fakeml.randn = original
        reports = shim.reports("fakeml.randn")
        assert len(reports) == 6
        assert [r["verdict"] for r in reports[:3]] == ["warn"] * 3
        assert sum(r["verdict"] == "warn" for r in reports[3:]) <= 1


class TestManifestExport:
    def test_three_entries_three_core_ids(self, tmp_path):
        imap = _map(
            InterceptionEntry("fakeml.randn", NORMAL),
            InterceptionEntry("fakeml.rand", UNIFORM),
            InterceptionEntry("fakeml.randint",
                              {"family": "uniform_int", "a": 0, "b": 10}),
        )
        path = tmp_path / "manifest.json"
        manifest = export_manifest(imap, str(path))
        assert len(manifest["functions"]) == 3
        assert set(manifest["core_rng_ids"]) == {
            "fakeml.randn", "fakeml.rand", "fakeml.randint"}
        assert manifest["edges"] == []
        assert json.loads(path.read_text()) == manifest

    def test_dp_entry_with_host_default_generator_flagged(self, tmp_path):
        imap = _map(InterceptionEntry(
            "fakeml.randn", NORMAL,
            context={"kind": "differential_privacy",
                     "epsilon": 50.0, "delta": 1e-5},
            generator={"algorithm": "mt19937",
                       "seed_source": {"kind": "os_entropy"}},
        ))
        path = tmp_path / "manifest.json"
        export_manifest(imap, str(path))
        result = subprocess.run(
            [sys.executable, "-m", "rngsentinel", "policy", str(path)],
            capture_output=True, text=True)
        assert result.returncode == 0
        violations = json.loads(result.stdout)
        assert [(v["function_id"], v["rule"]) for v in violations] == [
            ("fakeml.randn", "non_csprng_in_dp_context")]

    def test_empty_map_zero_violations(self, tmp_path):
        path = tmp_path / "manifest.json"
        export_manifest(InterceptionMap([]), str(path))
        result = subprocess.run(
            [sys.executable, "-m", "rngsentinel", "policy", str(path),
             "--strict"],
            capture_output=True, text=True)
        assert result.returncode == 0
        assert json.loads(result.stdout) == []


class TestModuleLevelApi:
    def test_install_uninstall_cycle(self):
        fakeml.seed(51)
        shim = pyshim.install(normal_map())
        assert pyshim.active() is shim
        with pytest.raises(ShimError):
            pyshim.install(normal_map())
        pyshim.uninstall()
        assert pyshim.active() is None

    def test_first_import_sufficiency_script(self):
        script = os.path.join(FIXTURES, "first_import_check.py")
        result = subprocess.run([sys.executable, script],
                                capture_output=True, text=True, timeout=120)
        assert result.returncode == 0, result.stdout + result.stderr
        summary = json.loads(result.stdout.splitlines()[-1])
        assert summary["randn_reports"] >= 2
        assert summary["dropped"] == 0
