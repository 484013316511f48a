"""Runtime statistical auditing of generator streams.

Draws flow through an AuditedGenerator unchanged (auditing is observation,
not perturbation). Full batches become AuditEvents on a bounded work
queue; a single worker thread runs the configured goodness-of-fit test
and appends the result to the audit log. Three execution modes:

* blocking - the producing draw does not return until its batch's report
  is complete.
* asn      - asynchronous: the producer continues while the worker tests.
* rasn     - asynchronous and sampled: only every stride-th batch is
  enqueued; the rest are discarded unexamined. The selection is a
  deterministic counter, not a coin flip.

Shared state is limited to the two queues and the log; the work queue is
bounded and a full queue blocks the producer rather than dropping events.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from queue import Queue

from .errors import AuditorStopped, DrainTimeout, InvalidConfig, UnknownSlot
from .generators import CtrCsprng, GeneratorHandle
from .policy import Directive
from .seeds import OsEntropy
from .stats import (
    TestReport,
    chi_square_test,
    ks_test,
    uniform_int_bin_counts,
    z_test,
)
from .transforms import DistributionSpec, Normal, UniformInt, sample_iter

DEFAULT_BATCH_SIZE = 100
DEFAULT_STRIDE = 10


class Mode(str, Enum):
    BLOCKING = "blocking"
    ASN = "asn"
    RASN = "rasn"


@dataclass
class AuditorConfig:
    mode: Mode = Mode.BLOCKING
    batch_size: int = DEFAULT_BATCH_SIZE
    warn_threshold: float = 0.01
    queue_capacity: int = 1024
    stride: int = DEFAULT_STRIDE
    continuous_test: str = "ks"  # "ks" or "z" (z only for normal specs)
    discrete_bins: int = 10

    def validate(self) -> None:
        if self.batch_size < 20:
            raise InvalidConfig(f"batch_size below the KS floor of 20: {self.batch_size}")
        if self.stride < 1:
            raise InvalidConfig(f"stride must be >= 1: {self.stride}")
        if self.queue_capacity < 1:
            raise InvalidConfig(f"queue_capacity must be >= 1: {self.queue_capacity}")
        if not 0.0 < self.warn_threshold < 1.0:
            raise InvalidConfig(f"warn_threshold must be in (0, 1): {self.warn_threshold}")
        if self.continuous_test not in ("ks", "z"):
            raise InvalidConfig(f"unknown continuous test: {self.continuous_test}")
        if self.discrete_bins < 2:
            raise InvalidConfig(f"need at least 2 discrete bins: {self.discrete_bins}")


@dataclass
class AuditEvent:
    source_tag: str
    spec: DistributionSpec
    samples: list
    sequence_index: int


@dataclass
class AuditRecord:
    source_tag: str
    sequence_index: int
    report: TestReport

    def to_json(self) -> dict:
        out = {"type": "report", "source": self.source_tag,
               "sequence_index": self.sequence_index}
        out.update(self.report.to_json())
        return out


class _WorkItem:
    __slots__ = ("event", "done")

    def __init__(self, event: AuditEvent):
        self.event = event
        self.done = threading.Event()


_STOP = object()


class AuditedGenerator:
    """Wraps a generator handle with a declared distribution.

    The value sequence returned by :meth:`draw` is element-for-element the
    sequence the unwrapped generator would produce for the same seed; the
    wrapper only copies full batches aside for auditing. An attack
    substitution redirects the draw path to a different actual
    distribution while the declared spec (what gets audited against)
    stays put.
    """

    def __init__(self, auditor: "Auditor", inner: GeneratorHandle,
                 spec: DistributionSpec, slot: str, dynamic: bool = True):
        self._auditor = auditor
        self.inner = inner
        self.spec = spec
        self.slot = slot
        self.dynamic = dynamic
        self.actual_spec: DistributionSpec | None = None
        self.sequence_counter = 0
        self._buffer: list = []
        self._batch_size = auditor.config.batch_size
        self._iter = sample_iter(inner, spec)

    @property
    def security_class(self):
        return self.inner.security_class

    def draw(self):
        value = next(self._iter)
        if self.dynamic:
            buf = self._buffer
            buf.append(value)
            if len(buf) >= self._batch_size:
                self.sequence_counter += 1
                event = AuditEvent(self.slot, self.spec, buf, self.sequence_counter)
                self._buffer = []
                self._auditor.submit(event)
        return value

    def draw_batch(self, n: int) -> list:
        draw = self.draw
        return [draw() for _ in range(n)]

    def set_actual(self, actual: DistributionSpec) -> None:
        """Attack hook: sample from ``actual`` while declaring ``spec``."""
        self.actual_spec = actual
        self._iter = sample_iter(self.inner, actual)

    def replace_inner(self, handle: GeneratorHandle) -> None:
        """Swap the generator and restore the declared transform."""
        self.inner = handle
        self.actual_spec = None
        self._iter = sample_iter(handle, self.spec)

    def reseed_inner(self, source) -> None:
        """Reseed in place; transform (including any substitution) stays."""
        self.inner.reseed_from(source)
        self._iter = sample_iter(self.inner, self.actual_spec or self.spec)


class Auditor:
    """Owns the work queue, the worker thread, the slot registry, and the
    newline-delimited JSON audit log."""

    def __init__(self, config: AuditorConfig | None = None,
                 log_path: str | None = None):
        self.config = config or AuditorConfig()
        self.config.validate()
        self.registry: dict[str, AuditedGenerator] = {}
        self._work_q: Queue = Queue(maxsize=self.config.queue_capacity)
        self._records: list[AuditRecord] = []
        self.audit_log: list[dict] = []
        self._lock = threading.Lock()
        self._quiescent = threading.Condition(self._lock)
        self._accepted = 0
        self._completed = 0
        self._worker: threading.Thread | None = None
        self._stopped = False
        self._worker_failure: BaseException | None = None
        self._log_fh = open(log_path, "a", encoding="utf-8") if log_path else None

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> "Auditor":
        if self._worker is None and not self._stopped:
            self._worker = threading.Thread(target=self._run, daemon=True,
                                            name="auditor-worker")
            self._worker.start()
        return self

    def stop(self) -> None:
        """Idempotent; the worker drains everything already queued, then exits."""
        if self._stopped:
            return
        self._stopped = True
        if self._worker is not None:
            self._work_q.put(_STOP)
            self._worker.join()
            self._worker = None
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    def __enter__(self) -> "Auditor":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def running(self) -> bool:
        return self._worker is not None and not self._stopped

    # -- producer side ------------------------------------------------------

    def wrap(self, inner: GeneratorHandle, spec: DistributionSpec,
             slot: str | None = None, dynamic: bool = True) -> AuditedGenerator:
        if isinstance(spec, UniformInt) and spec.b - spec.a < 2:
            raise InvalidConfig("discrete auditing needs at least 2 distinct values")
        if slot is None:
            slot = f"slot{len(self.registry)}"
        gen = AuditedGenerator(self, inner, spec, slot, dynamic=dynamic)
        self.registry[slot] = gen
        return gen

    def submit(self, event: AuditEvent) -> None:
        """Mode-aware submission; blocks while the work queue is full."""
        if self._stopped or self._worker is None:
            raise AuditorStopped("auditor is not running")
        mode = self.config.mode
        if mode is Mode.RASN and event.sequence_index % self.config.stride != 0:
            return  # discarded unexamined
        item = _WorkItem(event)
        with self._lock:
            self._accepted += 1
        self._work_q.put(item)
        if mode is Mode.BLOCKING:
            item.done.wait()
            if self._worker_failure is not None:
                raise self._worker_failure

    # -- consumer side ------------------------------------------------------

    def _run(self) -> None:
        while True:
            item = self._work_q.get()
            if item is _STOP:
                self._work_q.task_done()
                break
            try:
                report = self._run_test(item.event)
                record = AuditRecord(item.event.source_tag,
                                     item.event.sequence_index, report)
                with self._quiescent:
                    self._records.append(record)
                    self._append_log(record.to_json())
                    self._completed += 1
                    self._quiescent.notify_all()
            except Exception as exc:  # surfaced via drain_reports
                with self._quiescent:
                    self._worker_failure = exc
                    self._completed += 1
                    self._quiescent.notify_all()
            finally:
                item.done.set()
                self._work_q.task_done()

    def _run_test(self, event: AuditEvent) -> TestReport:
        spec = event.spec
        threshold = self.config.warn_threshold
        if isinstance(spec, UniformInt):
            n = len(event.samples)
            m = spec.b - spec.a
            k = min(self.config.discrete_bins, m)
            while k > 2 and n * (m // k) / m < 5.0:  # keep every bin valid
                k -= 1
            counts, expected = uniform_int_bin_counts(
                event.samples, spec.a, spec.b, k)
            return chi_square_test(counts, expected, threshold,
                                   target=spec.describe())
        if self.config.continuous_test == "z" and isinstance(spec, Normal):
            return z_test(event.samples, spec.mu, spec.sigma, threshold,
                          target=spec.describe())
        standard = spec.standard()
        mapped = [spec.standardize(x) for x in event.samples]
        return ks_test(mapped, standard.cdf, threshold, target=spec.describe())

    def _append_log(self, record: dict) -> None:
        self.audit_log.append(record)
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(record) + "\n")
            self._log_fh.flush()

    # -- results ------------------------------------------------------------

    def poll_reports(self) -> list[AuditRecord]:
        """Hand back whatever has completed so far, without waiting."""
        with self._quiescent:
            if self._worker_failure is not None:
                raise self._worker_failure
            out = self._records
            self._records = []
            return out

    def drain_reports(self, timeout: float | None = None) -> list[AuditRecord]:
        """Wait for every accepted event to complete, then hand back all
        records accumulated since the last drain, in completion order."""
        with self._quiescent:
            ok = self._quiescent.wait_for(
                lambda: self._completed >= self._accepted, timeout=timeout)
            if not ok:
                raise DrainTimeout(
                    f"{self._accepted - self._completed} events still pending"
                    f" after {timeout}s")
            if self._worker_failure is not None:
                raise self._worker_failure
            out = self._records
            self._records = []
            return out

    # -- enforcement --------------------------------------------------------

    def enforce(self, plan: list[tuple[str, Directive]]) -> None:
        """Apply remediation directives to registered slots.

        reseed_from_os_entropy reseeds the existing generator in place;
        replace_with_csprng swaps in a fresh AES-CTR generator and
        restores the declared transform. Every rebind lands in the audit
        log.
        """
        for slot, directive in plan:
            gen = self.registry.get(slot)
            if gen is None:
                raise UnknownSlot(slot)
            directive = Directive(directive)
            if directive is Directive.RESEED_FROM_OS_ENTROPY:
                gen.reseed_inner(OsEntropy())
            elif directive is Directive.REPLACE_WITH_CSPRNG:
                gen.replace_inner(CtrCsprng())
            with self._lock:
                self._append_log({
                    "type": "rebind",
                    "slot": slot,
                    "directive": directive.value,
                    "algorithm": gen.inner.algorithm.value,
                    "security_class": gen.inner.security_class.value,
                })
