"""Import-first interception shim for host-framework RNG entry points.

Import this module before any host framework module, install a map of
(function path, declared distribution, context) entries, and every mapped
function is wrapped in place: its return values are forwarded to the audit
engine as text-stream batches while the host sees bit-identical behavior.

The engine is a separate process reached through its CLI stream interface
(one `audit --text` subprocess per mapped entry); this package never
imports the engine. Forwarding is buffered and non-blocking on the host
thread: when the forwarding queue is full, whole batches are dropped and
counted, never silently discarded. The PYSHIM_ENGINE environment variable
overrides the engine command.
"""

from __future__ import annotations

import functools
import importlib
import json
import logging
import os
import shlex
import subprocess
import sys
import threading
from collections import deque
from dataclasses import dataclass, field

ENGINE_ENV_VAR = "PYSHIM_ENGINE"
DEFAULT_BATCH_SIZE = 100
DEFAULT_QUEUE_BATCHES = 64

log = logging.getLogger("pyshim")

SUPPORTED_FAMILIES = {"uniform_real", "uniform_int", "normal", "laplace"}


class ShimError(Exception):
    pass


class HostImportError(ShimError):
    """A mapped host function path could not be resolved."""


class EndpointUnavailable(ShimError):
    """The audit engine process could not be started."""


@dataclass(frozen=True)
class InterceptionEntry:
    """One host function to wrap.

    ``spec`` is the engine's distribution JSON ({"family": "normal",
    "mu": 0, "sigma": 1}); ``context`` is "general" or the engine's
    differential-privacy context object; ``generator`` optionally
    describes the host's default generator for manifest export.
    """

    path: str
    spec: dict
    context: object = "general"
    generator: dict | None = None


@dataclass
class InterceptionMap:
    entries: list[InterceptionEntry] = field(default_factory=list)

    def validate(self) -> None:
        paths = [e.path for e in self.entries]
        if len(set(paths)) != len(paths):
            raise ShimError("interception paths must be unique")
        for entry in self.entries:
            family = entry.spec.get("family")
            if family not in SUPPORTED_FAMILIES:
                raise ShimError(
                    f"{entry.path}: unsupported distribution family {family!r}")


def _spec_cli_form(spec: dict) -> str:
    family = spec["family"]
    if family == "uniform_real":
        return f"uniform:{spec['a']},{spec['b']}"
    if family == "uniform_int":
        return f"uniformint:{spec['a']},{spec['b']}"
    if family == "normal":
        return f"normal:{spec['mu']},{spec['sigma']}"
    if family == "laplace":
        return f"laplace:{spec['mu']},{spec['b']}"
    raise ShimError(f"unsupported family {family!r}")


def engine_command() -> list[str]:
    raw = os.environ.get(ENGINE_ENV_VAR)
    if raw:
        return shlex.split(raw)
    return [sys.executable, "-m", "rngsentinel"]


def _resolve(path: str):
    """Longest importable module prefix, then attribute walk.

    Returns (container object, attribute name, original callable).
    """
    parts = path.split(".")
    module = None
    split_at = 0
    for i in range(len(parts) - 1, 0, -1):
        try:
            module = importlib.import_module(".".join(parts[:i]))
            split_at = i
            break
        except ImportError:
            continue
    if module is None:
        raise HostImportError(f"no importable module prefix in {path!r}")
    container = module
    for attr in parts[split_at:-1]:
        try:
            container = getattr(container, attr)
        except AttributeError as exc:
            raise HostImportError(f"{path!r}: {exc}") from exc
    name = parts[-1]
    try:
        original = getattr(container, name)
    except AttributeError as exc:
        raise HostImportError(f"{path!r}: {exc}") from exc
    if not callable(original):
        raise HostImportError(f"{path!r} is not callable")
    return container, name, original


def _flatten(value):
    if isinstance(value, (list, tuple)):
        for item in value:
            yield from _flatten(item)
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        yield float(value)


class _Forwarder:
    """Per-entry buffered, non-blocking bridge to one engine subprocess."""

    def __init__(self, entry: InterceptionEntry, command: list[str],
                 batch_size: int, queue_batches: int):
        self.entry = entry
        self.batch_size = batch_size
        self.samples_seen = 0
        self.forwarded_batches = 0
        self.dropped_batches = 0
        self.reports: list[dict] = []
        self._buffer: list[float] = []
        self._queue: deque[list[float]] = deque()
        self._queue_cap = queue_batches
        self._lock = threading.Lock()
        self._have_work = threading.Event()
        self._closing = False
        self._warned_drop = False
        argv = command + ["audit", "--text",
                          "--spec", _spec_cli_form(entry.spec),
                          "--batch-size", str(batch_size)]
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, text=True)
        except OSError as exc:
            raise EndpointUnavailable(f"cannot start engine {argv!r}: {exc}") from exc
        self._writer = threading.Thread(target=self._write_loop, daemon=True,
                                        name=f"pyshim-write-{entry.path}")
        self._reader = threading.Thread(target=self._read_loop, daemon=True,
                                        name=f"pyshim-read-{entry.path}")
        self._writer.start()
        self._reader.start()

    # host-thread side: never blocks on I/O
    def offer(self, result) -> None:
        for value in _flatten(result):
            self.samples_seen += 1
            self._buffer.append(value)
            if len(self._buffer) >= self.batch_size:
                batch, self._buffer = self._buffer, []
                with self._lock:
                    if len(self._queue) >= self._queue_cap:
                        self.dropped_batches += 1
                        if not self._warned_drop:
                            self._warned_drop = True
                            log.warning(
                                "pyshim: forwarding queue full for %s;"
                                " dropping batches (counted)", self.entry.path)
                    else:
                        self._queue.append(batch)
                        self._have_work.set()

    def _write_loop(self) -> None:
        stdin = self._proc.stdin
        while True:
            self._have_work.wait(timeout=0.2)
            with self._lock:
                batch = self._queue.popleft() if self._queue else None
                if batch is None:
                    self._have_work.clear()
                    if self._closing:
                        break
            if batch is not None:
                try:
                    stdin.write("\n".join(repr(v) for v in batch) + "\n")
                    stdin.flush()
                    self.forwarded_batches += 1
                except (BrokenPipeError, ValueError, OSError):
                    break
        try:
            stdin.close()
        except (BrokenPipeError, ValueError, OSError):
            pass

    def _read_loop(self) -> None:
        for line in self._proc.stdout:
            line = line.strip()
            if not line:
                continue
            try:
                self.reports.append(json.loads(line))
            except json.JSONDecodeError:
                continue

    def close(self, timeout: float = 30.0) -> None:
        with self._lock:
            self._closing = True
            self._have_work.set()
        self._writer.join(timeout=timeout)
        self._reader.join(timeout=timeout)
        try:
            self._proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait(timeout=5.0)

    def stats(self) -> dict:
        warns = sum(1 for r in self.reports if r.get("verdict") == "warn")
        return {
            "path": self.entry.path,
            "samples_seen": self.samples_seen,
            "forwarded_batches": self.forwarded_batches,
            "dropped_batches": self.dropped_batches,
            "reports": len(self.reports),
            "warns": warns,
        }


class Shim:
    """Holds the wrapped host functions and their forwarders."""

    def __init__(self, imap: InterceptionMap, engine: list[str] | None = None,
                 batch_size: int = DEFAULT_BATCH_SIZE,
                 queue_batches: int = DEFAULT_QUEUE_BATCHES):
        imap.validate()
        self.imap = imap
        command = list(engine) if engine is not None else engine_command()
        self._wrapped: list[tuple[object, str, object]] = []
        self._forwarders: dict[str, _Forwarder] = {}
        self._installed = False
        self._command = command
        self._batch_size = batch_size
        self._queue_batches = queue_batches

    def install(self) -> "Shim":
        if self._installed:
            return self
        for entry in self.imap.entries:
            container, name, original = _resolve(entry.path)
            forwarder = _Forwarder(entry, self._command,
                                   self._batch_size, self._queue_batches)
            if forwarder._proc.poll() is not None:
                raise EndpointUnavailable(
                    f"engine exited immediately (command {self._command!r})")
            self._forwarders[entry.path] = forwarder

            @functools.wraps(original)
            def wrapper(*args, __original=original, __forwarder=forwarder,
                        **kwargs):
                result = __original(*args, **kwargs)
                __forwarder.offer(result)
                return result

            setattr(container, name, wrapper)
            self._wrapped.append((container, name, original))
        self._installed = True
        return self

    def uninstall(self, timeout: float = 30.0) -> None:
        """Restore every wrapped function and shut the engine down.

        Full batches already queued are flushed; a trailing partial batch
        is discarded (the engine cannot test it anyway).
        """
        if not self._installed:
            return
        for container, name, original in self._wrapped:
            setattr(container, name, original)
        self._wrapped.clear()
        for forwarder in self._forwarders.values():
            forwarder.close(timeout=timeout)
        self._installed = False

    def rebind(self, path: str, replacement) -> None:
        """Apply a remediation directive host-side: swap the mapped
        function's underlying implementation while keeping forwarding."""
        if path not in self._forwarders:
            raise ShimError(f"{path!r} is not an intercepted path")
        container, name, _ = _resolve(path)
        forwarder = self._forwarders[path]

        @functools.wraps(replacement)
        def wrapper(*args, **kwargs):
            result = replacement(*args, **kwargs)
            forwarder.offer(result)
            return result

        setattr(container, name, wrapper)

    def reports(self, path: str | None = None) -> list[dict]:
        if path is not None:
            return list(self._forwarders[path].reports)
        out: list[dict] = []
        for forwarder in self._forwarders.values():
            out.extend(forwarder.reports)
        return out

    def stats(self) -> list[dict]:
        return [f.stats() for f in self._forwarders.values()]

    def __enter__(self) -> "Shim":
        return self.install()

    def __exit__(self, *exc) -> None:
        self.uninstall()


_active: Shim | None = None


def install(imap: InterceptionMap, engine: list[str] | None = None,
            batch_size: int = DEFAULT_BATCH_SIZE,
            queue_batches: int = DEFAULT_QUEUE_BATCHES) -> Shim:
    """Install the module-level shim. Call before host imports elsewhere."""
    global _active
    if _active is not None:
        raise ShimError("a shim is already installed; uninstall() first")
    shim = Shim(imap, engine=engine, batch_size=batch_size,
                queue_batches=queue_batches)
    shim.install()
    _active = shim
    return shim


def uninstall(timeout: float = 30.0) -> None:
    global _active
    if _active is not None:
        _active.uninstall(timeout=timeout)
        _active = None


def active() -> Shim | None:
    return _active


def export_manifest(imap: InterceptionMap, path: str) -> dict:
    """Write the engine's manifest JSON for the mapped entries.

    One function per entry, all entries are core RNG ids, edges empty
    (the map is flat: every mapped path IS a core primitive).
    """
    imap.validate()
    manifest = {
        "functions": [
            {
                "id": entry.path,
                "distribution": entry.spec,
                **({"generator": entry.generator} if entry.generator else {}),
                "context": entry.context,
            }
            for entry in imap.entries
        ],
        "edges": [],
        "core_rng_ids": [entry.path for entry in imap.entries],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest
