"""Background CPU and memory sampling of the current process."""

from __future__ import annotations

import logging
import threading

log = logging.getLogger(__name__)

try:
    import psutil
except ImportError:  # pragma: no cover - psutil is a declared dependency
    psutil = None


class ResourceSampler:
    """Samples CPU percent and RSS every ``interval`` seconds until stopped.

    ``status`` ends up "ok", or "unavailable" when process metrics cannot be read.
    """

    def __init__(self, interval: float = 1.0):
        self.interval = interval
        self.cpu: list[float] = []
        self.rss: list[int] = []
        self.status = "ok"
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._proc = None

    def start(self) -> ResourceSampler:
        try:
            if psutil is None:
                raise RuntimeError("psutil is not installed")
            self._proc = psutil.Process()
            self._proc.cpu_percent(None)
        except Exception as exc:
            log.warning("resource metrics unavailable: %s", exc)
            self.status = "unavailable"
            return self
        self._thread = threading.Thread(target=self._run, name="resource-sampler", daemon=True)
        self._thread.start()
        return self

    def _run(self) -> None:
        while not self._stop.wait(self.interval):
            try:
                self.cpu.append(self._proc.cpu_percent(None))
                self.rss.append(self._proc.memory_info().rss)
            except Exception as exc:
                log.warning("resource sampling stopped: %s", exc)
                self.status = "unavailable"
                return

    def stop(self) -> ResourceSampler:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
        return self


def measure_resources(interval: float = 1.0) -> ResourceSampler:
    return ResourceSampler(interval).start()
