"""Deterministic discrete-event core: simulation clock, event queue, run loop.

Time is kept internally as integer nanoseconds so that long runs are
bit-exact and reproducible; the public API speaks seconds (floats).
There is no randomness and no wall-clock access anywhere in the loop:
identical schedules produce identical event sequences.
"""

import heapq
from dataclasses import dataclass

NS_PER_S = 1_000_000_000

# Event kinds, used for the optional debug event log.
PACKET_ARRIVAL = "PacketArrival"
TRANSMISSION_COMPLETE = "TransmissionComplete"
RTO_TIMER = "RtoTimer"
INFERENCE_PHASE_END = "InferencePhaseEnd"
METRICS_SAMPLE_TICK = "MetricsSampleTick"


def to_ns(seconds):
    return int(round(seconds * NS_PER_S))


class ScheduleInPastError(ValueError):
    """Raised when an event is scheduled before the current clock."""


class SimulationFault(RuntimeError):
    """A handler raised; the offending event is identified in the message."""


class _Event:
    __slots__ = ("fire_at_ns", "seq", "kind", "fn", "label", "cancelled", "fired")

    def __init__(self, fire_at_ns, seq, kind, fn, label):
        self.fire_at_ns = fire_at_ns
        self.seq = seq
        self.kind = kind
        self.fn = fn
        self.label = label
        self.cancelled = False
        self.fired = False


class EventHandle:
    """Cancellation handle for a scheduled event."""

    __slots__ = ("_ev",)

    def __init__(self, ev):
        self._ev = ev

    @property
    def pending(self):
        return not (self._ev.cancelled or self._ev.fired)


@dataclass
class RunStats:
    events_processed: int
    pending: int


class Simulator:
    """Single-threaded event loop. Events with equal fire times dispatch in
    insertion order (FIFO within timestamp, like ns-2)."""

    def __init__(self, trace=None):
        self._now_ns = 0
        self._heap = []
        self._seq = 0
        self._live = 0
        self._processed = 0
        self.trace = trace  # optional callable(line) for the debug event log

    @property
    def now(self):
        """Current simulation time in seconds."""
        return self._now_ns / NS_PER_S

    @property
    def now_ns(self):
        return self._now_ns

    def schedule_at(self, at_s, kind, fn, label=""):
        return self.schedule_at_ns(to_ns(at_s), kind, fn, label)

    def schedule_after(self, delay_s, kind, fn, label=""):
        return self.schedule_at_ns(self._now_ns + to_ns(delay_s), kind, fn, label)

    def schedule_at_ns(self, at_ns, kind, fn, label=""):
        if at_ns < self._now_ns:
            raise ScheduleInPastError(
                "cannot schedule %s at t=%dns before now=%dns" % (kind, at_ns, self._now_ns)
            )
        ev = _Event(at_ns, self._seq, kind, fn, label)
        self._seq += 1
        self._live += 1
        heapq.heappush(self._heap, (at_ns, ev.seq, ev))
        return EventHandle(ev)

    def cancel(self, handle):
        """Make a pending event inert. Returns False if it already fired or
        was already cancelled."""
        ev = handle._ev
        if ev.cancelled or ev.fired:
            return False
        ev.cancelled = True
        self._live -= 1
        return True

    def run_until(self, t_end_s):
        """Process every event with fire time <= t_end, in (time, insertion)
        order, then set the clock to t_end."""
        t_end_ns = to_ns(t_end_s)
        if t_end_ns < self._now_ns:
            raise ScheduleInPastError("run_until target is in the past")
        heap = self._heap
        while heap and heap[0][0] <= t_end_ns:
            at_ns, _, ev = heapq.heappop(heap)
            if ev.cancelled:
                continue
            self._now_ns = at_ns
            ev.fired = True
            self._live -= 1
            self._processed += 1
            if self.trace is not None:
                self.trace("%.9f %s %s" % (at_ns / NS_PER_S, ev.kind, ev.label))
            try:
                ev.fn()
            except Exception as exc:
                raise SimulationFault(
                    "handler for %s (%s) at t=%.9f failed: %r"
                    % (ev.kind, ev.label, at_ns / NS_PER_S, exc)
                ) from exc
        self._now_ns = t_end_ns
        return RunStats(events_processed=self._processed, pending=self._live)
