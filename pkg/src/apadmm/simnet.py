"""Deterministic discrete-event simulator for a star network of gradient workers.

One master broadcasts x copies to K workers; each worker computes the
gradient of its component at the copy it picked up and sends it back.
Time is measured in master-iteration units: the master broadcasts, waits a
fixed window (default 1.0), then collects whatever gradients arrived.

Semantics pinned down here:

* A worker is either idle or computing. Copies delivered while computing
  are dropped, not queued. Copies delivered at the same instant to an idle
  worker are batched; the worker starts on the one with the highest
  master-iteration index and the others are dropped.
* Per-message loss is sampled at send time; lost messages consume no delay
  draw. On a link with reordering disallowed, delivery times are clamped
  to be no earlier than the previous delivery on that link, and ties
  preserve send order, so arrivals are FIFO.
* Events are ordered by (time, insertion sequence), so equal-time events
  process in creation order and the whole simulation is a pure function of
  the seed and the call sequence.
* ``collect`` returns at most one gradient per worker: the one with the
  smallest worker-local stamp, older leftovers and fresher duplicates in
  the same window are discarded.

The simulator is generic over the gradient computation: it calls a
``gradient_fn(worker, x)`` callback at compute completion, so tests can
drive it with toy functions.
"""

import copy
import heapq
from dataclasses import dataclass, field

import numpy as np

__all__ = ["DelayModel", "LinkModel", "ComputeModel", "Message", "StarNetwork"]


class DelayModel:
    """Delay distribution: constant, uniform(lo, hi), or a cyclic empirical list.

    Empirical lists are consumed deterministically in order, wrapping
    around; this makes scripted scenarios (for example two consecutive
    sends with delays 5 then 1) reproducible.
    """

    def __init__(self, kind, value=0.0, lo=0.0, hi=0.0, values=None):
        self.kind = kind
        if kind == "constant":
            if value < 0:
                raise ValueError("constant delay must be nonnegative")
            self.value = float(value)
        elif kind == "uniform":
            if lo < 0 or hi < lo:
                raise ValueError("uniform delay needs 0 <= lo <= hi")
            self.lo, self.hi = float(lo), float(hi)
        elif kind == "empirical":
            vals = [float(v) for v in (values or [])]
            if not vals or any(v < 0 for v in vals):
                raise ValueError("empirical delays need a nonempty nonnegative list")
            self.values = vals
            self._cursor = 0
        else:
            raise ValueError("unknown delay kind %r" % (kind,))

    @classmethod
    def constant(cls, value=0.0):
        return cls("constant", value=value)

    @classmethod
    def uniform(cls, lo, hi):
        return cls("uniform", lo=lo, hi=hi)

    @classmethod
    def empirical(cls, values):
        return cls("empirical", values=values)

    def sample(self, rng):
        if self.kind == "constant":
            return self.value
        if self.kind == "uniform":
            if self.hi == self.lo:
                return self.lo
            return float(rng.uniform(self.lo, self.hi))
        out = self.values[self._cursor % len(self.values)]
        self._cursor += 1
        return out


@dataclass
class LinkModel:
    """One directed link: delay distribution, loss probability, reordering flag."""

    delay: DelayModel = field(default_factory=DelayModel.constant)
    loss: float = 0.0
    allow_reordering: bool = False

    def __post_init__(self):
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError("loss probability must lie in [0, 1]")


@dataclass
class ComputeModel:
    """Per-worker compute-delay distribution in master-iteration units."""

    delay: DelayModel = field(default_factory=DelayModel.constant)


@dataclass
class Message:
    """A gradient message as seen by the master."""

    worker: int
    gradient: np.ndarray
    worker_stamp: int
    copy_index: int
    sent_at: float
    arrived_at: float


class StarNetwork:
    def __init__(self, num_workers, gradient_fn, downlinks, uplinks,
                 compute_models, seed=0, window=1.0):
        if window <= 0:
            raise ValueError("window must be positive")
        for name, models in (("downlinks", downlinks), ("uplinks", uplinks),
                             ("compute_models", compute_models)):
            if len(models) != num_workers:
                raise ValueError("%s must have one entry per worker" % name)
        self.num_workers = num_workers
        self.gradient_fn = gradient_fn
        # each link/compute model is copied so cyclic cursors are private
        self.downlinks = [copy.deepcopy(m) for m in downlinks]
        self.uplinks = [copy.deepcopy(m) for m in uplinks]
        self.compute_models = [copy.deepcopy(m) for m in compute_models]
        self.window = float(window)
        self.now = 0.0
        self._heap = []
        self._seq = 0
        self._rng = np.random.default_rng(seed)
        self._busy = [False] * num_workers
        self._pending = [None] * num_workers          # (copy_index, x) while idle
        self._pickup_scheduled = [False] * num_workers
        self._stamp = [1] * num_workers               # worker-local send counter
        self._last_down = [0.0] * num_workers         # FIFO clamps
        self._last_up = [0.0] * num_workers
        self._inbox = []
        self.dropped_busy = [0] * num_workers
        self.dropped_stale = [0] * num_workers
        self.lost_down = [0] * num_workers
        self.lost_up = [0] * num_workers

    # -- event plumbing ----------------------------------------------------

    def _schedule(self, time, action, payload):
        heapq.heappush(self._heap, (time, self._seq, action, payload))
        self._seq += 1

    def _link_delivery_time(self, link, last_delivery, delay):
        t = self.now + delay
        if not link.allow_reordering:
            t = max(t, last_delivery)
        return t

    # -- master side -------------------------------------------------------

    def broadcast(self, x, copy_index):
        """Send one x copy to every worker, subject to per-link loss and delay."""
        x = np.asarray(x, dtype=float)
        for k in range(self.num_workers):
            link = self.downlinks[k]
            if link.loss > 0.0 and self._rng.uniform() < link.loss:
                self.lost_down[k] += 1
                continue
            t = self._link_delivery_time(link, self._last_down[k], link.delay.sample(self._rng))
            self._last_down[k] = t
            self._schedule(t, "deliver_x", (k, x, int(copy_index)))

    def advance(self, duration=None):
        """Process all events strictly before now + duration, then move the clock.

        Events landing exactly on the boundary wait for the next window.
        """
        if duration is None:
            duration = self.window
        target = self.now + duration
        while self._heap and self._heap[0][0] < target:
            time, _, action, payload = heapq.heappop(self._heap)
            self.now = time
            getattr(self, "_on_" + action)(payload)
        self.now = target

    def collect(self):
        """Gradients that arrived during past windows, one per worker.

        Per worker the message with the smallest worker stamp wins and the
        rest are discarded; the inbox is cleared either way.
        """
        best = {}
        for msg in self._inbox:
            cur = best.get(msg.worker)
            if cur is None or msg.worker_stamp < cur.worker_stamp:
                best[msg.worker] = msg
        self._inbox = []
        return best

    def run_window(self, x, copy_index):
        """Broadcast, advance one window, collect: one master exchange."""
        self.broadcast(x, copy_index)
        self.advance(self.window)
        return self.collect()

    def advance_until_all(self, expected, max_time):
        """Blocking collect used by synchronous protocols.

        Runs events until every worker in ``expected`` has a message in
        the inbox or the clock passes ``max_time``. Returns the collected
        messages (possibly incomplete on timeout).
        """
        expected = set(expected)
        while True:
            have = {m.worker for m in self._inbox}
            if expected <= have:
                break
            if not self._heap or self._heap[0][0] > max_time:
                break
            time, _, action, payload = heapq.heappop(self._heap)
            self.now = time
            getattr(self, "_on_" + action)(payload)
        return self.collect()

    # -- worker side -------------------------------------------------------

    def _on_deliver_x(self, payload):
        k, x, copy_index = payload
        if self._busy[k]:
            self.dropped_busy[k] += 1
            return
        pending = self._pending[k]
        if pending is None or copy_index > pending[0]:
            if pending is not None:
                self.dropped_stale[k] += 1
            self._pending[k] = (copy_index, x)
        else:
            self.dropped_stale[k] += 1
        if not self._pickup_scheduled[k]:
            self._pickup_scheduled[k] = True
            self._schedule(self.now, "pickup", k)

    def _on_pickup(self, k):
        self._pickup_scheduled[k] = False
        if self._pending[k] is None or self._busy[k]:
            return
        copy_index, x = self._pending[k]
        self._pending[k] = None
        self._busy[k] = True
        delay = self.compute_models[k].delay.sample(self._rng)
        self._schedule(self.now + delay, "complete", (k, x, copy_index))

    def _on_complete(self, payload):
        k, x, copy_index = payload
        self._busy[k] = False
        stamp = self._stamp[k]
        self._stamp[k] += 1
        grad = self.gradient_fn(k, x)
        link = self.uplinks[k]
        if link.loss > 0.0 and self._rng.uniform() < link.loss:
            self.lost_up[k] += 1
            return
        t = self._link_delivery_time(link, self._last_up[k], link.delay.sample(self._rng))
        self._last_up[k] = t
        self._schedule(t, "deliver_grad", Message(
            worker=k, gradient=np.asarray(grad, dtype=float),
            worker_stamp=stamp, copy_index=copy_index,
            sent_at=self.now, arrived_at=t,
        ))

    def _on_deliver_grad(self, msg):
        msg.arrived_at = self.now
        self._inbox.append(msg)

    # -- direct sampling for blocking baselines ---------------------------

    def sample_round_trips(self):
        """One draw of downlink + compute + uplink delay per worker.

        Used by synchronous baselines, which block rather than window; no
        events are scheduled and no losses apply (callers must have
        rejected lossy configurations first).
        """
        out = np.empty(self.num_workers)
        for k in range(self.num_workers):
            d = self.downlinks[k].delay.sample(self._rng)
            c = self.compute_models[k].delay.sample(self._rng)
            u = self.uplinks[k].delay.sample(self._rng)
            out[k] = d + c + u
        return out

    @property
    def has_loss(self):
        return any(l.loss > 0 for l in self.downlinks) or any(
            l.loss > 0 for l in self.uplinks
        )
