"""Discrete-event driver for one streaming session."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import MalformedPacketError
from ..rng import ALGORITHM, make_rng
from .config import US, SimConfig
from .decoding_map import decode_frame, encode_frame
from .node import SOURCE, Clock, GenerationRecord, PeerNode
from .overlay import Overlay, build_overlay

_TX, _DATA, _STOP = 0, 1, 2


@dataclass
class LinkStats:
    sent: int = 0
    received: int = 0
    lost: int = 0
    stale: int = 0
    malformed: int = 0

    def balanced(self) -> bool:
        return self.sent == self.received + self.lost + self.stale + self.malformed


@dataclass
class SimMetrics:
    config: SimConfig
    continuity: dict[int, float]
    records: list[GenerationRecord]
    degree_histogram: np.ndarray
    links: dict[tuple[int, int], LinkStats]
    packets_received: int
    packets_from_source: int
    packets_redundant: int
    stops_sent: int
    stops_lost: int
    idle_opportunities: int
    payload_errors: int
    generation_latency: list[float] = field(default_factory=list)

    @property
    def mean_ci(self) -> float:
        return float(np.mean(list(self.continuity.values()))) if self.continuity else 0.0

    def overheads(self) -> np.ndarray:
        n = self.config.n
        return np.array([r.received / n - 1.0 for r in self.records])

    @property
    def mean_overhead(self) -> float:
        eps = self.overheads()
        return float(eps.mean()) if eps.size else math.nan

    def xor_totals(self) -> np.ndarray:
        return np.array([r.xor_triangularization + r.xor_diagonalization for r in self.records], dtype=float)

    @property
    def mean_xor(self) -> float:
        x = self.xor_totals()
        return float(x.mean()) if x.size else math.nan

    @property
    def source_fraction(self) -> float:
        return self.packets_from_source / self.packets_received if self.packets_received else 0.0

    def per_node_xors(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for r in self.records:
            out[r.node] = out.get(r.node, 0) + r.xor_triangularization + r.xor_diagonalization
        return out

    def summary(self) -> dict[str, Any]:
        eps = self.overheads()
        xors = self.xor_totals()
        return {
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "rng": ALGORITHM,
            "mean_ci": self.mean_ci,
            "mean_overhead": self.mean_overhead,
            "overhead_ci95": ci95(eps),
            "mean_xor": self.mean_xor,
            "xor_ci95": ci95(xors),
            "decoded_generations": len(self.records),
            "packets_received": self.packets_received,
            "source_fraction": self.source_fraction,
            "packets_redundant": self.packets_redundant,
            "stops_sent": self.stops_sent,
            "stops_lost": self.stops_lost,
            "idle_opportunities": self.idle_opportunities,
            "payload_errors": self.payload_errors,
            "mean_decode_latency": float(np.mean(self.generation_latency)) if self.generation_latency else math.nan,
            "degree_histogram": self.degree_histogram.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, allow_nan=True)


def ci95(samples: np.ndarray | list[float]) -> float:
    """Half-width of the normal-approximation 95% interval of the mean."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        return math.nan
    return float(1.96 * x.std(ddof=1) / math.sqrt(x.size))


class Session:
    """Event-driven simulation; all randomness flows from ``config.seed``."""

    def __init__(self, config: SimConfig):
        self.cfg = config
        self.clock = Clock(config)
        seed = config.seed
        self.overlay: Overlay = build_overlay(
            config.peer_count + 1, make_rng(seed, 0), config.full_mesh, config.overlay_degree
        )
        self.nodes = [
            PeerNode(i, self.overlay.adjacency[i], config, self.clock, make_rng(seed, 1, i))
            for i in range(self.overlay.node_count)
        ]
        self.loss_rng = make_rng(seed, 2)
        self.latency = round(config.latency * US)
        self.links: dict[tuple[int, int], LinkStats] = {}
        self.stops_sent = 0
        self.stops_lost = 0
        self.idle = 0
        self._queue: list[tuple] = []
        self._seq = 0

    def _push(self, when: int, kind: int, *payload: Any) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (when, self._seq, kind, payload))

    def _link(self, src: int, dst: int) -> LinkStats:
        stats = self.links.get((src, dst))
        if stats is None:
            stats = self.links[(src, dst)] = LinkStats()
        return stats

    def _lost(self) -> bool:
        return self.cfg.loss > 0 and self.loss_rng.random() < self.cfg.loss

    def run(self) -> SimMetrics:
        cfg = self.cfg
        phase_rng = make_rng(cfg.seed, 4)
        periods = {}
        for node in self.nodes:
            bw = cfg.resolved_source_bandwidth if node.is_source else cfg.resolved_peer_bandwidth
            period = cfg.period_us(bw)
            periods[node.id] = period
            if period is not None:
                self._push(phase_rng.randrange(period), _TX, node.id)
        end = self.clock.end
        queue = self._queue
        while queue:
            now, _, kind, payload = heapq.heappop(queue)
            if kind == _TX:
                if now > end:
                    continue
                node_id = payload[0]
                self._transmit(self.nodes[node_id], now)
                self._push(now + periods[node_id], _TX, node_id)
            elif kind == _DATA:
                self._deliver(now, *payload)
            else:
                dst, src, gen = payload
                self.nodes[dst].handle_stop(src, gen)
        return self._metrics()

    def _transmit(self, node: PeerNode, now: int) -> None:
        choice = node.schedule_packet(now)
        if choice is None:
            self.idle += 1
            return
        dst, pkt = choice
        dmap = node.decoding_map(now)
        stats = self._link(node.id, dst)
        stats.sent += 1
        if self._lost():
            stats.lost += 1
            return
        frame: Any = encode_frame(dmap, pkt) if self.cfg.wire else (dmap, pkt)
        self._push(now + self.latency, _DATA, node.id, dst, frame)

    def _deliver(self, now: int, src: int, dst: int, frame: Any) -> None:
        stats = self._link(src, dst)
        try:
            dmap, pkt = decode_frame(frame) if isinstance(frame, bytes) else frame
            status = self.nodes[dst].handle_packet(src, dmap, pkt, now)
        except MalformedPacketError:
            stats.malformed += 1
            return
        if status == "stale":
            stats.stale += 1
            return
        stats.received += 1
        if status == "decoded":
            self._broadcast_stop(self.nodes[dst], pkt.generation_id, now)

    def _broadcast_stop(self, node: PeerNode, gen: int, now: int) -> None:
        for peer in node.peers:
            self.stops_sent += 1
            if self._lost():
                self.stops_lost += 1
                continue
            self._push(now + self.latency, _STOP, peer, node.id, gen)

    def _metrics(self) -> SimMetrics:
        cfg = self.cfg
        peers = [n for n in self.nodes if not n.is_source]
        hist = np.zeros(cfg.n + 1, dtype=np.int64)
        records: list[GenerationRecord] = []
        for node in peers:
            hist += np.asarray(node.degree_counts, dtype=np.int64)
            records.extend(node.records)
        records.sort(key=lambda r: (r.generation, r.node))
        latency = [(r.decoded_at - r.generation * self.clock.ct) / US for r in records]
        return SimMetrics(
            config=cfg,
            continuity={n.id: n.continuity_index() for n in peers},
            records=records,
            degree_histogram=hist,
            links=self.links,
            packets_received=sum(n.packets_received for n in peers),
            packets_from_source=sum(n.from_source for n in peers),
            packets_redundant=sum(n.redundant for n in peers),
            stops_sent=self.stops_sent,
            stops_lost=self.stops_lost,
            idle_opportunities=self.idle,
            payload_errors=sum(n.payload_errors for n in peers),
            generation_latency=latency,
        )


def run_session(config: SimConfig) -> SimMetrics:
    return Session(config).run()
