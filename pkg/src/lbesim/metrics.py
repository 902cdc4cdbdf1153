"""Run-level performance metrics: bottleneck efficiency, TCP traffic
breakdown, Jain fairness (long- and short-term), normalized queue occupancy
and packet loss rate.

All functions are pure and operate on immutable counter snapshots taken
after a run. Throughput is goodput measured at the receiver, so efficiency
never exceeds one (up to header accounting noise).
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FlowCounters:
    flow_id: object
    protocol: str
    bytes_delivered: int          # new in-order bytes at the receiver
    packets_sent: int             # into the bottleneck, retransmits included
    packets_dropped: int
    deliveries: list = field(default_factory=list)  # (time_s, bytes)


@dataclass
class MetricsReport:
    scenario_id: str
    params: dict
    eta: float
    tcp_pct: float | None         # None when no Reno flow is present
    f_lt: float | None
    f_st: float | None
    f_st_min: float | None
    b_norm: float
    p_l: float
    per_flow: list                # (flow_id, protocol, throughput_bps)
    per_window_jain: list         # (window_start_s, jain) over active windows

    CSV_COLUMNS = ("scenario_id", "params", "eta", "tcp_pct", "f_lt", "f_st",
                   "b_norm", "p_l")  # then one throughput column per flow

    def csv_row(self):
        """Stable, documented column order: scenario_id, params, eta,
        tcp_pct, f_lt, f_st, b_norm, p_l, then per-flow throughputs."""
        params = ";".join("%s=%s" % (k, _fmt(v))
                          for k, v in sorted(self.params.items()))
        cells = [self.scenario_id, params,
                 _fmt(self.eta), _fmt(self.tcp_pct), _fmt(self.f_lt),
                 _fmt(self.f_st), _fmt(self.b_norm), _fmt(self.p_l)]
        cells.extend(_fmt(x) for _, _, x in self.per_flow)
        return ",".join(cells)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.10g" % v
    return str(v)


def flow_throughput(c, horizon_s):
    """Average goodput in bits/second over the run horizon."""
    if horizon_s <= 0:
        raise ValueError("horizon must be positive")
    return c.bytes_delivered * 8.0 / horizon_s


def efficiency(flows, horizon_s, capacity_bps):
    """Aggregate throughput over capacity. Must not exceed 1.001."""
    if capacity_bps <= 0:
        raise ValueError("capacity must be positive")
    eta = sum(flow_throughput(c, horizon_s) for c in flows) / capacity_bps
    if eta > 1.001:
        raise ValueError("efficiency %.4f exceeds 1.001: accounting bug" % eta)
    return eta


def tcp_breakdown(flows, horizon_s):
    """Share of delivered traffic belonging to TCP Reno flows; None (absent)
    when no Reno flow participates."""
    if not any(c.protocol == "reno" for c in flows):
        return None
    total = sum(flow_throughput(c, horizon_s) for c in flows)
    if total == 0:
        return None
    reno = sum(flow_throughput(c, horizon_s) for c in flows
               if c.protocol == "reno")
    return reno / total


def jain_index(rates):
    """(sum x)^2 / (N sum x^2); 1 for equal shares, 1/N under monopoly.
    Undefined (None) for an all-zero vector."""
    x = np.asarray(rates, dtype=float)
    if x.size == 0 or np.any(x < 0):
        raise ValueError("rates must be a non-empty vector of non-negatives")
    s2 = float(np.sum(x * x))
    if s2 == 0.0:
        return None
    return float(np.sum(x)) ** 2 / (x.size * s2)


def short_term_fairness(deliveries_per_flow, horizon_s, window_s=1.0):
    """Per-window Jain index over windowed throughputs, aggregated over the
    windows that carry traffic. Returns (mean, min, series)."""
    n_bins = int(np.ceil(horizon_s / window_s))
    if n_bins < 1:
        raise ValueError("window does not fit in the horizon")
    mat = np.zeros((len(deliveries_per_flow), n_bins))
    for i, events in enumerate(deliveries_per_flow):
        for t, nbytes in events:
            b = min(int(t / window_s), n_bins - 1)
            mat[i, b] += nbytes
    series = []
    for b in range(n_bins):
        col = mat[:, b]
        if col.sum() > 0:
            series.append((b * window_s, jain_index(col)))
    if not series:
        return None, None, []
    vals = [j for _, j in series]
    return float(np.mean(vals)), float(np.min(vals)), series


def queue_occupancy(samples, buffer_pkts):
    """Mean enqueue-time backlog normalized by the buffer size."""
    if not samples:
        raise ValueError("no queue samples")
    depths = np.asarray([d for _, d in samples], dtype=float)
    if depths.min() < 0 or depths.max() > buffer_pkts:
        raise ValueError("queue sample out of [0, B_max]")
    return float(depths.mean()) / buffer_pkts


def loss_rate(flows):
    """Dropped over sent, across all flows on the bottleneck (data packets
    only; acks never traverse the queue in this model)."""
    sent = sum(c.packets_sent for c in flows)
    if sent == 0:
        raise ValueError("no packets sent")
    return sum(c.packets_dropped for c in flows) / sent


def build_report(scenario_id, params, flows, queue_samples, buffer_pkts,
                 horizon_s, capacity_bps, window_s=1.0):
    """Assemble the full metric suite for one finished run."""
    f_st, f_st_min, series = short_term_fairness(
        [c.deliveries for c in flows], horizon_s, window_s)
    rates = [flow_throughput(c, horizon_s) for c in flows]
    return MetricsReport(
        scenario_id=scenario_id,
        params=params,
        eta=efficiency(flows, horizon_s, capacity_bps),
        tcp_pct=tcp_breakdown(flows, horizon_s),
        f_lt=jain_index(rates),
        f_st=f_st,
        f_st_min=f_st_min,
        b_norm=queue_occupancy(queue_samples, buffer_pkts),
        p_l=loss_rate(flows),
        per_flow=[(c.flow_id, c.protocol, r) for c, r in zip(flows, rates)],
        per_window_jain=series,
    )
