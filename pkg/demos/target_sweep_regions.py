#!/usr/bin/env python3
"""How the delay target decides who wins the bottleneck.

One Reno flow against one delay-target flow while the target sweeps from a
few percent of the buffer's worth of delay up to beyond it. Three regimes
appear: with a small target the background flow yields almost everything;
as the target approaches the full buffer delay the background flow takes
over; beyond the buffer (the target is unreachable, the flow behaves
loss-bound) the two split the link.
"""

from lbesim import FlowConfig, ScenarioConfig, SweepSpec, run_sweep

TARGETS_PCT = [10.0, 30.0, 60.0, 90.0, 110.0, 150.0]


def main():
    base = ScenarioConfig(flows=[
        FlowConfig("reno"),
        FlowConfig("ledbat", {"T_pct": 20.0, "G": 1.0}),
    ])
    spec = SweepSpec(base, "flows.1.params.T_pct", TARGETS_PCT)
    print("target (%% of buffer delay)   TCP share   background share   eta")
    for pt in run_sweep(spec, scenario_prefix="target"):
        r = pt.result.report
        print("%26s   %9.3f   %16.3f   %.3f"
              % (pt.label, r.tcp_pct, 1.0 - r.tcp_pct, r.eta))


if __name__ == "__main__":
    main()
