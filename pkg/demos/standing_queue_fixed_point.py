#!/usr/bin/env python3
"""A single delay-target (LEDBAT) flow on an otherwise idle bottleneck.

The controller steers the queuing delay toward tau = 25 ms. At 10 Mbit/s
with 1500 B packets that is a standing queue of tau*C/(8*S) = 20.8 packets,
i.e. about 21% of the 100-packet buffer. The run should show exactly that
occupancy, zero loss, and a full pipe.
"""

from lbesim import FlowConfig, ScenarioConfig, run_scenario

PREDICTED_BACKLOG = 0.025 * 10e6 / (8.0 * 1500)


def main():
    cfg = ScenarioConfig(flows=[FlowConfig("ledbat", {"tau_ms": 25.0})])
    result = run_scenario(cfg, scenario_id="solo-ledbat")
    r = result.report
    print("predicted standing queue : %.2f packets (%.1f%% of buffer)"
          % (PREDICTED_BACKLOG, PREDICTED_BACKLOG))
    print("measured queue occupancy : %.1f%% of buffer" % (100 * r.b_norm))
    print("link utilisation         : %.1f%%" % (100 * r.eta))
    print("packet loss rate         : %.3g" % r.p_l)


if __name__ == "__main__":
    main()
