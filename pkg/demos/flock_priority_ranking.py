#!/usr/bin/env python3
"""Aggressiveness ranking of the three background schemes in a flock.

One Reno flow against ten background flows of one scheme. Per-flow shares
come out strictly ordered LEDBAT < NICE < LP: the delay-target scheme is
the most deferential, the delay-gated Reno variant the least.
"""

from lbesim import FlowConfig, ScenarioConfig, run_scenario

N = 10


def main():
    print("10 background flows of one scheme vs one reno flow:")
    for proto in ("ledbat", "nice", "lp"):
        params = {"tau_ms": 25.0} if proto == "ledbat" else {}
        cfg = ScenarioConfig(flows=[FlowConfig("reno")] +
                             [FlowConfig(proto, dict(params))
                              for _ in range(N)])
        r = run_scenario(cfg, scenario_id="flock-%s" % proto).report
        rates = [bps for _, _, bps in r.per_flow]
        share = sum(rates[1:]) / len(rates[1:]) / cfg.capacity_bps
        print("  %-6s  per-flow share=%5.2f%%  reno keeps %5.1f%%  "
              "loss=%.3g" % (proto, 100 * share,
                             100 * rates[0] / cfg.capacity_bps, r.p_l))


if __name__ == "__main__":
    main()
