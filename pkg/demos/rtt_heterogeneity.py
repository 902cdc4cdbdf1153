#!/usr/bin/env python3
"""Two flows of the same scheme with unequal round-trip times.

Flow 0 gets extra return-path delay so its RTT is 1x, 4x or 10x the base
50 ms. Window-per-RTT schemes (reno, nice) stay close to a fair split
because their per-epoch pacing adapts; the delay-target scheme hands the
link to the short-RTT flow, whose base-delay estimate and ack clock react
first.
"""

from lbesim import FlowConfig, ScenarioConfig, run_scenario

BASE_RTT = 0.05


def main():
    for proto in ("reno", "nice", "ledbat"):
        params = {"tau_ms": 25.0} if proto == "ledbat" else {}
        print(proto)
        for ratio in (1, 4, 10):
            cfg = ScenarioConfig(flows=[
                FlowConfig(proto, dict(params),
                           extra_return_delay_s=(ratio - 1) * BASE_RTT),
                FlowConfig(proto, dict(params)),
            ])
            r = run_scenario(cfg, scenario_id="%s-rtt%d" % (proto, ratio)).report
            big, small = (bps for _, _, bps in r.per_flow)
            print("  rtt ratio %2d: long=%5.2f Mbit/s short=%5.2f Mbit/s "
                  "fairness=%.3f eta=%.3f"
                  % (ratio, big / 1e6, small / 1e6, r.f_lt, r.eta))


if __name__ == "__main__":
    main()
