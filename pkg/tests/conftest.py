"""Shared fixtures: the full experiment catalog is expensive (about a
hundred 120-second runs), so it is executed once per session and reused by
every test that inspects catalog results."""

import pytest

from lbesim import harness

# Every (experiment id, protocol) instance of the catalog.
CATALOG = (
    ("fig1", None),
    ("fig2_gain", None),
    ("fig2_target", None),
    ("fig3_gain_ratio", None),
    ("fig3_target_ratio", None),
    ("fig4", "lp"),
    ("fig4", "nice"),
    ("fig4", "ledbat"),
    ("fig4", "reno"),
    ("fig5", None),
    ("fig6", "lp"),
    ("fig6", "nice"),
    ("fig6", "ledbat"),
    ("fig6", "reno"),
)


def run_catalog():
    """Run every catalog instance; returns {(id, protocol): (points, csv)}."""
    out = {}
    for exp, proto in CATALOG:
        spec = harness.expand_experiment(exp, protocol=proto)
        prefix = exp if proto is None else "%s-%s" % (exp, proto)
        points = harness.run_sweep(spec, scenario_prefix=prefix)
        out[(exp, proto)] = (points, harness.sweep_csv(points))
    return out


@pytest.fixture(scope="session")
def catalog():
    return run_catalog()


def by_label(points):
    return {pt.label: pt for pt in points}


def by_value(points):
    return {pt.axis_value: pt for pt in points}
