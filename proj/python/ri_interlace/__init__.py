"""Random interlacements on Z^d.

Thin Python layer over the C++ core: sampling on boxes, Green function and
capacities, cluster events, bridge and interface constructions.
"""

import json as _json

from ._core import (
    BridgeError,
    ConfigError,
    box_capacity,
    capacity,
    dense_subfamily,
    events,
    faces_bridge,
    green,
    interface_path,
    m_of_r,
    sample,
    vacancy_probability,
)
from . import _core

__all__ = [
    "BridgeError",
    "ConfigError",
    "box_capacity",
    "bridge_corpus",
    "capacity",
    "dense_subfamily",
    "events",
    "faces_bridge",
    "green",
    "interface_path",
    "m_of_r",
    "sample",
    "sweep",
    "vacancy_probability",
]


def sweep(config):
    """Run a sweep from a config dict; returns the tallies as a list of dicts."""
    text = _core.sweep(_json.dumps(config))
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, row.split(","))) for row in lines[1:]]


def bridge_corpus(config):
    """Generate and validate a bridge corpus; returns a summary dict."""
    return _core.bridge_corpus(_json.dumps(config))
