"""Interference-safe carrier sensing for CSMA networks under the SINR model."""

from .carrier_sense import (
    CsConfig,
    Mechanism,
    cpcs_sequence_admits,
    cpcs_simple_admits,
    ipcs_admits,
    rcs_to_tcs,
    static_cpcs_threshold,
    static_ipcs_range,
    tcs_to_rcs,
)
from .channel import ChannelParams, Link, Point, is_feasible_state, link_distance
from .bounds import i_bar_1, i_bar_2, i_bound

__all__ = [
    "ChannelParams",
    "CsConfig",
    "Link",
    "Mechanism",
    "Point",
    "cpcs_sequence_admits",
    "cpcs_simple_admits",
    "i_bar_1",
    "i_bar_2",
    "i_bound",
    "ipcs_admits",
    "is_feasible_state",
    "link_distance",
    "rcs_to_tcs",
    "static_cpcs_threshold",
    "static_ipcs_range",
    "tcs_to_rcs",
]
