"""Rejection sampling from rigorous interval-arithmetic envelopes."""

from .envelope import Partition, Scheme, acceptance_bounds, envelope_at, new_partition, refine
from .errors import *  # noqa: F401,F403
from .exprdag import ExprDag, eval_interval, eval_point, eval_points, parse
from .interval import Box, Interval, parse_box, parse_interval
from .sampler import AliasTable, TrioSampler, build_alias, draw_trio, lmhs_run
from .targets import build_target, named_spec, true_mean_oracle

__version__ = "0.1.0"
