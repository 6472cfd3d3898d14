from .binary import (
    and_m_batch,
    and_m_online,
    ltbits_2n,
    ltbits_2n_batch,
    masked_inputs,
    prefix_and_online,
    binary_tree_ltbits,
)
from .field import ltbits_p, ltbits_p_batch, ltbits_p_indicators, msb_p, msb_p_batch
from .plan import Gate, PrefixPlan, build_prefix_plan, evaluate_plan, level_count
from .ring import msb_2k, msb_2k_batch

__all__ = [
    "Gate",
    "PrefixPlan",
    "and_m_batch",
    "and_m_online",
    "build_prefix_plan",
    "evaluate_plan",
    "level_count",
    "ltbits_2n",
    "ltbits_2n_batch",
    "ltbits_p",
    "ltbits_p_batch",
    "ltbits_p_indicators",
    "masked_inputs",
    "msb_2k",
    "msb_2k_batch",
    "msb_p",
    "msb_p_batch",
    "prefix_and_online",
    "binary_tree_ltbits",
]
