"""Computation modules for bell-timing."""

from bell_timing.utils.inequalities import ch_m_value, ch_sum, chsh_s, lr_only_chsh
from bell_timing.utils.qm import qm_correlation_data

__all__ = ["ch_m_value", "ch_sum", "chsh_s", "lr_only_chsh", "qm_correlation_data"]
