"""
Runtime switches shared by every command: torch determinism and worker caps.
"""

import logging

import torch

from config import LAB_DETERMINISTIC, LAB_THREADS

logger = logging.getLogger(__name__)

DTYPE = torch.float64


def configure_runtime(threads: int = LAB_THREADS) -> int:
    """
    Apply the deterministic torch setup and cap intra-op threads.

    Returns:
        Effective worker count (>= 1)
    """
    threads = max(1, int(threads))
    torch.set_num_threads(threads)
    if LAB_DETERMINISTIC:
        torch.use_deterministic_algorithms(True)
    logger.debug(f"⚙️ Runtime configured: threads={threads}, deterministic={LAB_DETERMINISTIC}")
    return threads
