"""Uniform negative destinations for link prediction."""
from __future__ import annotations

import numpy as np

from ..errors import ContractError


def negative_sample(true_dst, destinations, rng: np.random.Generator) -> np.ndarray:
    """One uniform draw from ``destinations`` per positive, redrawn while it equals the true dst."""
    true_dst = np.asarray(true_dst, dtype=np.int64).reshape(-1)
    dest = np.asarray(destinations, dtype=np.int64).reshape(-1)
    if dest.size == 0:
        raise ContractError("negative_sample: empty destination set")
    if dest.size == 1 and np.any(true_dst == dest[0]):
        raise ContractError("negative_sample: the only destination is the true one")
    neg = dest[rng.integers(0, dest.size, size=true_dst.size)]
    clash = neg == true_dst
    while clash.any():
        neg[clash] = dest[rng.integers(0, dest.size, size=int(clash.sum()))]
        clash = neg == true_dst
    return neg
