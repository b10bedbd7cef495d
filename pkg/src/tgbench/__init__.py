"""Temporal graph neural networks on a small reverse-mode autodiff engine.

Subpackages: ``autodiff`` (tensors, gradients, optimizers), ``data``
(snapshot sequences, event streams, conversion, splits), ``snapshot``
(graph-recurrent cells and EvolveGCN), ``event`` (TGN and TGAT), ``train``
(loops and metrics), and ``bench`` (configs, grids, runner, CLI).
"""
from .errors import ConfigError, ContractError, DimensionError, DomainError, FormatError, NumericError, TGBenchError

__version__ = "0.1.0"

__all__ = ["ConfigError", "ContractError", "DimensionError", "DomainError", "FormatError", "NumericError",
           "TGBenchError", "__version__"]
