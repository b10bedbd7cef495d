"""Exception hierarchy shared by every tgbench subpackage."""


class TGBenchError(Exception):
    """Base class for all library errors."""


class DimensionError(TGBenchError, ValueError):
    """Operand shapes do not conform for a primitive."""


class DomainError(TGBenchError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(TGBenchError, ValueError):
    """A documented precondition of an operation was violated."""


class NumericError(TGBenchError, ArithmeticError):
    """A computation produced a non-finite value."""


class FormatError(TGBenchError, ValueError):
    """An input file does not match its documented on-disk format."""


class ConfigError(TGBenchError, ValueError):
    """An experiment or model configuration is invalid."""
