"""
Exceptions
Error hierarchy shared by the solvers and the command line
"""


class TempoflowError(Exception):
    """Base class; exit_code is what the CLI returns when the error reaches it"""
    exit_code = 2


class ValidationError(TempoflowError):
    """Raised when a network, orientation or input file is malformed"""


class PreconditionError(TempoflowError):
    """Raised when an algorithm's input does not satisfy its precondition"""


class CapExceededError(TempoflowError):
    """Raised when an enumeration or horizon cap would be exceeded"""
    exit_code = 3


class ConvergenceError(TempoflowError):
    """Raised when the capacity fixed point was not reached"""
    exit_code = 4


class UnboundedFlowError(TempoflowError):
    """Raised when an augmenting path of length < T has infinite bottleneck"""


class BidirectionalFlowError(TempoflowError):
    """Raised when a flow uses an undirected edge in both directions"""


class ConservationError(TempoflowError):
    """Raised when a static flow violates conservation"""


class InfeasibleError(TempoflowError):
    """Raised when a linear program or flow witness is infeasible"""
