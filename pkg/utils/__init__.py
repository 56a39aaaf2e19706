"""Utils package - solvers, generators and reporting"""

from .helpers import (
    setup_logging, set_verbose, parse_rational, format_rational, format_datetime,
    generate_run_id, resolve_jobs, parallel_map, INF
)
from .exceptions import (
    TempoflowError, ValidationError, PreconditionError, CapExceededError,
    ConvergenceError, UnboundedFlowError, BidirectionalFlowError,
    ConservationError, InfeasibleError
)
