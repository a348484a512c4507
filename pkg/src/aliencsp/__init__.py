"""Constraint satisfaction with alien constraints: solvers, algebra,
reductions and complexity classifiers for Boolean and equality languages."""

from .algebra import *  # noqa: F401,F403
from .alien import *  # noqa: F401,F403
from .equality import *  # noqa: F401,F403
from .errors import (  # noqa: F401
    AlienCSPError,
    ArityMismatch,
    BudgetExceeded,
    DomainBoundViolation,
    FormatError,
    MalformedDocument,
    NameClash,
    PreconditionError,
    UnknownSymbol,
)
from .reductions import *  # noqa: F401,F403
from .solvers import *  # noqa: F401,F403
from .structures import *  # noqa: F401,F403

__version__ = "0.1.0"
