"""Exception types shared across the toolkit.

Each class carries a short ``code`` string so the CLI can map failures to exit
statuses without string matching on messages.
"""


class SurgekitError(Exception):
    code = "internal-error"


class InvalidInput(SurgekitError, ValueError):
    code = "invalid-input"


class InvalidDistance(SurgekitError, ValueError):
    code = "invalid-distance"


class InvalidLayout(SurgekitError, ValueError):
    code = "invalid-layout"


class InvalidConfig(SurgekitError, ValueError):
    code = "invalid-config"


class InvalidCode(SurgekitError, ValueError):
    code = "invalid-code"


class NotParallelizable(SurgekitError, ValueError):
    code = "not-parallelizable"


class InsufficientData(SurgekitError, ValueError):
    code = "insufficient-data"


class BudgetInfeasible(SurgekitError, ValueError):
    code = "budget-infeasible"


class CacheAccessViolation(SurgekitError, RuntimeError):
    code = "cache-access-violation"


class InternalError(SurgekitError, RuntimeError):
    code = "internal-error"
