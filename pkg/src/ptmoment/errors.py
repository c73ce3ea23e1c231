"""Exception hierarchy. Every error names the module it came from."""

from __future__ import annotations

import numpy as np


class PtMomentError(Exception):
    module = "ptmoment"

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class ValidationError(PtMomentError, ValueError):
    module = "linalg"


class StructuralError(PtMomentError, ValueError):
    module = "linalg"


class UnsupportedOrderError(PtMomentError, ValueError):
    module = "hankel"


class InfeasibleMomentsError(PtMomentError, ValueError):
    """Moment prefix not attainable by any nonnegative unit-trace spectrum."""

    module = "bounds"

    def __init__(self, order: int, condition: str):
        self.order = order
        self.condition = condition
        super().__init__(f"infeasible at order {order}: {condition}")


class SingularHankelError(PtMomentError, ValueError):
    module = "moment_problem"


class NotPSDRealizableError(PtMomentError, ValueError):
    module = "moment_problem"

    def __init__(self, message: str, witness: np.ndarray):
        self.witness = np.asarray(witness)
        super().__init__(message)


class ScaleError(PtMomentError, ValueError):
    module = "states"


class StateFileError(PtMomentError, ValueError):
    module = "io"
