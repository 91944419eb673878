"""Exception types shared across the package."""


class FdstcError(Exception):
    pass


class FieldMismatch(FdstcError, ValueError):
    pass


class DivisionByZero(FdstcError, ZeroDivisionError):
    pass


class ZeroElement(FdstcError, ValueError):
    pass


class RamifiedOrNonMonogenic(FdstcError, ValueError):
    pass


class GammaNotNegative(FdstcError, ValueError):
    pass


class TestInconclusive(FdstcError):
    __test__ = False


class ShapeMismatch(FdstcError, ValueError):
    pass


class AutomorphismOrderMismatch(FdstcError, ValueError):
    pass


class HypothesisViolated(FdstcError):
    def __init__(self, check, detail=""):
        self.check = check
        super().__init__(f"{check}: {detail}" if detail else check)


class DivisionNotCertified(HypothesisViolated):
    def __init__(self, detail=""):
        super().__init__("division certificate", detail)


class TooLarge(FdstcError):
    pass


class BudgetExceeded(FdstcError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class NotFound(FdstcError):
    pass


class RankDeficient(FdstcError):
    pass


class InvalidPartition(FdstcError, ValueError):
    pass


class StructureViolated(FdstcError):
    def __init__(self, i, j, seed, value):
        self.i, self.j, self.seed, self.value = i, j, seed, value
        super().__init__(f"R[{i},{j}] = {value:.3e} for channel seed {seed}")


class Infeasible(FdstcError):
    pass
