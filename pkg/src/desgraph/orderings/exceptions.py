from desgraph.exceptions.exceptions import DesignError


class BadConstraintArityError(DesignError):
    """
    The ordering needs a different number of constraining unit factors
    """

    expected: int
    actual: int


class RowCountMismatchError(DesignError):
    """
    The row factor must have exactly as many levels as there are treatments
    """

    pass


class UnsupportedOrderError(DesignError):
    """
    No construction is available for these parameters
    """

    pass
