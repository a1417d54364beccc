class DesignError(Exception):
    """
    Root of every error raised while building, assigning or serving a design
    """

    def __init__(self, message: str = "", **kwargs):
        super().__init__(message)
        self.message = message
        for arg, value in kwargs.items():
            setattr(self, arg, value)

    @property
    def kind(self) -> str:
        name = type(self).__name__
        return name[: -len("Error")] if name.endswith("Error") else name


class DuplicateFactorError(DesignError):
    """
    A factor with the same name is already defined in the design
    """

    name: str


class UnknownFactorError(DesignError):
    """
    The factor name is not defined in the design
    """

    name: str


class UnknownParentError(UnknownFactorError):
    """
    A nesting, crossing or conditioning parent is not defined yet
    """

    pass


class UnknownUnitError(UnknownFactorError):
    """
    A record points to a unit that does not exist
    """

    pass


class UnknownRecordError(UnknownFactorError):
    """
    An expected value rule targets a name that is not a record factor
    """

    pass


class EmptySpecError(DesignError):
    """
    Level specification without any level
    """

    pass


class FewerThanTwoParentsError(DesignError):
    """
    Crossing needs at least two factors
    """

    pass


class IncompleteRulesError(DesignError):
    """
    Per-parent rules leave a parent level without a match and there is no "." catch-all
    """

    factor: str
    missing: list


class InvalidRulesError(DesignError):
    """
    Per-parent rules name a level the parent does not have, or use "." more than once
    """

    pass


class NoTreatmentsError(DesignError):
    """
    The design has no treatment factor
    """

    pass


class TargetNotAUnitError(DesignError):
    """
    Records can only be measured on unit factors
    """

    name: str
    role: str


class RoleMismatchError(DesignError):
    """
    The factor has a role the operation does not accept
    """

    name: str


class CyclicLinkError(DesignError):
    """
    The link would make the factor graph cyclic
    """

    pass


class DuplicateAllotmentError(DesignError):
    """
    A factor is alloted more than once
    """

    name: str


class SelfAllotmentError(DesignError):
    """
    A unit can not be alloted to itself
    """

    name: str


class NoAllotmentError(DesignError):
    """
    Assignment was requested but nothing was alloted
    """

    pass


class UnknownOrderingError(DesignError):
    """
    The ordering name is neither built in nor registered
    """

    name: str


class ReservedNameError(DesignError):
    """
    Built-in ordering names can not be registered again
    """

    name: str


class ConstraintRefersToNonAncestorError(DesignError):
    """
    A constraint names a factor that is not a unit ancestor of the constrained unit
    """

    unit: str
    name: str


class LengthMismatchError(DesignError):
    """
    An ordering returned a different number of indices than there are units
    """

    expected: int
    actual: int


class NotConvertibleError(DesignError):
    """
    The level graph does not reduce to one row per finest unit
    """

    pass


class UnassignedTreatmentsError(DesignError):
    """
    Treatments are alloted (or defined) but their levels are not assigned to units yet
    """

    names: list


class UnknownColumnError(DesignError):
    """
    The selected column is not in the data
    """

    name: str


class ContradictoryBoundsError(DesignError):
    """
    Lower bound above upper bound, or equal bounds that exclude each other
    """

    record: str


class TargetExistsError(DesignError):
    """
    The export directory already exists and overwrite is not set
    """

    path: str


class IoFailureError(DesignError):
    """
    Writing an exported file failed
    """

    path: str


class BadNameError(DesignError):
    """
    Simulation process name neither matches a record nor starts with "."
    """

    name: str


class UnknownRecordColumnError(DesignError):
    """
    A multi-record process produces a column that is not a record factor
    """

    name: str


class UnknownProcessError(DesignError):
    """
    The simulation process is not registered
    """

    name: str


class ShapeMismatchError(DesignError):
    """
    A simulation process output does not have one value per table row
    """

    name: str


class InconsistentCensorError(DesignError):
    """
    Censoring bounds fall outside the expected values of the record
    """

    record: str
