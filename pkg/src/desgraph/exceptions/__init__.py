from desgraph.exceptions.dsl import SpecError, SpecSemanticError, SpecSyntaxError
from desgraph.exceptions.exceptions import (
    BadNameError,
    ConstraintRefersToNonAncestorError,
    ContradictoryBoundsError,
    CyclicLinkError,
    DesignError,
    DuplicateAllotmentError,
    DuplicateFactorError,
    EmptySpecError,
    FewerThanTwoParentsError,
    InconsistentCensorError,
    IncompleteRulesError,
    InvalidRulesError,
    IoFailureError,
    LengthMismatchError,
    NoAllotmentError,
    NotConvertibleError,
    NoTreatmentsError,
    ReservedNameError,
    RoleMismatchError,
    SelfAllotmentError,
    ShapeMismatchError,
    TargetExistsError,
    TargetNotAUnitError,
    UnassignedTreatmentsError,
    UnknownColumnError,
    UnknownFactorError,
    UnknownOrderingError,
    UnknownParentError,
    UnknownProcessError,
    UnknownRecordColumnError,
    UnknownRecordError,
    UnknownUnitError,
)
