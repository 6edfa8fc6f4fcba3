"""Exception hierarchy with stable machine-readable codes and CLI exit codes."""


class RdcompError(Exception):
    """Base class for all package errors."""

    exit_code = 3

    @property
    def code(self) -> str:
        """Stable identifier for scripting (the class name)."""
        return type(self).__name__


class ValidationError(RdcompError):
    """Rejected input: malformed data, bad dimensions, domains or size caps."""

    exit_code = 2


class NumericalError(RdcompError):
    """Failure while solving: degenerate iterates or unreachable targets."""

    exit_code = 3


class CheckFailed(RdcompError):
    """A cross-check (closed form, oracle, simulation) exceeded tolerance."""

    exit_code = 4


# --- validation ---------------------------------------------------------


class SpecFormatError(ValidationError):
    """Problem document is structurally unusable (keys, labels, parse)."""


class NegativeProbability(ValidationError):
    """A pmf entry is negative."""


class PMFNotNormalized(ValidationError):
    """The joint pmf does not sum to one within tolerance."""


class ZeroMarginalRow(ValidationError):
    """Some source symbol has zero marginal probability."""


class IndexOutOfRange(ValidationError):
    """A function-table entry is not a valid output-alphabet index."""


class DimensionMismatch(ValidationError):
    """Matrix shapes are inconsistent with the declared alphabets."""


class InvalidDistortionEntry(ValidationError):
    """A distortion entry is negative or not finite."""


class DomainError(ValidationError):
    """A scalar argument lies outside its documented domain."""


class AlphabetTooLarge(ValidationError):
    """Subset enumeration over the source alphabet exceeds the configured cap."""


class RecoverySpaceTooLarge(ValidationError):
    """The candidate-recovery alphabet exceeds the configured cap."""


class InstanceTooLarge(ValidationError):
    """The instance exceeds the oracle's exhaustive-search budget."""


class NotInGammaD(ValidationError):
    """A vertex subset admits no zero-distortion recovery for some y."""


class InvalidChannel(ValidationError):
    """Auxiliary-channel columns are not probability distributions."""


class UnannotatedChannel(ValidationError):
    """A channel atom lacks the hyperedge/recovery metadata this operation needs."""


class MembershipViolation(ValidationError):
    """A sampled source symbol is not a member of its encoded hyperedge."""


# --- numerical ----------------------------------------------------------


class NumericalUnderflow(NumericalError):
    """All atom weights vanished for some source symbol during an update."""


class NotConverged(NumericalError):
    """Iteration or bisection budget exhausted before reaching the target."""


class Infeasible(NumericalError):
    """No channel/decoder pair can meet the requested distortion."""


class EmptySupport(NumericalError):
    """Support pruning left some source symbol with no atom mass."""


class CurveNotMonotone(NumericalError):
    """A rate-distortion curve violates monotonicity beyond slack."""
