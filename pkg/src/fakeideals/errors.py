"""Error vocabulary shared by every module and mapped to CLI exit codes."""

EXIT_PRECONDITION = 2
EXIT_CEILING = 3
EXIT_VERIFICATION = 4


class FakeIdealsError(Exception):
    exit_code = EXIT_PRECONDITION

    @property
    def name(self):
        return type(self).__name__


class PreconditionError(FakeIdealsError):
    pass


class DivisionByZeroWeight(PreconditionError):
    pass


class NoCertifiedTail(PreconditionError):
    pass


class RatioNotBelowC(PreconditionError):
    pass


class MissingSupermultiplicativeCertificate(PreconditionError):
    pass


class IndexingConflict(PreconditionError):
    pass


class HypothesisViolated(PreconditionError):
    pass


class DepthExhausted(PreconditionError):
    pass


class NotAlmostDisjoint(PreconditionError):
    pass


class NotIncreasing(PreconditionError):
    pass


class CaseNotApplicable(PreconditionError):
    pass


class OutOfRange(PreconditionError):
    pass


class SearchCeilingExceeded(FakeIdealsError):
    exit_code = EXIT_CEILING


class LedgerOverflowCeiling(FakeIdealsError):
    exit_code = EXIT_CEILING


class RatioDecayTooSlow(FakeIdealsError):
    exit_code = EXIT_CEILING


class CounterexampleSearchFailed(FakeIdealsError):
    exit_code = EXIT_CEILING


class VerificationFailed(FakeIdealsError):
    exit_code = EXIT_VERIFICATION
