"""Exception types raised by the tpx package."""


class TpxError(Exception):
    """Base class for all package errors."""


class LimitedCreditConstraintViolated(TpxError):
    """The claimed foreign tax credit exceeds home tax on repatriated profit."""

    def __init__(self, home_tax: float, claimed_credit: float, price: float):
        self.home_tax = home_tax
        self.claimed_credit = claimed_credit
        self.price = price
        super().__init__(
            f"illegal credit at p={price!r}: t1*b*pi2={home_tax!r} < t2*q*pi2={claimed_credit!r}"
        )


class SlopeNotSupported(TpxError):
    """Closed forms need a penalty slope r > 1; use the oracle otherwise."""


class DegenerateRates(TpxError):
    pass


class NoSolution(TpxError):
    """A threshold formula has no admissible value for the given rates."""


class OrderingNotApplicable(TpxError):
    pass


class NonFiniteObjective(TpxError):
    pass


class EmptyFeasibleSet(TpxError):
    pass


class InvalidSampleCount(TpxError, ValueError):
    pass


class ZeroEnforcementWarning(UserWarning):
    """Nonzero incentive with zero enforcement: no interior optimum exists."""
