"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the operation's domain."""


class OracleScaleError(DomainError):
    """Input too large for the direct-summation transform."""


class SingularFitError(ArithmeticError):
    """A least-squares fit had no spread in its abscissa or ordinate."""


class ParseError(ValueError):
    """A chain, spectrum or config file is malformed."""
