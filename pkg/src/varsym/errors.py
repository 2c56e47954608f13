"""Exception hierarchy shared by every module."""


class VarsymError(Exception):
    """Base class for all errors raised by varsym."""


class ParseError(VarsymError):
    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
            if text is not None:
                message += f"\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class UnknownFunctionError(ParseError):
    pass


class DomainError(VarsymError, ArithmeticError):
    """Evaluation or construction left the real domain (ln of a non-positive number, 1/0)."""


class UnboundSymbolError(VarsymError, KeyError):
    def __init__(self, symbol):
        self.symbol = symbol
        super().__init__(f"unbound symbol {symbol}")

    def __str__(self):
        return self.args[0]


class PolynomialError(VarsymError):
    """Expression is not polynomial in the requested variables."""

    def __init__(self, message: str, subterm=None):
        self.subterm = subterm
        super().__init__(message)


class ValidationError(VarsymError):
    """Input is well formed but violates a precondition (undeclared symbol, bad order, ...)."""


class OrderError(ValidationError):
    pass


class ReductionError(VarsymError):
    """The Euler-Lagrange system cannot be solved for its leading derivatives."""


class IntegrationError(VarsymError):
    pass


class AnsatzError(VarsymError):
    pass
