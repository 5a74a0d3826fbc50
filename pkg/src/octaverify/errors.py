"""Exception hierarchy shared by every layer of the engine."""


class OctaError(Exception):
    pass


class ContractError(OctaError, ValueError):
    """A caller violated an operation's precondition (shapes, objects, parameters)."""


class StructureError(ContractError):
    """A diagram failed structural validation; ``position`` names the offending spot."""

    def __init__(self, message, position=None):
        super().__init__(f"{position}: {message}" if position else message)
        self.message = message
        self.position = position


class EnumerationTooLarge(OctaError):
    def __init__(self, what, size, cap):
        super().__init__(f"enumeration of {what} has {size} elements, cap is {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class ArithmeticOverflow(OctaError, ArithmeticError):
    pass


class InternalConsistencyError(OctaError, RuntimeError):
    """Two independent computation paths disagreed."""
