"""Exception hierarchy shared by all modules."""


class SoplogError(Exception):
    pass


class StructureError(SoplogError):
    pass


class SizeTooSmall(StructureError):
    pass


class OutOfRange(StructureError):
    pass


class InterpretationError(StructureError):
    """Missing or extra interpretation for a vocabulary symbol."""


class LengthMismatch(StructureError):
    pass


class TextTooShort(StructureError):
    pass


class UnknownCharacter(StructureError):
    pass


class FormulaError(SoplogError):
    pass


class ParseError(FormulaError):
    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class ArityMismatch(FormulaError):
    pass


class MalformedEncoding(SoplogError):
    pass


class ResourceExceeded(SoplogError):
    """A desk-scale ceiling was hit; this is not a falsity verdict."""


class BoundViolation(SoplogError):
    pass


class MachineError(SoplogError):
    pass


class MachineFormatError(MachineError):
    pass


class NoStep(MachineError):
    pass


class MachineNotNormalized(MachineError):
    pass


class ExponentTooSmall(MachineError):
    pass


class TraceNotAccepting(MachineError):
    pass
