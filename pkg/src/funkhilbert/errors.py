"""Exception hierarchy.

Every error carries a stable ``code`` string (``E_OUTSIDE`` etc.) so the CLI
and scripts can classify failures without parsing messages.
"""


class FinslerError(Exception):
    code = "E_GENERIC"
    #: usage errors are caller mistakes caught before any geometry runs
    usage = False

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class BadSpecError(FinslerError, ValueError):
    code = "E_BAD_SPEC"
    usage = True


class BadNError(FinslerError, ValueError):
    code = "E_BAD_N"
    usage = True


class BadKError(FinslerError, ValueError):
    code = "E_BAD_K"
    usage = True


class OutsideError(FinslerError):
    code = "E_OUTSIDE"


class ZeroVectorError(FinslerError):
    code = "E_ZERO_VECTOR"


class NoConvergeError(FinslerError):
    code = "E_NO_CONVERGE"


class TangentRayError(FinslerError):
    code = "E_TANGENT_RAY"


class NearBoundaryError(FinslerError):
    code = "E_NEAR_BOUNDARY"


class NotSPDError(FinslerError):
    code = "E_NOT_SPD"


class ToleranceError(FinslerError):
    code = "E_TOLERANCE"


class UnitSpeedError(FinslerError, ValueError):
    code = "E_UNIT_SPEED"
