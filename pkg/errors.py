"""
Exception hierarchy for the dimer mirror toolkit.

Every error carries a short machine-readable code; the module prefix makes
the code unique across the toolkit (e.g. ``dimer.FACE_TOO_SHORT``).
"""


class DimerMirrorError(Exception):
    module = "core"

    def __init__(self, code, message="", witness=None):
        self.code = code
        self.message = message or code
        self.witness = witness
        super().__init__(f"{self.qualified_code}: {self.message}")

    @property
    def qualified_code(self):
        return f"{self.module}.{self.code}"

    def to_dict(self):
        return {
            "status": "error",
            "code": self.qualified_code,
            "message": self.message,
            "witness": self.witness,
        }


class DimerError(DimerMirrorError):
    module = "dimer"


class NCPolyError(DimerMirrorError):
    module = "ncpoly"


class JacobiError(DimerMirrorError):
    module = "jacobi"


class MirrorError(DimerMirrorError):
    module = "mirror"


class DisksError(DimerMirrorError):
    module = "disks"


class CHLError(DimerMirrorError):
    module = "chl"


# Exit codes of the command-line front end
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_CAP = 3
EXIT_VIOLATION = 4

_CAP_CODES = {"CLASS_UNBOUNDED_SUSPECTED", "RADIUS_INSUFFICIENT"}
_VIOLATION_CODES = {
    "CYCLICITY_VIOLATION",
    "RELATION_MISMATCH",
    "CURVATURE_NOT_INFINITESIMAL",
    "INCONSISTENT_DIMER",
}


def exit_code_for(error):
    """Map an error to the CLI exit code."""
    if not isinstance(error, DimerMirrorError):
        return EXIT_USAGE
    if error.code in _CAP_CODES:
        return EXIT_CAP
    if error.code in _VIOLATION_CODES:
        return EXIT_VIOLATION
    return EXIT_VALIDATION
