"""Exception taxonomy shared across modules.

StructuralError: caller violated an internal contract (bad wire index,
parameter-count mismatch, stale cache). InputError: bad external data
(files, coordinates, empty sample lists). TrainingError: runtime failure
inside an otherwise well-formed training run (non-finite loss/gradient).
"""


class GeoqganError(Exception):
    pass


class StructuralError(GeoqganError, ValueError):
    pass


class InputError(GeoqganError, ValueError):
    pass


class TrainingError(GeoqganError, RuntimeError):
    pass
