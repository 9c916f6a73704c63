"""Exception and warning types.

Every error carries a short ``code`` string so the CLI can report it in a
stable, greppable form (``FIT_ERROR: ...``).
"""


class PCMError(Exception):
    code = "ERROR"

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class FitError(PCMError, ValueError):
    code = "FIT_ERROR"


class AxisError(PCMError, ValueError):
    code = "AXIS_ERROR"


class ResolutionError(PCMError, ValueError):
    code = "RESOLUTION_ERROR"


class RegionError(PCMError, ValueError):
    code = "REGION_ERROR"


class DegenerateError(PCMError, ValueError):
    code = "DEGENERATE"


class BasisError(PCMError, ValueError):
    code = "BASIS_ERROR"


class StabilityError(PCMError, ValueError):
    code = "STABILITY_ERROR"


class NonConvergedError(PCMError, RuntimeError):
    code = "NONCONVERGED"


class BandError(PCMError, ValueError):
    code = "BAND_ERROR"


class SamplingError(PCMError, ValueError):
    code = "SAMPLING_ERROR"


class NoFeasibleError(PCMError, RuntimeError):
    code = "NO_FEASIBLE"


class ConfigError(PCMError, ValueError):
    code = "CONFIG_ERROR"


class GratingWarning(UserWarning):
    """Period exceeds the free-space wavelength somewhere in the band."""


class ReciprocityWarning(UserWarning):
    """Solver output violates r_xy == r_yx beyond tolerance."""


class SingularityWarning(UserWarning):
    """Substrate input impedance passes through a pole."""
