"""Jones-matrix algebra for reflective anisotropic surfaces.

Conventions: time dependence exp(+j*omega*t); ``r[i, j]`` maps incident
component ``j`` to reflected component ``i``, so ``r_xy`` is the x-polarised
reflection of a y-polarised wave. Phases are reported in (-180, 180].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, Union

import numpy as np
from scipy.constants import c as C0
from scipy.constants import epsilon_0, mu_0

from .errors import BandError, BasisError, DegenerateError, SingularityWarning
from .geometry import StackUp

ETA0 = math.sqrt(mu_0 / epsilon_0)
XY = "XY"
UV = "UV"

Impedance = Union[complex, float, Callable[[float], complex]]


@dataclass(frozen=True)
class Jones2:
    r: np.ndarray
    basis: str = XY

    def __post_init__(self):
        r = np.array(self.r, dtype=complex)
        if r.shape != (2, 2):
            raise ValueError(f"Jones matrix must be 2x2, got shape {r.shape}")
        if self.basis not in (XY, UV):
            raise ValueError(f"unknown basis {self.basis!r}")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def r_xx(self):
        return self.r[0, 0]

    @property
    def r_xy(self):
        return self.r[0, 1]

    @property
    def r_yx(self):
        return self.r[1, 0]

    @property
    def r_yy(self):
        return self.r[1, 1]

    def column_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.r) ** 2, axis=0))

    def apply(self, e_inc) -> np.ndarray:
        return self.r @ np.asarray(e_inc, dtype=complex)

    def allclose(self, other: "Jones2", atol=1e-12) -> bool:
        return self.basis == other.basis and np.allclose(self.r, other.r, rtol=0, atol=atol)


def _pol_index(incident_pol: str) -> int:
    p = str(incident_pol).upper()
    if p not in ("X", "Y"):
        raise ValueError(f"incident polarisation must be X or Y, got {incident_pol!r}")
    return 0 if p == "X" else 1


def pcr(j: Jones2, incident_pol: str = "Y") -> float:
    """Cross-polarised power fraction of the reflected wave."""
    if j.basis != XY:
        raise BasisError("PCR is defined in the XY basis")
    inc = _pol_index(incident_pol)
    cross = abs(j.r[1 - inc, inc]) ** 2
    co = abs(j.r[inc, inc]) ** 2
    if cross + co == 0.0:
        raise DegenerateError("both co- and cross-polarised reflections vanish")
    return cross / (cross + co)


def pcr_array(r: np.ndarray, incident_pol: str = "Y") -> np.ndarray:
    """Vectorised :func:`pcr` over a stack of matrices shaped (..., 2, 2)."""
    inc = _pol_index(incident_pol)
    cross = np.abs(r[..., 1 - inc, inc]) ** 2
    co = np.abs(r[..., inc, inc]) ** 2
    tot = cross + co
    if np.any(tot == 0.0):
        raise DegenerateError("both co- and cross-polarised reflections vanish")
    return cross / tot


_H = math.sqrt(0.5)
# exact (cos, sin) at multiples of 45 degrees; libm gives cos(pi/4) != sin(pi/4)
_OCTANTS = [(1.0, 0.0), (_H, _H), (0.0, 1.0), (-_H, _H), (-1.0, 0.0), (-_H, -_H), (0.0, -1.0), (_H, -_H)]


def rotation(theta_deg: float) -> np.ndarray:
    q, rem = divmod(float(theta_deg), 45.0)
    if rem == 0.0:
        c, s = _OCTANTS[int(q) % 8]
    else:
        t = math.radians(theta_deg)
        c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def rotate_basis(j: Jones2, theta_deg: float) -> Jones2:
    """Change basis with ``R' = Q R Q^T``; the basis tag flips between UV and XY."""
    (c, ms), (s, _) = rotation(theta_deg)
    (a, b), (e, d) = j.r
    # written out: BLAS complex matmul does not keep exact zeros
    r00, r01 = c * a + ms * e, c * b + ms * d
    r10, r11 = s * a + c * e, s * b + c * d
    out = np.array([[r00 * c + r01 * ms, r00 * s + r01 * c], [r10 * c + r11 * ms, r10 * s + r11 * c]])
    return Jones2(out, UV if j.basis == XY else XY)


# M R M with M = diag(1, -1) flips the off-diagonal signs
_SIGNS = np.array([[1.0, -1.0], [-1.0, 1.0]])


def mirror_transform(j: Jones2) -> Jones2:
    """Jones matrix of the surface reflected about the x-axis."""
    if j.basis != XY:
        raise BasisError("mirror transform needs the XY basis")
    return Jones2(j.r * _SIGNS, XY)


def wrap_phase_deg(phase) -> np.ndarray:
    """Map degrees into (-180, 180]."""
    p = np.mod(np.asarray(phase, dtype=float) + 180.0, 360.0) - 180.0
    return np.where(p == -180.0, 180.0, p)


def phase_deg(z) -> np.ndarray:
    return wrap_phase_deg(np.degrees(np.angle(z)))


# --- analytic transmission-line models ----------------------------------------


def _substrate(stack: StackUp, f_hz, h_mm=None):
    eps = stack.substrate.eps_r * (1.0 - 1j * stack.substrate.tan_delta)
    n = np.sqrt(eps + 0j)
    beta_h = 2.0 * np.pi * f_hz * n / C0 * ((stack.h if h_mm is None else h_mm) * 1e-3)
    return n, beta_h


def grounded_slab_reflection(stack: StackUp, f_GHz, h=None):
    """Reflection at the top of a PEC-backed slab, no patch.

    Written with sin/cos instead of tan so the quarter-wave pole of the
    input impedance (r -> +1) needs no special casing. ``h`` overrides the
    stack thickness in mm and may be 0 (bare ground).
    """
    f = np.asarray(f_GHz, dtype=float) * 1e9
    if np.any(f <= 0):
        raise ValueError("frequency must be positive")
    n, bh = _substrate(stack, f, h)
    s, c = np.sin(bh), np.cos(bh)
    if np.any(np.abs(c) < 1e-9):
        warnings.warn("substrate is a quarter wave thick: Z_in -> infinity, r -> +1", SingularityWarning)
    # Z_in / eta0 = j tan(bh) / n
    num = 1j * s - n * c
    den = 1j * s + n * c
    return num / den


def _admittance(z: Impedance, f_GHz):
    zz = z(f_GHz) if callable(z) else z
    zz = np.asarray(zz, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(np.isinf(zz), 0.0, 1.0 / zz)
    return y, zz == 0


def tl_converter_model(stack: StackUp, Z_u: Impedance, Z_v: Impedance, f_GHz) -> Jones2:
    """diag(r_u, r_v) of a grounded slab loaded by an anisotropic impedance sheet.

    Each principal axis sees the sheet impedance in parallel with the
    slab input impedance ``j*eta_d*tan(beta*h)``. ``Z = 0`` is a short,
    ``Z = inf`` an open (no sheet).
    """
    f = float(f_GHz)
    n, bh = _substrate(stack, f * 1e9)
    s, c = np.sin(bh), np.cos(bh)
    rs = []
    for z in (Z_u, Z_v):
        y, short = _admittance(z, f)
        if short or s == 0:
            rs.append(-1.0 + 0j)
            continue
        # eta0 * Y_slab = n * cos / (j sin)
        y_norm = ETA0 * complex(y) + n * c / (1j * s)
        rs.append((1.0 - y_norm) / (1.0 + y_norm))
    return Jones2(np.diag(rs), UV)


def series_lc_sheet(L: float, C: float) -> Callable[[float], complex]:
    """Z(f) = j(wL - 1/(wC)) for inductance L (H) and capacitance C (F); f in GHz."""

    def z(f_GHz):
        w = 2.0 * np.pi * f_GHz * 1e9
        return 1j * (w * L - 1.0 / (w * C))

    return z


# --- spectra ------------------------------------------------------------------


@dataclass(frozen=True)
class ReflectionSpectrum:
    freqs: np.ndarray  # GHz
    r: np.ndarray  # (n, 2, 2) complex
    basis: str = XY
    reference_plane: str = "patch surface"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        f = np.array(self.freqs, dtype=float)
        r = np.array(self.r, dtype=complex)
        if f.ndim != 1 or r.shape != (f.size, 2, 2):
            raise ValueError(f"shape mismatch: freqs {f.shape}, r {r.shape}")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing")
        f.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_samples(cls, samples: Sequence[tuple[float, Jones2]], reference_plane="patch surface"):
        bases = {j.basis for _, j in samples}
        if len(bases) > 1:
            raise BasisError(f"mixed bases {sorted(bases)}")
        return cls(
            np.array([f for f, _ in samples]),
            np.array([j.r for _, j in samples]),
            bases.pop() if bases else XY,
            reference_plane,
        )

    def __len__(self):
        return self.freqs.size

    def __iter__(self) -> Iterator[tuple[float, Jones2]]:
        for f, r in zip(self.freqs, self.r):
            yield float(f), Jones2(r, self.basis)

    def jones(self, i: int) -> Jones2:
        return Jones2(self.r[i], self.basis)

    def covers(self, f_GHz: float) -> bool:
        return bool(self.freqs[0] <= f_GHz <= self.freqs[-1])

    def at(self, f_GHz: float) -> Jones2:
        """Linear interpolation of real and imaginary parts."""
        if not self.covers(f_GHz):
            raise BandError(
                f"{f_GHz} GHz outside spectrum range [{self.freqs[0]}, {self.freqs[-1]}] GHz"
            )
        re = np.empty((2, 2))
        im = np.empty((2, 2))
        for a in range(2):
            for b in range(2):
                re[a, b] = np.interp(f_GHz, self.freqs, self.r[:, a, b].real)
                im[a, b] = np.interp(f_GHz, self.freqs, self.r[:, a, b].imag)
        return Jones2(re + 1j * im, self.basis)

    def pcr(self, incident_pol: str = "Y") -> np.ndarray:
        if self.basis != XY:
            raise BasisError("PCR is defined in the XY basis")
        return pcr_array(self.r, incident_pol)

    def mirrored(self) -> "ReflectionSpectrum":
        if self.basis != XY:
            raise BasisError("mirror transform needs the XY basis")
        return ReflectionSpectrum(self.freqs, self.r * _SIGNS, XY, self.reference_plane, dict(self.meta))

    def rotated(self, theta_deg: float) -> "ReflectionSpectrum":
        r = np.array([rotate_basis(Jones2(m, self.basis), theta_deg).r for m in self.r]).reshape(-1, 2, 2)
        return ReflectionSpectrum(self.freqs, r, UV if self.basis == XY else XY, self.reference_plane, dict(self.meta))

    def reciprocity_error(self) -> float:
        return float(np.max(np.abs(self.r[:, 0, 1] - self.r[:, 1, 0]))) if len(self) else 0.0
