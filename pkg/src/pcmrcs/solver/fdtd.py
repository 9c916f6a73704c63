"""Periodic unit-cell FDTD at normal incidence.

The cell is a Yee grid with periodic lateral faces, a PEC ground at z = 0,
the substrate up to the patch plane, an air gap holding the monitor and
the source planes, and a z-CPML backed by PEC on top. A laterally uniform
soft source launches a modulated-Gaussian plane wave downward.

Plane-averaging the monitor fields over one period keeps only the specular
Floquet order, so evanescent orders near the patch never leak into the
extracted coefficients.

Calibration uses two cheap 1x1-column runs sharing the same z-stack and
time step: a structure-free column (incident pulse) and a bare ground
plane (phase reference, r = -1 at z = 0). A laterally uniform field makes
every lateral difference exactly zero, so the column reproduces the full
grid's arithmetic for the incident wave.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.constants import c as C0
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import mu_0 as MU0

from .. import geometry as geo
from ..errors import (
    GratingWarning,
    NonConvergedError,
    ReciprocityWarning,
    ResolutionError,
    StabilityError,
)
from ..jones import ETA0, ReflectionSpectrum
from . import _backend

LOSS_REF_GHZ = 40.0
RECIPROCITY_TOL = 1e-3
ENERGY_CHECK_EVERY = 25
_PML_ORDER = 3


@dataclass(frozen=True)
class SolverConfig:
    resolution: float = 0.05  # mm
    courant: float = 0.99  # fraction of the 3-D stability limit
    band: tuple = (20.0, 60.0)  # GHz
    n_freq: int = 81
    absorber_cells: int = 10
    decay_threshold: float = 1e-8
    max_steps: int = 200_000
    air_gap: float = 3.0  # mm between patch plane and absorber

    def __post_init__(self):
        object.__setattr__(self, "band", tuple(float(b) for b in self.band))

    @property
    def freqs(self) -> np.ndarray:
        return np.linspace(self.band[0], self.band[1], self.n_freq)

    def check(self, stack: geo.StackUp | None = None) -> None:
        if not 0.0 < self.courant < 1.0:
            raise StabilityError(f"courant factor {self.courant} outside (0, 1)")
        f_min, f_max = self.band
        if not 0.0 < f_min < f_max:
            raise ValueError(f"invalid band {self.band}")
        if self.n_freq < 1 or self.absorber_cells < 1 or self.max_steps < 1:
            raise ValueError("n_freq, absorber_cells and max_steps must be >= 1")
        lam_min = C0 / (f_max * 1e9) * 1e3
        if self.resolution > lam_min / 20.0:
            raise ResolutionError(
                f"resolution {self.resolution} mm coarser than lambda_min/20 = {lam_min / 20:.4g} mm"
            )
        if stack is not None:
            n_sub = geo.grid_count(stack.h, self.resolution)
            if n_sub < 10:
                raise ResolutionError(f"only {n_sub} cells across the {stack.h} mm substrate; need >= 10")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["band"] = list(self.band)
        return d


@dataclass(frozen=True)
class Pulse:
    """Sine-modulated Gaussian ``sin(2 pi fc (t - t0)) * exp(-((t - t0)/tau)^2)``.

    The spectral 1/e half-width is a quarter of the band, so the band edges
    sit at exp(-4) of the peak while content near the first grating cutoff
    (where grazing orders never reach the absorber) is negligible.
    """

    fc: float  # Hz
    tau: float
    t0: float

    @classmethod
    def for_band(cls, band):
        fc = 0.5 * (band[0] + band[1]) * 1e9
        half_width = 0.25 * (band[1] - band[0]) * 1e9
        tau = 1.0 / (math.pi * half_width)
        return cls(fc, tau, 5.0 * tau)

    def __call__(self, t):
        s = (t - self.t0) / self.tau
        return np.sin(2.0 * math.pi * self.fc * (t - self.t0)) * np.exp(-s * s)

    def spectrum_shape(self, f_hz):
        """|S(f)| up to a constant (both sidebands)."""
        f = np.asarray(f_hz, dtype=float)
        a = math.pi * self.tau
        return np.abs(np.exp(-((a * (f - self.fc)) ** 2)) - np.exp(-((a * (f + self.fc)) ** 2)))


@dataclass
class FieldRecord:
    ex: np.ndarray  # plane-averaged monitor field per step
    ey: np.ndarray
    dt: float
    polarization: str
    pulse: Pulse
    steps: int
    residual_energy: float  # fraction of peak at stop

    def component(self, which: str) -> np.ndarray:
        return self.ex if which.upper() == "X" else self.ey


@dataclass(frozen=True)
class _ZStack:
    """Integer z-layout shared by the cell run and its calibration columns."""

    dz: float  # m
    kp: int  # patch / substrate-top layer
    km: int  # monitor layer
    ks: int  # source layer
    nz: int
    npml: int

    @classmethod
    def build(cls, stack: geo.StackUp, cfg: SolverConfig):
        res = cfg.resolution
        kp = geo.grid_count(stack.h, res)
        gap = max(int(round(cfg.air_gap / res)), 12)
        km = kp + gap // 2
        ks = kp + (5 * gap) // 6
        nz = kp + gap + cfg.absorber_cells
        return cls(res * 1e-3, kp, km, ks, nz, cfg.absorber_cells)

    def shifted(self, off: int) -> "_ZStack":
        return _ZStack(self.dz, self.kp + off, self.km + off, self.ks + off, self.nz + off, self.npml)


def time_step(cfg: SolverConfig) -> float:
    d = cfg.resolution * 1e-3
    return cfg.courant * d / (C0 * math.sqrt(3.0))


def _pml_coefficients(zs: _ZStack, dt: float, band):
    n = zs.npml
    d = n * zs.dz
    sig_max = 0.8 * (_PML_ORDER + 1) / (ETA0 * zs.dz)
    alpha_max = 2.0 * math.pi * EPS0 * band[0] * 1e9 / 10.0

    def coeffs(depth):
        rho = np.clip(depth / d, 0.0, 1.0)
        sig = sig_max * rho**_PML_ORDER
        alpha = alpha_max * (1.0 - rho)
        b = np.exp(-(sig + alpha) * dt / EPS0)
        with np.errstate(invalid="ignore", divide="ignore"):
            cc = np.where(sig + alpha > 0, sig / (sig + alpha) * (b - 1.0), 0.0)
        return b, cc

    be, ce = coeffs(np.arange(n) * zs.dz)
    bh, ch = coeffs((np.arange(n) + 0.5) * zs.dz)
    return be, ce, bh, ch


def _material_profile(zs: _ZStack, eps_r: float, sigma: float, substrate_top: int):
    """Permittivity/conductivity at Ex/Ey (integer) and Ez (half-integer) nodes."""
    nz = zs.nz
    k = np.arange(nz + 1)
    eps_e = np.where(k < substrate_top, eps_r, 1.0)
    sig_e = np.where(k < substrate_top, sigma, 0.0)
    if 0 < substrate_top <= nz:
        eps_e[substrate_top] = 0.5 * (eps_r + 1.0)
        sig_e[substrate_top] = 0.5 * sigma
    kz = np.arange(nz)
    eps_z = np.where(kz < substrate_top, eps_r, 1.0)
    sig_z = np.where(kz < substrate_top, sigma, 0.0)
    return eps_e, sig_e, eps_z, sig_z


def _update_coeffs(eps_r, sig, dt):
    eps = EPS0 * eps_r
    loss = sig * dt / (2.0 * eps)
    return (1.0 - loss) / (1.0 + loss), (dt / eps) / (1.0 + loss)


def _edge_masks(cells: np.ndarray):
    """Tangential-E edges lying on metal faces (a face metalises its four edges)."""
    mx = cells | np.roll(cells, 1, axis=1)  # Ex(i+1/2, j) borders faces (i, j-1) and (i, j)
    my = cells | np.roll(cells, 1, axis=0)
    return np.ascontiguousarray(mx), np.ascontiguousarray(my)


def _simulate(
    nx,
    ny,
    zs: _ZStack,
    eps_r,
    sigma,
    substrate_top,
    mask,
    pol,
    cfg: SolverConfig,
    fixed_steps=None,
    kernels=None,
) -> FieldRecord:
    k = kernels or _backend.kernels
    dt = time_step(cfg)
    pulse = Pulse.for_band(cfg.band)
    nz = zs.nz
    d = zs.dz
    rd = 1.0 / d

    Ex = np.zeros((nx, ny, nz + 1))
    Ey = np.zeros((nx, ny, nz + 1))
    Ez = np.zeros((nx, ny, nz))
    Hx = np.zeros((nx, ny, nz))
    Hy = np.zeros((nx, ny, nz))
    Hz = np.zeros((nx, ny, nz + 1))
    npml = zs.npml
    psi = [np.zeros((nx, ny, npml)) for _ in range(4)]
    be, ce, bh, ch = _pml_coefficients(zs, dt, cfg.band)

    eps_e, sig_e, eps_z, sig_z = _material_profile(zs, eps_r, sigma, substrate_top)
    ca, cb = _update_coeffs(eps_e, sig_e, dt)
    caz, cbz = _update_coeffs(eps_z, sig_z, dt)
    coef_h = dt / MU0
    eps_e_abs = EPS0 * eps_e
    eps_z_abs = EPS0 * eps_z

    if mask is not None:
        mask_x, mask_y = _edge_masks(mask)
    src = Ex if pol == "X" else Ey
    n_src = int(math.ceil(2.0 * pulse.t0 / dt))
    n_max = fixed_steps if fixed_steps is not None else cfg.max_steps
    area = float(nx * ny)

    rec_x = np.empty(n_max)
    rec_y = np.empty(n_max)
    peak = 0.0
    residual = 1.0
    n_done = n_max
    for n in range(n_max):
        k.update_h(Ex, Ey, Ez, Hx, Hy, Hz, psi[2], psi[3], bh, ch, coef_h, rd, rd, rd)
        k.update_e(Ex, Ey, Ez, Hx, Hy, Hz, psi[0], psi[1], be, ce, ca, cb, caz, cbz, rd, rd, rd)
        if mask is not None:
            k.apply_mask(Ex, Ey, zs.kp, mask_x, mask_y)
        t = (n + 1) * dt
        if n <= n_src:
            src[:, :, zs.ks] += pulse(t)
        rec_x[n] = Ex[:, :, zs.km].sum() / area
        rec_y[n] = Ey[:, :, zs.km].sum() / area

        if fixed_steps is None and (n + 1) % ENERGY_CHECK_EVERY == 0:
            w = k.field_energy(Ex, Ey, Ez, Hx, Hy, Hz, eps_e_abs, eps_z_abs, MU0)
            if not math.isfinite(w):
                raise StabilityError(f"non-finite field energy at step {n + 1}")
            peak = max(peak, w)
            residual = w / peak if peak > 0 else 1.0
            if n > n_src and residual <= cfg.decay_threshold:
                n_done = n + 1
                break
    else:
        if fixed_steps is None:
            raise NonConvergedError(
                f"residual energy {residual:.3g} of peak > {cfg.decay_threshold:g} after {n_max} steps"
            )
        residual = float("nan")

    if not (np.all(np.isfinite(rec_x[:n_done])) and np.all(np.isfinite(rec_y[:n_done]))):
        raise StabilityError("non-finite monitor samples")
    return FieldRecord(rec_x[:n_done].copy(), rec_y[:n_done].copy(), dt, pol, pulse, n_done, residual)


def dft(x: np.ndarray, dt: float, freqs_ghz) -> np.ndarray:
    """Direct DFT of samples taken at t = (n + 1) dt, evaluated at the given frequencies."""
    f = np.asarray(freqs_ghz, dtype=float) * 1e9
    t = (np.arange(x.size) + 1.0) * dt
    out = np.empty(f.size, dtype=complex)
    chunk = 4096
    out[:] = 0.0
    for s in range(0, x.size, chunk):
        ph = np.exp(-2j * np.pi * np.outer(f, t[s : s + chunk]))
        out += ph @ x[s : s + chunk]
    return out


def numerical_wavenumber(freqs_ghz, cfg: SolverConfig) -> np.ndarray:
    """Yee-grid wavenumber for axial propagation in vacuum (rad/m)."""
    dt = time_step(cfg)
    d = cfg.resolution * 1e-3
    w = 2.0 * np.pi * np.asarray(freqs_ghz, dtype=float) * 1e9
    return (2.0 / d) * np.arcsin(d / (C0 * dt) * np.sin(w * dt / 2.0))


@dataclass
class Calibration:
    freqs: np.ndarray
    incident: dict  # pol -> FieldRecord (structure-free column)
    ground: dict  # pol -> FieldRecord (bare PEC at z = 0)
    incident_spectrum: dict  # pol -> complex array
    ground_spectrum: dict  # pol -> reflected-only spectrum of the bare ground
    zstack: _ZStack = field(repr=False)
    cfg: SolverConfig = field(repr=False)

    def reflected(self, rec: FieldRecord, out_pol: str, in_pol: str) -> np.ndarray:
        """Reflected-only spectrum of a cell record for one output component."""
        x = rec.component(out_pol)
        if out_pol == in_pol:
            inc = self.incident[in_pol].component(in_pol)
            x = x.copy()
            m = min(x.size, inc.size)
            x[:m] -= inc[:m]
        return dft(x, rec.dt, self.freqs)

    def calibrated_ground(self, pol="X") -> np.ndarray:
        """Ground reflection divided by itself times -1; -1 by construction."""
        g = self.ground_spectrum[pol]
        return -g / g


def _incident_window(zs: _ZStack, cfg: SolverConfig) -> tuple[int, int]:
    """Steps to record the incident pulse and the column padding that keeps them clean."""
    dt = time_step(cfg)
    pulse = Pulse.for_band(cfg.band)
    cells_per_step = C0 * dt / zs.dz
    n_pulse = 2.0 * pulse.t0 / dt
    direct = (zs.ks - zs.km) / cells_per_step
    window = int(math.ceil(2.0 * (n_pulse + direct))) + 200
    off = int(math.ceil((window * cells_per_step - zs.ks - zs.km) / 2.0)) + 10
    return window, max(off, 0)


def run_reference(stack: geo.StackUp, cfg: SolverConfig = SolverConfig(), kernels=None) -> Calibration:
    """Incident pulse and bare-ground reflection for ``stack``'s z-layout."""
    cfg.check(stack)
    zs = _ZStack.build(stack, cfg)
    freqs = cfg.freqs
    pulse = Pulse.for_band(cfg.band)
    shape = pulse.spectrum_shape(freqs * 1e9)
    f_dense = np.linspace(0.0, 4.0 * cfg.band[1], 4001)[1:] * 1e9
    if np.min(shape) < 0.01 * np.max(pulse.spectrum_shape(f_dense)):
        raise ValueError(f"band {cfg.band} GHz too wide for a single pulse (< 1% of peak at an edge)")

    window, off = _incident_window(zs, cfg)
    col = zs.shifted(off)
    incident, ground, inc_spec, gnd_spec = {}, {}, {}, {}
    for pol in ("X", "Y"):
        inc = _simulate(1, 1, col, 1.0, 0.0, 0, None, pol, cfg, fixed_steps=window, kernels=kernels)
        tail = np.max(np.abs(inc.component(pol)[-50:]))
        if tail > 1e-5 * np.max(np.abs(inc.component(pol))):
            raise RuntimeError("incident window truncates the pulse")
        g = _simulate(1, 1, zs, 1.0, 0.0, 0, None, pol, cfg, kernels=kernels)
        incident[pol], ground[pol] = inc, g
        inc_spec[pol] = dft(inc.component(pol), inc.dt, freqs)
        cal = Calibration(freqs, incident, ground, inc_spec, gnd_spec, zs, cfg)
        gnd_spec[pol] = cal.reflected(g, pol, pol)
    return Calibration(freqs, incident, ground, inc_spec, gnd_spec, zs, cfg)


def _substrate_sigma(stack: geo.StackUp) -> float:
    m = stack.substrate
    return 2.0 * math.pi * LOSS_REF_GHZ * 1e9 * EPS0 * m.eps_r * m.tan_delta


def simulate_cell(cell: geo.UnitCellGeometry, cfg: SolverConfig, pol: str, mask=None, kernels=None) -> FieldRecord:
    """One normally incident run over the periodic cell."""
    cfg.check(cell.stack)
    zs = _ZStack.build(cell.stack, cfg)
    if mask is None:
        mask = geo.rasterize(cell, cfg.resolution).cells
    n = mask.shape[0]
    return _simulate(
        n, n, zs, cell.stack.substrate.eps_r, _substrate_sigma(cell.stack), zs.kp, mask, pol, cfg, kernels=kernels
    )


def config_hash(cell: geo.UnitCellGeometry, cfg: SolverConfig, extra=None) -> str:
    doc = {"cell": _cell_dict(cell), "solver": cfg.to_dict()}
    if extra:
        doc["extra"] = extra
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _cell_dict(cell: geo.UnitCellGeometry) -> dict:
    d = asdict(cell)
    d["handedness"] = cell.handedness.value
    return d


def run_unit_cell(
    cell: geo.UnitCellGeometry,
    cfg: SolverConfig = SolverConfig(),
    calibration: Calibration | None = None,
    mask=None,
    kernels=None,
) -> ReflectionSpectrum:
    """Calibrated XY Jones spectrum referenced to the patch surface."""
    cfg.check(cell.stack)
    t_start = time.perf_counter()
    freqs = cfg.freqs
    lam_min = C0 / (cfg.band[1] * 1e9) * 1e3
    if cell.period > lam_min:
        f_onset = C0 / (cell.period * 1e-3) / 1e9
        warnings.warn(
            f"period {cell.period} mm exceeds lambda above {f_onset:.1f} GHz: grating orders propagate",
            GratingWarning,
        )
    cal = calibration or run_reference(cell.stack, cfg, kernels=kernels)
    if mask is None:
        mask = geo.rasterize(cell, cfg.resolution).cells

    r0 = np.empty((freqs.size, 2, 2), dtype=complex)
    steps, residual = {}, {}
    for col, pol in enumerate(("X", "Y")):
        rec = simulate_cell(cell, cfg, pol, mask=mask, kernels=kernels)
        steps[pol], residual[pol] = rec.steps, rec.residual_energy
        g = cal.ground_spectrum[pol]
        for row, out in enumerate(("X", "Y")):
            r0[:, row, col] = -cal.reflected(rec, out, pol) / g

    # move the reference from z = 0 to the patch plane
    h = cal.zstack.kp * cal.zstack.dz
    shift = np.exp(-2j * numerical_wavenumber(freqs, cfg) * h)
    r = r0 * shift[:, None, None]

    spec = ReflectionSpectrum(
        freqs,
        r,
        "XY",
        "patch surface",
        meta={
            "steps": steps,
            "residual_energy": residual,
            "backend": (kernels or _backend.kernels).__name__.rsplit(".", 1)[-1],
            "geometry_hash": config_hash(cell, cfg),
            "elapsed_s": time.perf_counter() - t_start,
        },
    )
    err = spec.reciprocity_error()
    if err > RECIPROCITY_TOL:
        warnings.warn(f"reciprocity violated: max |r_xy - r_yx| = {err:.3g}", ReciprocityWarning)
    return spec
