"""Aperture painting, physical-optics far fields and RCS of tiled apertures.

Each unit cell reflects with its infinite-array Jones matrix (local
periodicity); the scattered far field is the discrete aperture integral

    A_p(theta, phi) = dA * sum_n E_p[n] * exp(j k (u x_n + v y_n)),
    u = sin(theta) cos(phi),  v = sin(theta) sin(phi),

and sigma = 4 pi / lambda^2 * (|A_co|^2 + |A_cross|^2). Lengths at the API
are mm, frequencies GHz; amplitudes are carried in m^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0

from .errors import BandError, SamplingError
from .geometry import ApertureLayout, TileKind
from .jones import XY, Jones2, ReflectionSpectrum

DBSM_FLOOR = -100.0
DEFAULT_THETA = np.arange(0.0, 89.0 + 1e-9, 0.5)
DEFAULT_PHI = np.arange(0.0, 359.5 + 1e-9, 0.5)
_DIRECT_CHUNK = 2048


def wavelength_mm(f_GHz: float) -> float:
    return C0 / (f_GHz * 1e9) * 1e3


def to_dbsm(sigma_m2, floor=DBSM_FLOOR):
    s = np.asarray(sigma_m2, dtype=float)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(s)
    return np.maximum(db, floor) if floor is not None else db


@dataclass(frozen=True)
class ApertureField:
    pitch: float  # mm
    co: np.ndarray  # [ix, iy] complex, component along the incident polarisation
    cross: np.ndarray  # orthogonal component
    freq: float  # GHz
    incident_pol: str

    @property
    def shape(self):
        return self.co.shape

    @property
    def extent(self) -> tuple[float, float]:
        return self.co.shape[0] * self.pitch, self.co.shape[1] * self.pitch

    def coords_m(self):
        """Sample-centre coordinates (m) relative to the aperture centre."""
        nx, ny = self.co.shape
        x = (np.arange(nx) - (nx - 1) / 2.0) * self.pitch * 1e-3
        y = (np.arange(ny) - (ny - 1) / 2.0) * self.pitch * 1e-3
        return x, y

    def __add__(self, other: "ApertureField") -> "ApertureField":
        if (self.pitch, self.shape, self.freq, self.incident_pol) != (
            other.pitch,
            other.shape,
            other.freq,
            other.incident_pol,
        ):
            raise ValueError("aperture fields must share pitch, shape, frequency and polarisation")
        return ApertureField(self.pitch, self.co + other.co, self.cross + other.cross, self.freq, self.incident_pol)

    def only(self, part: str) -> "ApertureField":
        z = np.zeros_like(self.co)
        if part == "co":
            return ApertureField(self.pitch, self.co, z, self.freq, self.incident_pol)
        if part == "cross":
            return ApertureField(self.pitch, z, self.cross, self.freq, self.incident_pol)
        raise ValueError(part)

    def broadside_amplitude(self) -> tuple[complex, complex]:
        """(A_co, A_cross) at theta = 0: plain sums times the sample area."""
        da = (self.pitch * 1e-3) ** 2
        return complex(self.co.sum() * da), complex(self.cross.sum() * da)


def ideal_converter(band=(1.0, 100.0), n=2) -> ReflectionSpectrum:
    """Frequency-flat perfect converter [[0, -1], [-1, 0]]."""
    f = np.linspace(band[0], band[1], n)
    r = np.broadcast_to(np.array([[0.0, -1.0], [-1.0, 0.0]], dtype=complex), (n, 2, 2))
    return ReflectionSpectrum(f, r, XY, "patch surface")


def default_samples_per_cell(period_mm: float, f_GHz: float) -> int:
    return max(1, math.ceil(period_mm / (wavelength_mm(f_GHz) / 4.0) - 1e-12))


def paint_aperture(
    layout: ApertureLayout,
    unit_spectrum: ReflectionSpectrum,
    mirror_spectrum: ReflectionSpectrum,
    f_GHz: float,
    incident_pol: str = "Y",
    samples_per_cell: int | None = None,
) -> ApertureField:
    """Sample the reflected field over the layout; constant within each unit cell."""
    for name, s in (("unit", unit_spectrum), ("mirror", mirror_spectrum)):
        if s.basis != XY:
            raise ValueError(f"{name} spectrum must be in the XY basis")
        if not s.covers(f_GHz):
            raise BandError(f"{f_GHz} GHz outside the {name} spectrum [{s.freqs[0]}, {s.freqs[-1]}] GHz")
    pol = incident_pol.upper()
    inc = 0 if pol == "X" else 1
    e_inc = np.zeros(2, dtype=complex)
    e_inc[inc] = 1.0

    cell_pitch = layout.tile_pitch / layout.cells_per_tile
    s = samples_per_cell or default_samples_per_cell(cell_pitch, f_GHz)
    per_tile = layout.cells_per_tile * s

    ju = unit_spectrum.at(f_GHz).apply(e_inc)
    jm = mirror_spectrum.at(f_GHz).apply(e_inc)
    co_of = {TileKind.UNIT: ju[inc], TileKind.MIRROR: jm[inc], TileKind.PEC: -1.0, TileKind.ABSENT: 0.0}
    cx_of = {TileKind.UNIT: ju[1 - inc], TileKind.MIRROR: jm[1 - inc], TileKind.PEC: 0.0, TileKind.ABSENT: 0.0}

    tiles = layout.tiles
    co_t = np.zeros(tiles.shape, dtype=complex)
    cx_t = np.zeros(tiles.shape, dtype=complex)
    for kind in TileKind:
        sel = tiles == kind
        co_t[sel] = co_of[kind]
        cx_t[sel] = cx_of[kind]
    block = np.ones((per_tile, per_tile))
    return ApertureField(cell_pitch / s, np.kron(co_t, block), np.kron(cx_t, block), float(f_GHz), pol)


@dataclass(frozen=True)
class FarFieldPattern:
    theta: np.ndarray  # deg
    phi: np.ndarray  # deg
    amp_co: np.ndarray  # (n_theta, n_phi) complex, m^2
    amp_cross: np.ndarray
    freq: float
    incident_pol: str

    @property
    def sigma_m2(self) -> np.ndarray:
        lam = wavelength_mm(self.freq) * 1e-3
        return 4.0 * math.pi / lam**2 * (np.abs(self.amp_co) ** 2 + np.abs(self.amp_cross) ** 2)

    @property
    def sigma_dbsm(self) -> np.ndarray:
        return to_dbsm(self.sigma_m2)


def _direction_cosines(theta_deg, phi_deg):
    t = np.radians(np.asarray(theta_deg, dtype=float))[:, None]
    p = np.radians(np.asarray(phi_deg, dtype=float))[None, :]
    return np.sin(t) * np.cos(p), np.sin(t) * np.sin(p)


def _check_sampling(ap: ApertureField):
    lam = wavelength_mm(ap.freq)
    if ap.pitch > lam / 4.0 * (1 + 1e-12):
        raise SamplingError(f"sample pitch {ap.pitch:.4g} mm > lambda/4 = {lam / 4:.4g} mm at {ap.freq} GHz")


def _amplitudes_direct(ap: ApertureField, u: np.ndarray, v: np.ndarray):
    """Brute-force sum over every sample for every direction (the oracle)."""
    k = 2.0 * math.pi / (wavelength_mm(ap.freq) * 1e-3)
    x, y = ap.coords_m()
    X, Y = np.meshgrid(x, y, indexing="ij")
    pos_x, pos_y = X.ravel(), Y.ravel()
    fields = np.stack([ap.co.ravel(), ap.cross.ravel()])
    da = (ap.pitch * 1e-3) ** 2
    uu, vv = u.ravel(), v.ravel()
    out = np.empty((2, uu.size), dtype=complex)
    for s in range(0, uu.size, _DIRECT_CHUNK):
        ph = np.exp(1j * k * (np.outer(uu[s : s + _DIRECT_CHUNK], pos_x) + np.outer(vv[s : s + _DIRECT_CHUNK], pos_y)))
        out[:, s : s + _DIRECT_CHUNK] = fields @ ph.T
    out *= da
    return out[0].reshape(u.shape), out[1].reshape(u.shape)


def _amplitudes_separable(ap: ApertureField, u: np.ndarray, v: np.ndarray):
    """exp(jk(ux + vy)) = exp(jkux) exp(jkvy): one BLAS product per polarisation."""
    k = 2.0 * math.pi / (wavelength_mm(ap.freq) * 1e-3)
    x, y = ap.coords_m()
    da = (ap.pitch * 1e-3) ** 2
    uu, vv = u.ravel(), v.ravel()
    px = np.exp(1j * k * np.outer(uu, x))
    py = np.exp(1j * k * np.outer(vv, y))
    res = []
    for e in (ap.co, ap.cross):
        b = py @ e.T  # (n_dir, nx)
        res.append((np.sum(px * b, axis=1) * da).reshape(u.shape))
    return res[0], res[1]


def far_field(ap: ApertureField, theta_grid=None, phi_grid=None, method: str = "separable") -> FarFieldPattern:
    _check_sampling(ap)
    theta = DEFAULT_THETA if theta_grid is None else np.asarray(theta_grid, dtype=float)
    phi = DEFAULT_PHI if phi_grid is None else np.asarray(phi_grid, dtype=float)
    u, v = _direction_cosines(theta, phi)
    if method == "separable":
        a_co, a_x = _amplitudes_separable(ap, u, v)
    elif method == "direct":
        a_co, a_x = _amplitudes_direct(ap, u, v)
    else:
        raise ValueError(f"unknown far-field method {method!r}")
    return FarFieldPattern(theta, phi, a_co, a_x, ap.freq, ap.incident_pol)


def fft_amplitudes(ap: ApertureField, pad: int = 4):
    """Amplitudes on the FFT-native (u, v) grid of a zero-padded aperture.

    Returns ``(u, v, A_co, A_cross)`` with ``u``/``v`` 1-D and fftshift-ordered;
    points with u^2 + v^2 > 1 are invisible (evanescent) but still exact DTFT samples.
    """
    _check_sampling(ap)
    lam = wavelength_mm(ap.freq)
    nx, ny = ap.shape
    mx, my = pad * nx, pad * ny
    da = (ap.pitch * 1e-3) ** 2
    # exp(+j...) kernel == conjugated forward FFT of the conjugate field
    qx = np.fft.fftfreq(mx)
    qy = np.fft.fftfreq(my)
    u = qx * lam / ap.pitch
    v = qy * lam / ap.pitch
    x0, y0 = ap.coords_m()
    k = 2.0 * math.pi / (lam * 1e-3)
    ramp = np.exp(1j * k * (u[:, None] * x0[0] + v[None, :] * y0[0]))
    out = []
    for e in (ap.co, ap.cross):
        spec = np.conj(np.fft.fft2(np.conj(e), s=(mx, my)))
        out.append(np.fft.fftshift(spec * ramp * da))
    return np.fft.fftshift(u), np.fft.fftshift(v), out[0], out[1]


def uv_amplitudes_direct(ap: ApertureField, u: np.ndarray, v: np.ndarray):
    """Direct-sum amplitudes on a (u, v) product grid, for checking :func:`fft_amplitudes`."""
    U, V = np.meshgrid(u, v, indexing="ij")
    return _amplitudes_direct(ap, U, V)


def pec_plate_rcs(width, height, f_GHz) -> float:
    """Broadside PO RCS of a flat PEC plate, dBsm (sizes in mm)."""
    area = width * 1e-3 * height * 1e-3
    lam = wavelength_mm(f_GHz) * 1e-3
    sigma = 4.0 * math.pi * area**2 / lam**2
    return float(to_dbsm(sigma, floor=None))


@dataclass(frozen=True)
class ReductionCurve:
    freqs: np.ndarray
    sigma_layout_dbsm: np.ndarray
    sigma_pec_dbsm: np.ndarray

    @property
    def delta_db(self) -> np.ndarray:
        return self.sigma_layout_dbsm - self.sigma_pec_dbsm


def broadside_rcs(layout, unit_spectrum, mirror_spectrum, f_GHz, incident_pol="Y") -> float:
    """Monostatic broadside sigma of the layout, m^2 (PEC plate equivalent for sample area)."""
    ap = paint_aperture(layout, unit_spectrum, mirror_spectrum, f_GHz, incident_pol, samples_per_cell=1)
    a_co, a_x = ap.broadside_amplitude()
    lam = wavelength_mm(f_GHz) * 1e-3
    return 4.0 * math.pi / lam**2 * (abs(a_co) ** 2 + abs(a_x) ** 2)


def monostatic_reduction(
    layout, unit_spectrum, mirror_spectrum, band, n_freq, incident_pol="Y", threads: int = 1
) -> ReductionCurve:
    freqs = np.linspace(band[0], band[1], n_freq)
    for s in (unit_spectrum, mirror_spectrum):
        if not (s.covers(freqs[0]) and s.covers(freqs[-1])):
            raise BandError(f"band {band} GHz not covered by spectrum [{s.freqs[0]}, {s.freqs[-1]}] GHz")
    w, h = layout.extent

    def one(f):
        return broadside_rcs(layout, unit_spectrum, mirror_spectrum, f, incident_pol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            sig = list(ex.map(one, freqs))
    else:
        sig = [one(f) for f in freqs]
    layout_db = to_dbsm(np.array(sig))
    pec_db = np.array([pec_plate_rcs(w, h, f) for f in freqs])
    return ReductionCurve(freqs, layout_db, pec_db)


def predict_lobes(tile_pitch, f_GHz) -> list[tuple[float, float]]:
    """The four first-order checkerboard lobes, or [] when they are evanescent."""
    lam = wavelength_mm(f_GHz)
    s = lam / (math.sqrt(2.0) * tile_pitch)
    if s > 1.0:
        return []
    theta = math.degrees(math.asin(s))
    return [(theta, phi) for phi in (45.0, 135.0, 225.0, 315.0)]


def find_peaks(p: FarFieldPattern, min_prominence_dB: float) -> list[tuple[float, float, float]]:
    """Local maxima of sigma (dBsm) whose topographic prominence is at least ``min_prominence_dB``.

    The (theta, phi) grid is a graph: theta neighbours, cyclic phi
    neighbours, and every theta = 0 sample merged into the single zenith
    point. Prominence comes from a union-find sweep in descending level:
    when two regions meet, the lower peak's prominence is its height above
    the joining level. The highest peak gets its height above the minimum.
    Sorted by sigma descending (equal to 1e-9 dB counts as a tie), ties by
    smaller theta then smaller phi.
    """
    s = p.sigma_dbsm
    nt, nphi = s.shape
    zenith = p.theta[0] == 0.0
    node = np.arange(nt * nphi).reshape(nt, nphi)
    if zenith:
        node[0, :] = 0
    level = s.ravel()
    parent = {}
    peak_of = {}
    prom = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def neighbours(i, j):
        if i == 0 and zenith:
            for jj in range(nphi):
                if nt > 1:
                    yield node[1, jj]
            return
        if i > 0:
            yield node[i - 1, j]
        if i + 1 < nt:
            yield node[i + 1, j]
        yield node[i, (j + 1) % nphi]
        yield node[i, (j - 1) % nphi]

    # descending level; ties resolved by (theta, phi) order for determinism
    order = np.lexsort((np.tile(np.arange(nphi), nt), np.repeat(np.arange(nt), nphi), -level))
    seen_zenith = False
    for flat in order:
        i, j = divmod(int(flat), nphi)
        n = int(node[i, j])
        if n == 0 and zenith:
            if seen_zenith:
                continue
            seen_zenith = True
        h = level[flat]
        parent[n] = n
        peak_of[n] = (h, i, j)
        for m in neighbours(i, j):
            m = int(m)
            if m not in parent:
                continue
            ra, rb = find(n), find(m)
            if ra == rb:
                continue
            pa, pb = peak_of[ra], peak_of[rb]
            # the lower (later in the sweep order) peak dies here
            hi, lo = (ra, rb) if (-pa[0], pa[1], pa[2]) <= (-pb[0], pb[1], pb[2]) else (rb, ra)
            dead = peak_of[lo]
            if (dead[1], dead[2]) != (i, j) or dead[0] != h:
                prom[(dead[1], dead[2])] = dead[0] - h
            else:
                prom[(dead[1], dead[2])] = 0.0
            parent[lo] = hi
    roots = {find(n) for n in parent}
    gmin = float(level.min())
    for r in roots:
        h, i, j = peak_of[r]
        prom[(i, j)] = h - gmin if h > gmin else math.inf

    peaks = [(float(p.theta[i]), float(p.phi[j]), float(s[i, j])) for (i, j), pr in prom.items() if pr >= min_prominence_dB and pr > 0]
    # sigma equal to roundoff counts as a tie
    peaks.sort(key=lambda t: (-round(t[2], 9), t[0], t[1]))
    return peaks


def dominant_peaks(peaks, within_dB: float = 3.0):
    """Peaks within ``within_dB`` of the strongest one."""
    if not peaks:
        return []
    top = peaks[0][2]
    return [pk for pk in peaks if pk[2] >= top - within_dB]
