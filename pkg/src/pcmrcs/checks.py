"""Built-in oracle and property checks (no full-wave solves; seconds to run)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry as geo
from . import jones, optimize, scatter


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    target: str


def _slab_unit_modulus():
    st = geo.paper_stack().lossless()
    f = np.linspace(20, 60, 41)
    err = float(np.max(np.abs(np.abs(jones.grounded_slab_reflection(st, f)) - 1.0)))
    return err < 1e-12, err, "| |r|-1 | < 1e-12"


def _mirror_theorem():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        r = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        r[0, 1] = r[1, 0]
        j = jones.Jones2(r)
        m = jones.mirror_transform(j)
        worst = max(
            worst,
            abs(jones.pcr(m) - jones.pcr(j)),
            float(np.max(np.abs(m.r[[0, 1], [1, 0]] + j.r[[0, 1], [1, 0]]))),
            float(np.max(np.abs(jones.mirror_transform(m).r - j.r))),
        )
    return worst < 1e-14, worst, "< 1e-14"


def _checkerboard(tx, ty):
    u = scatter.ideal_converter()
    lay = geo.build_checkerboard(tx, ty, 2, geo.paper_cell())
    return float(scatter.monostatic_reduction(lay, u, u.mirrored(), (37.75, 37.75), 1).delta_db[0])


def _imbalance():
    d = _checkerboard(3, 5)
    return abs(d - 20 * math.log10(1 / 15)) <= 0.1, d, "-23.52 +- 0.1 dB"


def _balanced():
    d = _checkerboard(4, 4)
    return d < -60.0, d, "< -60 dB"


def _plate():
    a = scatter.pec_plate_rcs(28.7, 41.6, 30.0)
    b = scatter.pec_plate_rcs(28.7, 41.6, 37.75)
    err = max(abs(a + 7.46), abs(b + 5.47))
    return err <= 0.01, err, "|err| <= 0.01 dB"


def _farfield_paths():
    rng = np.random.default_rng(11)
    shape = (12, 20)
    ap = scatter.ApertureField(
        1.0, rng.normal(size=shape) + 1j * rng.normal(size=shape), rng.normal(size=shape) + 0j, 37.75, "Y"
    )
    u, v, fc, fx = scatter.fft_amplitudes(ap)
    dc, dx = scatter.uv_amplitudes_direct(ap, u, v)
    th, ph = np.arange(0, 90, 1.0), np.arange(0, 360, 2.0)
    p = scatter.far_field(ap, th, ph)
    q = scatter.far_field(ap, th, ph, method="direct")
    rel = max(
        float(np.max(np.abs(fc - dc)) / np.max(np.abs(dc))),
        float(np.max(np.abs(fx - dx)) / np.max(np.abs(dx))),
        float(np.max(np.abs(p.amp_co - q.amp_co)) / np.max(np.abs(q.amp_co))),
    )
    return rel < 1e-9, rel, "< 1e-9 relative"


def _lobes():
    u = scatter.ideal_converter()
    lay = geo.build_checkerboard(16, 16, 2, geo.paper_cell())
    p = scatter.far_field(scatter.paint_aperture(lay, u, u.mirrored(), 37.75))
    found = scatter.dominant_peaks(scatter.find_peaks(p, 3.0))
    pred = scatter.predict_lobes(8.0, 37.75)
    if len(found) != 4:
        return False, float(len(found)), "4 lobes within 1 deg"
    worst = max(min(lobe_offset(pk, lobe) for pk in found) for lobe in pred)
    return worst <= 1.0, worst, "4 lobes within 1 deg"


def lobe_offset(peak, lobe) -> float:
    """Largest of the theta and (wrapped) phi differences, degrees."""
    dphi = abs((peak[1] - lobe[1] + 180.0) % 360.0 - 180.0)
    return max(abs(peak[0] - lobe[0]), dphi)


def _surrogate():
    r = optimize.optimize_design(
        optimize.DesignVector({"x": 0.9}, {"x": (0.0, 1.0)}), budget=500, engine=lambda v: -((v["x"] - 0.3) ** 2)
    )
    err = abs(r.best.values["x"] - 0.3)
    return err < 1e-6, err, "< 1e-6"


def _circle_no_conversion():
    v = optimize.paper_design().values
    bw = optimize.evaluate_design({**v, "minor_axis": v["major_axis"]})
    return bw == 0.0, bw, "== 0"


CHECKS: dict[str, Callable] = {
    "slab_unit_modulus": _slab_unit_modulus,
    "mirror_theorem": _mirror_theorem,
    "checkerboard_imbalance": _imbalance,
    "checkerboard_balanced": _balanced,
    "plate_rcs": _plate,
    "farfield_paths": _farfield_paths,
    "lobe_directions": _lobes,
    "optimizer_surrogate": _surrogate,
    "circle_no_conversion": _circle_no_conversion,
}


def run_all() -> list[CheckResult]:
    out = []
    for name, fn in CHECKS.items():
        ok, value, target = fn()
        out.append(CheckResult(name, bool(ok), float(value), target))
    return out
