"""Pure-numpy Yee updates; the fallback when the compiled kernels are absent.

Array layout (all C-contiguous float64, lateral axes periodic):

    Ex, Ey, Hz : (nx, ny, nz + 1)   nodes at integer z
    Ez, Hx, Hy : (nx, ny, nz)       nodes at half-integer z

The top ``npml`` layers carry a CPML along z; ``psi_*`` have depth ``npml``
and ``b*``/``c*`` are the recursive-convolution coefficients per layer.
The arithmetic is written operation-for-operation like ``_kernels.pyx`` so
both backends round identically.
"""

import numpy as np


def update_h(Ex, Ey, Ez, Hx, Hy, Hz, psi_hx, psi_hy, bh, ch, coef, rdx, rdy, rdz):
    nz = Ez.shape[2]
    npml = bh.shape[0]
    k0 = nz - npml

    dezdy = (np.roll(Ez, -1, axis=1) - Ez) * rdy
    dezdx = (np.roll(Ez, -1, axis=0) - Ez) * rdx
    deydz = (Ey[:, :, 1:] - Ey[:, :, :-1]) * rdz
    dexdz = (Ex[:, :, 1:] - Ex[:, :, :-1]) * rdz

    if npml:
        psi_hx[...] = bh * psi_hx + ch * deydz[:, :, k0:]
        psi_hy[...] = bh * psi_hy + ch * dexdz[:, :, k0:]
        deydz[:, :, k0:] += psi_hx
        dexdz[:, :, k0:] += psi_hy

    Hx -= coef * (dezdy - deydz)
    Hy -= coef * (dexdz - dezdx)

    deydx = (np.roll(Ey, -1, axis=0) - Ey) * rdx
    dexdy = (np.roll(Ex, -1, axis=1) - Ex) * rdy
    Hz -= coef * (deydx - dexdy)


def update_e(Ex, Ey, Ez, Hx, Hy, Hz, psi_ex, psi_ey, be, ce, ca, cb, caz, cbz, rdx, rdy, rdz):
    nz = Ez.shape[2]
    npml = be.shape[0]
    k0 = nz - npml

    dhzdy = (Hz - np.roll(Hz, 1, axis=1))[:, :, 1:nz] * rdy
    dhzdx = (Hz - np.roll(Hz, 1, axis=0))[:, :, 1:nz] * rdx
    # index m here is node k = m + 1
    dhydz = (Hy[:, :, 1:] - Hy[:, :, :-1]) * rdz
    dhxdz = (Hx[:, :, 1:] - Hx[:, :, :-1]) * rdz

    if npml:
        # E nodes k0..nz-1 -> m = k0-1 .. nz-2; the bottom PEC node k=0 never sits in the layer
        lo = k0 - 1
        psi_ex[...] = be * psi_ex + ce * dhydz[:, :, lo:]
        psi_ey[...] = be * psi_ey + ce * dhxdz[:, :, lo:]
        dhydz[:, :, lo:] += psi_ex
        dhxdz[:, :, lo:] += psi_ey

    a = ca[1:nz]
    b = cb[1:nz]
    Ex[:, :, 1:nz] = a * Ex[:, :, 1:nz] + b * (dhzdy - dhydz)
    Ey[:, :, 1:nz] = a * Ey[:, :, 1:nz] + b * (dhxdz - dhzdx)

    dhydx = (Hy - np.roll(Hy, 1, axis=0)) * rdx
    dhxdy = (Hx - np.roll(Hx, 1, axis=1)) * rdy
    Ez[...] = caz * Ez + cbz * (dhydx - dhxdy)


def apply_mask(Ex, Ey, k, mask_x, mask_y):
    """Zero tangential E on the metal sheet at layer ``k``."""
    Ex[:, :, k][mask_x] = 0.0
    Ey[:, :, k][mask_y] = 0.0


def field_energy(Ex, Ey, Ez, Hx, Hy, Hz, eps_e, eps_ez, mu):
    """Discrete electromagnetic energy, up to the constant cell volume."""
    s = float(np.sum(eps_e * (np.sum(Ex * Ex, axis=(0, 1)) + np.sum(Ey * Ey, axis=(0, 1)))))
    s += float(np.sum(eps_ez * np.sum(Ez * Ez, axis=(0, 1))))
    s += mu * float(np.sum(Hx * Hx) + np.sum(Hy * Hy) + np.sum(Hz * Hz))
    return 0.5 * s
