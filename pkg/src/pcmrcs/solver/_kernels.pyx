# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Yee updates. Same signatures and rounding as ``_kernels_py``."""

ctypedef double[:, :, ::1] field3


def update_h(field3 Ex, field3 Ey, field3 Ez, field3 Hx, field3 Hy, field3 Hz,
             field3 psi_hx, field3 psi_hy, double[::1] bh, double[::1] ch,
             double coef, double rdx, double rdy, double rdz):
    cdef Py_ssize_t nx = Ez.shape[0], ny = Ez.shape[1], nz = Ez.shape[2]
    cdef Py_ssize_t npml = bh.shape[0]
    cdef Py_ssize_t k0 = nz - npml
    cdef Py_ssize_t i, j, k, ip, jp, m
    cdef double dezdy, dezdx, deydz, dexdz, p
    with nogil:
        for i in range(nx):
            ip = i + 1 if i + 1 < nx else 0
            for j in range(ny):
                jp = j + 1 if j + 1 < ny else 0
                for k in range(nz):
                    dezdy = (Ez[i, jp, k] - Ez[i, j, k]) * rdy
                    dezdx = (Ez[ip, j, k] - Ez[i, j, k]) * rdx
                    deydz = (Ey[i, j, k + 1] - Ey[i, j, k]) * rdz
                    dexdz = (Ex[i, j, k + 1] - Ex[i, j, k]) * rdz
                    if k >= k0:
                        m = k - k0
                        p = bh[m] * psi_hx[i, j, m] + ch[m] * deydz
                        psi_hx[i, j, m] = p
                        deydz = deydz + p
                        p = bh[m] * psi_hy[i, j, m] + ch[m] * dexdz
                        psi_hy[i, j, m] = p
                        dexdz = dexdz + p
                    Hx[i, j, k] = Hx[i, j, k] - coef * (dezdy - deydz)
                    Hy[i, j, k] = Hy[i, j, k] - coef * (dexdz - dezdx)
                for k in range(nz + 1):
                    Hz[i, j, k] = Hz[i, j, k] - coef * (
                        (Ey[ip, j, k] - Ey[i, j, k]) * rdx - (Ex[i, jp, k] - Ex[i, j, k]) * rdy
                    )


def update_e(field3 Ex, field3 Ey, field3 Ez, field3 Hx, field3 Hy, field3 Hz,
             field3 psi_ex, field3 psi_ey, double[::1] be, double[::1] ce,
             double[::1] ca, double[::1] cb, double[::1] caz, double[::1] cbz,
             double rdx, double rdy, double rdz):
    cdef Py_ssize_t nx = Ez.shape[0], ny = Ez.shape[1], nz = Ez.shape[2]
    cdef Py_ssize_t npml = be.shape[0]
    cdef Py_ssize_t k0 = nz - npml
    cdef Py_ssize_t i, j, k, im, jm, m
    cdef double dhzdy, dhzdx, dhydz, dhxdz, p
    with nogil:
        for i in range(nx):
            im = i - 1 if i > 0 else nx - 1
            for j in range(ny):
                jm = j - 1 if j > 0 else ny - 1
                for k in range(1, nz):
                    dhzdy = (Hz[i, j, k] - Hz[i, jm, k]) * rdy
                    dhzdx = (Hz[i, j, k] - Hz[im, j, k]) * rdx
                    dhydz = (Hy[i, j, k] - Hy[i, j, k - 1]) * rdz
                    dhxdz = (Hx[i, j, k] - Hx[i, j, k - 1]) * rdz
                    if k >= k0:
                        m = k - k0
                        p = be[m] * psi_ex[i, j, m] + ce[m] * dhydz
                        psi_ex[i, j, m] = p
                        dhydz = dhydz + p
                        p = be[m] * psi_ey[i, j, m] + ce[m] * dhxdz
                        psi_ey[i, j, m] = p
                        dhxdz = dhxdz + p
                    Ex[i, j, k] = ca[k] * Ex[i, j, k] + cb[k] * (dhzdy - dhydz)
                    Ey[i, j, k] = ca[k] * Ey[i, j, k] + cb[k] * (dhxdz - dhzdx)
                for k in range(nz):
                    Ez[i, j, k] = caz[k] * Ez[i, j, k] + cbz[k] * (
                        (Hy[i, j, k] - Hy[im, j, k]) * rdx - (Hx[i, j, k] - Hx[i, jm, k]) * rdy
                    )


def apply_mask(field3 Ex, field3 Ey, Py_ssize_t k, mask_x, mask_y):
    cdef const unsigned char[:, ::1] mx = mask_x.view("u1")
    cdef const unsigned char[:, ::1] my = mask_y.view("u1")
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(mx.shape[0]):
            for j in range(mx.shape[1]):
                if mx[i, j]:
                    Ex[i, j, k] = 0.0
                if my[i, j]:
                    Ey[i, j, k] = 0.0


def field_energy(field3 Ex, field3 Ey, field3 Ez, field3 Hx, field3 Hy, field3 Hz,
                 double[::1] eps_e, double[::1] eps_ez, double mu):
    cdef Py_ssize_t nx = Ez.shape[0], ny = Ez.shape[1], nz = Ez.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double se = 0.0, sh = 0.0
    with nogil:
        for i in range(nx):
            for j in range(ny):
                for k in range(nz + 1):
                    se += eps_e[k] * (Ex[i, j, k] * Ex[i, j, k] + Ey[i, j, k] * Ey[i, j, k])
                    sh += Hz[i, j, k] * Hz[i, j, k]
                for k in range(nz):
                    se += eps_ez[k] * Ez[i, j, k] * Ez[i, j, k]
                    sh += Hx[i, j, k] * Hx[i, j, k] + Hy[i, j, k] * Hy[i, j, k]
    return 0.5 * (se + mu * sh)
