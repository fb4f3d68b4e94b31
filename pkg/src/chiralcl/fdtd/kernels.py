"""Numba time-stepping kernels for the Yee-grid solver.

Every kernel writes each output cell exactly once per call, so results
are bitwise identical for any worker-thread count.  CPML convolution
state lives in boundary slabs: for a derivative along one axis, the psi
array spans only the two absorbing layers of that axis, addressed
through a compact slab index computed inline (interior cells map to -1
and skip the convolution).

All E updates fold dt/(eps0*eps_inf) into per-node coefficient arrays
``ce*``; derivative differences are scaled by 1/dx inside the kernel,
while the CPML ``c`` profiles arrive pre-scaled.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _slab(i, n_nodes, npml):
    """Slab index for psi storage along an axis with n_nodes nodes.

    Low layer occupies s in [0, npml]; high layer [npml+1, 2*npml+1].
    Returns -1 in the interior.
    """
    if i <= npml:
        return i
    if i >= n_nodes - 1 - npml:
        return 2 * npml + 1 - (n_nodes - 1 - i)
    return -1


@njit(parallel=True, cache=True)
def update_h(ex, ey, ez, hx, hy, hz, dtm, inv_dx, npml,
             bhx, chx, bhy, chy, bhz, chz,
             p_hx_y, p_hx_z, p_hy_z, p_hy_x, p_hz_x, p_hz_y):
    nx1, ny1, nz1 = ex.shape
    for i in prange(nx1 - 1):
        sxh = int(_slab(i, nx1, npml))
        for j in range(ny1 - 1):
            syh = int(_slab(j, ny1, npml))
            for k in range(nz1 - 1):
                szh = int(_slab(k, nz1, npml))

                # Hx at (i, j+1/2, k+1/2): needs dEz/dy, dEy/dz
                dzy = ez[i, j + 1, k] - ez[i, j, k]
                dyz = ey[i, j, k + 1] - ey[i, j, k]
                ty = dzy * inv_dx
                tz = dyz * inv_dx
                if syh >= 0:
                    p = bhy[j] * p_hx_y[i, syh, k] + chy[j] * dzy
                    p_hx_y[i, syh, k] = p
                    ty += p
                if szh >= 0:
                    p = bhz[k] * p_hx_z[i, j, szh] + chz[k] * dyz
                    p_hx_z[i, j, szh] = p
                    tz += p
                hx[i, j, k] -= dtm * (ty - tz)

                # Hy at (i+1/2, j, k+1/2): needs dEx/dz, dEz/dx
                dxz = ex[i, j, k + 1] - ex[i, j, k]
                dzx = ez[i + 1, j, k] - ez[i, j, k]
                tz = dxz * inv_dx
                tx = dzx * inv_dx
                if szh >= 0:
                    p = bhz[k] * p_hy_z[i, j, szh] + chz[k] * dxz
                    p_hy_z[i, j, szh] = p
                    tz += p
                if sxh >= 0:
                    p = bhx[i] * p_hy_x[sxh, j, k] + chx[i] * dzx
                    p_hy_x[sxh, j, k] = p
                    tx += p
                hy[i, j, k] -= dtm * (tz - tx)

                # Hz at (i+1/2, j+1/2, k): needs dEy/dx, dEx/dy
                dyx = ey[i + 1, j, k] - ey[i, j, k]
                dxy = ex[i, j + 1, k] - ex[i, j, k]
                tx = dyx * inv_dx
                ty = dxy * inv_dx
                if sxh >= 0:
                    p = bhx[i] * p_hz_x[sxh, j, k] + chx[i] * dyx
                    p_hz_x[sxh, j, k] = p
                    tx += p
                if syh >= 0:
                    p = bhy[j] * p_hz_y[i, syh, k] + chy[j] * dxy
                    p_hz_y[i, syh, k] = p
                    ty += p
                hz[i, j, k] -= dtm * (tx - ty)


@njit(parallel=True, cache=True)
def update_e(ex, ey, ez, hx, hy, hz, cex, cey, cez, inv_dx, npml,
             bex, cexp, bey, ceyp, bez, cezp,
             p_ex_y, p_ex_z, p_ey_z, p_ey_x, p_ez_x, p_ez_y):
    nx1, ny1, nz1 = ex.shape
    for i in prange(1, nx1 - 1):
        sx = int(_slab(i, nx1, npml))
        for j in range(1, ny1 - 1):
            sy = int(_slab(j, ny1, npml))
            for k in range(1, nz1 - 1):
                sz = int(_slab(k, nz1, npml))

                # Ex at (i+1/2, j, k): dHz/dy - dHy/dz
                dzy = hz[i, j, k] - hz[i, j - 1, k]
                dyz = hy[i, j, k] - hy[i, j, k - 1]
                ty = dzy * inv_dx
                tz = dyz * inv_dx
                if sy >= 0:
                    p = bey[j] * p_ex_y[i, sy, k] + ceyp[j] * dzy
                    p_ex_y[i, sy, k] = p
                    ty += p
                if sz >= 0:
                    p = bez[k] * p_ex_z[i, j, sz] + cezp[k] * dyz
                    p_ex_z[i, j, sz] = p
                    tz += p
                ex[i, j, k] += cex[i, j, k] * (ty - tz)

                # Ey at (i, j+1/2, k): dHx/dz - dHz/dx
                dxz = hx[i, j, k] - hx[i, j, k - 1]
                dzx = hz[i, j, k] - hz[i - 1, j, k]
                tz = dxz * inv_dx
                tx = dzx * inv_dx
                if sz >= 0:
                    p = bez[k] * p_ey_z[i, j, sz] + cezp[k] * dxz
                    p_ey_z[i, j, sz] = p
                    tz += p
                if sx >= 0:
                    p = bex[i] * p_ey_x[sx, j, k] + cexp[i] * dzx
                    p_ey_x[sx, j, k] = p
                    tx += p
                ey[i, j, k] += cey[i, j, k] * (tz - tx)

                # Ez at (i, j, k+1/2): dHy/dx - dHx/dy
                dyx = hy[i, j, k] - hy[i - 1, j, k]
                dxy = hx[i, j, k] - hx[i, j - 1, k]
                tx = dyx * inv_dx
                ty = dxy * inv_dx
                if sx >= 0:
                    p = bex[i] * p_ez_x[sx, j, k] + cexp[i] * dyx
                    p_ez_x[sx, j, k] = p
                    tx += p
                if sy >= 0:
                    p = bey[j] * p_ez_y[i, sy, k] + ceyp[j] * dxy
                    p_ez_y[i, sy, k] = p
                    ty += p
                ez[i, j, k] += cez[i, j, k] * (tx - ty)


@njit(parallel=True, cache=True)
def metal_currents(eflat, idx, jd, ad, bd, pl, plm, c1, c2, c3,
                   jsum, inv_dt):
    """Advance per-node dispersive currents using E at step n.

    jd holds one row per relaxation pole (J update); pl/plm hold the
    resonant-pole polarization at steps n and n-1.  jsum receives the
    total current density at step n+1/2.
    """
    for m in prange(idx.size):
        e = eflat[idx[m]]
        tot = 0.0
        for p in range(jd.shape[0]):
            jn = bd[p] * jd[p, m] + ad[p] * e
            jd[p, m] = jn
            tot += jn
        for p in range(pl.shape[0]):
            pn = c1[p] * pl[p, m] + c2[p] * plm[p, m] + c3[p] * e
            tot += (pn - pl[p, m]) * inv_dt
            plm[p, m] = pl[p, m]
            pl[p, m] = pn
        jsum[m] = tot


@njit(parallel=True, cache=True)
def apply_currents(eflat, idx, jsum, cj):
    for m in prange(idx.size):
        eflat[idx[m]] -= cj * jsum[m]
