"""Fused elementwise kernels for the batched jet pass.

numpy's float64 ``sin``/``cos`` are scalar libm loops here, roughly ten
times slower than torch's vectorised versions, and the remaining arithmetic
allocates a temporary per operation.  Transcendentals therefore go through
torch (zero-copy views) and the rest is fused with numba.  Results agree with
:func:`bipinn.activations.derivatives` to rounding.
"""

from __future__ import annotations

import numba
import numpy as np
import torch

torch.set_num_threads(1)


def sin_cos_sigmoid(z: np.ndarray):
    t = torch.from_numpy(z)
    return torch.sin(t).numpy(), torch.cos(t).numpy(), torch.sigmoid(t).numpy()


@numba.njit(cache=True)
def _sinlu_jet(z, dz, ddz, sn, cs, sg, h, dh, ddh, a1, a2, a3):
    rows, cols = z.shape
    full = dz.shape[1] > 1
    for i in range(rows):
        for j in range(cols):
            k = j if full else 0
            x = z[i, j]
            s_ = sn[i, j]
            c_ = cs[i, j]
            s = sg[i, j]
            s1 = s * (1.0 - s)
            s2 = s1 * (1.0 - 2.0 * s)
            s3 = s1 * (1.0 - 6.0 * s + 6.0 * s * s)
            xs = x * s_
            xc = x * c_
            g1 = s_ + xc
            g2 = 2.0 * c_ - xs
            g3 = -3.0 * s_ - xc
            d1 = g1 * s + xs * s1
            d2 = g2 * s + 2.0 * g1 * s1 + xs * s2
            a1[i, j] = d1
            a2[i, j] = d2
            a3[i, j] = g3 * s + 3.0 * g2 * s1 + 3.0 * g1 * s2 + xs * s3
            v = dz[i, k]
            h[i, j] = xs * s
            dh[i, j] = d1 * v
            ddh[i, j] = d2 * v * v + d1 * ddz[i, k]


def sinlu_jet(z, dz, ddz):
    """Push a batch of affine jets through sinLU.

    ``dz`` and ``ddz`` may have a single column, meaning constant per row.

    Returns ``(h, dh, ddh, a1, a2, a3)``: the output jet and the first three
    activation derivatives at ``z`` (kept for the reverse pass).
    """
    sn, cs, sg = sin_cos_sigmoid(z)
    out = [np.empty_like(z) for _ in range(6)]
    _sinlu_jet(z, dz, ddz, sn, cs, sg, *out)
    return tuple(out)


@numba.njit(cache=True)
def _chain_backward(gh, gdh, gddh, dz, ddz, a1, a2, a3, gz, gdz, gddz):
    rows, cols = a1.shape
    full = dz.shape[1] > 1
    for i in range(rows):
        for j in range(cols):
            k = j if full else 0
            v = dz[i, k]
            d1 = a1[i, j]
            d2 = a2[i, j]
            gd = gdh[i, j]
            gdd = gddh[i, j]
            gz[i, j] = gh[i, j] * d1 + gd * v * d2 + gdd * (a3[i, j] * v * v + d2 * ddz[i, k])
            gdz[i, j] = gd * d1 + 2.0 * gdd * d2 * v
            gddz[i, j] = gdd * d1


def chain_backward(gh, gdh, gddh, dz, ddz, a1, a2, a3):
    """Adjoints of ``(z, dz, ddz)`` given adjoints of the activated jet."""
    shape = a1.shape
    g = [np.ascontiguousarray(np.broadcast_to(a, shape)) for a in (gh, gdh, gddh)]
    out = [np.empty(shape) for _ in range(3)]
    _chain_backward(*g, dz, ddz, a1, a2, a3, *out)
    return tuple(out)
