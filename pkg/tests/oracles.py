"""Independent extended-precision reference for gradient and jet checks.

Everything here is recomputed in ``np.longdouble`` (80-bit on x86, about
19 significant digits) from the raw parameter arrays, without touching the
package's tape, kernels or activation module.  Central differences taken in
this precision are accurate enough to check float64 gradients to 1e-6.
"""

import numpy as np

LD = np.longdouble


def _sigmoid(x):
    return LD(1) / (LD(1) + np.exp(-x))


def activation_jet(kind, z, dz, ddz):
    """Push a jet through the activation using closed-form a, a', a''."""
    if kind == "identity":
        return z, dz, ddz
    if kind == "tanh":
        a = np.tanh(z)
        a1 = LD(1) - a * a
        a2 = LD(-2) * a * a1
    elif kind == "sinlu":
        s = _sigmoid(z)
        ds = s * (LD(1) - s)
        dds = ds * (LD(1) - LD(2) * s)
        g = z * np.sin(z)
        dg = np.sin(z) + z * np.cos(z)
        ddg = LD(2) * np.cos(z) - z * np.sin(z)
        a = g * s
        a1 = dg * s + g * ds
        a2 = ddg * s + LD(2) * dg * ds + g * dds
    else:
        raise ValueError(kind)
    return a, a1 * dz, a2 * dz * dz + a1 * ddz


def forward(weights, biases, kind, t, final_activation=False):
    """``(u, du, ddu)`` of a dense network at points ``t``, in long double."""
    h = np.asarray(t, dtype=LD)[None, :]
    dh = np.ones_like(h)
    ddh = np.zeros_like(h)
    n = len(weights)
    for l, (W, b) in enumerate(zip(weights, biases)):
        W = np.asarray(W, dtype=LD)
        b = np.asarray(b, dtype=LD)
        z, dz, ddz = W @ h + b[:, None], W @ dh, W @ ddh
        if l < n - 1 or final_activation:
            z, dz, ddz = activation_jet(kind, z, dz, ddz)
        h, dh, ddh = z, dz, ddz
    return h[0], dh[0], ddh[0]


def pinn_loss(weights, biases, kind, spec, colloc):
    """Interior residual MSE plus per-endpoint boundary MSE, in long double."""
    t = colloc.interior
    u, du, ddu = forward(weights, biases, kind, t)
    if spec.kind == "logistic":
        r = du - LD(spec.rate) * u * (LD(1) - u)
    else:
        tt = np.asarray(t, dtype=LD)
        src = sum(LD(c) * np.sin(LD(k) * tt) for k, c in enumerate(spec.coefficients, start=1))
        r = ddu - src
    loss = np.mean(r * r)
    for pts, value in zip(colloc.boundary, colloc.boundary_values):
        ub, _, _ = forward(weights, biases, kind, pts)
        loss = loss + np.mean((ub - LD(value)) ** 2)
    return loss


def fd_gradient(net, spec, colloc, rel_step=1e-6):
    """Central-difference gradient of the loss for every unmasked parameter.

    Returns a list shaped like ``net.params()``; masked entries are 0.
    """
    kind = net.arch.activation.value
    weights = [np.asarray(W, dtype=LD) * m for W, m in zip(net.weights, net.weight_mask)]
    biases = [np.asarray(b, dtype=LD) * m for b, m in zip(net.biases, net.bias_mask)]
    params = []
    for W, b in zip(weights, biases):
        params += [W, b]
    masks = net.masks()
    out = [np.zeros(p.shape) for p in params]
    for p, m, g in zip(params, masks, out):
        for idx in np.ndindex(p.shape):
            if not m[idx]:
                continue
            x = p[idx]
            h = LD(rel_step) * max(LD(1), abs(x))
            p[idx] = x + h
            fp = pinn_loss(weights, biases, kind, spec, colloc)
            p[idx] = x - h
            fm = pinn_loss(weights, biases, kind, spec, colloc)
            p[idx] = x
            g[idx] = float((fp - fm) / (LD(2) * h))
    return out


def fd_time_derivatives(net, t, h=1e-3):
    """First and second t-derivatives of the output by 5-point central stencils."""
    kind = net.arch.activation.value
    weights = [np.asarray(W, dtype=LD) * m for W, m in zip(net.weights, net.weight_mask)]
    biases = [np.asarray(b, dtype=LD) * m for b, m in zip(net.biases, net.bias_mask)]
    h = LD(h)
    t = LD(t)
    pts = np.array([t - 2 * h, t - h, t, t + h, t + 2 * h], dtype=LD)
    # value-only pass: the derivative channels are ignored
    v, _, _ = forward(weights, biases, kind, pts, net.arch.final_activation)
    d1 = (v[0] - LD(8) * v[1] + LD(8) * v[3] - v[4]) / (LD(12) * h)
    d2 = (-v[0] + LD(16) * v[1] - LD(30) * v[2] + LD(16) * v[3] - v[4]) / (LD(12) * h * h)
    return float(d1), float(d2)


def rel_err(a, b):
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))
