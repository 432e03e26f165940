"""Compiled inner loops for online backpropagation.

All networks share one flat layout.  For layer ``l = 1 .. L-1`` the weight
matrix (``sizes[l]`` rows by ``sizes[l-1]`` columns, row-major) starts at
``woff[l]`` and its bias vector at ``boff[l]``.  Activations and deltas live
in flat buffers indexed by ``aoff[l]``; layer 0 holds the input.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

OK = 0
DIVERGED = 1


@njit(cache=True, nogil=True)
def sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def forward(params, sizes, woff, boff, aoff, x, acts):
    n_layers = sizes.shape[0]
    for i in range(sizes[0]):
        acts[i] = x[i]
    for l in range(1, n_layers):
        nin = sizes[l - 1]
        ain = aoff[l - 1]
        aout = aoff[l]
        for j in range(sizes[l]):
            s = params[boff[l] + j]
            row = woff[l] + j * nin
            for i in range(nin):
                s += params[row + i] * acts[ain + i]
            acts[aout + j] = sigmoid(s)


@njit(cache=True, nogil=True)
def backward(params, sizes, woff, aoff, acts, t, deltas):
    """Fill ``deltas`` and return the example error 1/2 * sum (t - o)^2."""
    last = sizes.shape[0] - 1
    a0 = aoff[last]
    err = 0.0
    for k in range(sizes[last]):
        o = acts[a0 + k]
        diff = t[k] - o
        err += 0.5 * diff * diff
        deltas[a0 + k] = o * (1.0 - o) * diff
    for l in range(last - 1, 0, -1):
        nh = sizes[l]
        nk = sizes[l + 1]
        ah = aoff[l]
        ak = aoff[l + 1]
        for h in range(nh):
            s = 0.0
            for k in range(nk):
                s += params[woff[l + 1] + k * nh + h] * deltas[ak + k]
            o = acts[ah + h]
            deltas[ah + h] = o * (1.0 - o) * s
    return err


@njit(cache=True, nogil=True)
def update(params, sizes, woff, boff, aoff, use_bias, eta, acts, deltas):
    """w <- w + eta * delta_j * x_i for every weight; False if anything became non-finite."""
    ok = True
    for l in range(1, sizes.shape[0]):
        nin = sizes[l - 1]
        ain = aoff[l - 1]
        aout = aoff[l]
        for j in range(sizes[l]):
            step = eta * deltas[aout + j]
            row = woff[l] + j * nin
            for i in range(nin):
                w = params[row + i] + step * acts[ain + i]
                params[row + i] = w
                if not math.isfinite(w):
                    ok = False
            if use_bias:
                b = params[boff[l] + j] + step
                params[boff[l] + j] = b
                if not math.isfinite(b):
                    ok = False
    return ok


@njit(cache=True, nogil=True)
def step(params, sizes, woff, boff, aoff, use_bias, x, t, eta, acts, deltas):
    """One online example: forward, deltas, update.  Returns (pre-update error, status)."""
    forward(params, sizes, woff, boff, aoff, x, acts)
    err = backward(params, sizes, woff, aoff, acts, t, deltas)
    if not math.isfinite(err):
        return err, DIVERGED
    if not update(params, sizes, woff, boff, aoff, use_bias, eta, acts, deltas):
        return err, DIVERGED
    return err, OK


@njit(cache=True, nogil=True)
def gradient(params, sizes, woff, boff, aoff, use_bias, x, t, acts, deltas, grad):
    """dErr/dw = -delta_j * x_i for every parameter; biases use x_i = 1."""
    forward(params, sizes, woff, boff, aoff, x, acts)
    err = backward(params, sizes, woff, aoff, acts, t, deltas)
    for p in range(grad.shape[0]):
        grad[p] = 0.0
    for l in range(1, sizes.shape[0]):
        nin = sizes[l - 1]
        ain = aoff[l - 1]
        aout = aoff[l]
        for j in range(sizes[l]):
            d = deltas[aout + j]
            row = woff[l] + j * nin
            for i in range(nin):
                grad[row + i] = -d * acts[ain + i]
            if use_bias:
                grad[boff[l] + j] = -d
    return err


@njit(cache=True, nogil=True)
def mlp_epoch(params, sizes, woff, boff, aoff, use_bias, inputs, targets, order, eta, acts, deltas):
    """One pass over ``order``.  Returns (sum of pre-update errors, status, failing position)."""
    t = np.empty(1)
    total = 0.0
    for pos in range(order.shape[0]):
        idx = order[pos]
        t[0] = targets[idx]
        err, status = step(params, sizes, woff, boff, aoff, use_bias, inputs[idx], t, eta, acts, deltas)
        total += err
        if status != OK:
            return total, status, pos
    return total, OK, -1


@njit(cache=True, nogil=True)
def fill_tdrnn_input(features, idx, depth, context, x):
    """Tapped-delay rows idx-depth+1 .. idx (clipped at 0, oldest first), then the context."""
    nf = features.shape[1]
    p = 0
    for k in range(depth):
        row = idx - (depth - 1) + k
        if row < 0:
            row = 0
        for f in range(nf):
            x[p] = features[row, f]
            p += 1
    for c in range(context.shape[0]):
        x[p] = context[c]
        p += 1


@njit(cache=True, nogil=True)
def tdrnn_epoch(params, sizes, woff, boff, aoff, use_bias, features, targets, order, depth, context, eta, acts, deltas):
    """Like ``mlp_epoch`` but builds tapped-delay inputs and carries Elman context.

    The context is an ordinary input during the step (truncated, depth-1
    backprop); afterwards it is overwritten with the first ``len(context)``
    hidden activations of that step's forward pass.
    """
    t = np.empty(1)
    x = np.empty(sizes[0])
    h0 = aoff[1]
    total = 0.0
    for pos in range(order.shape[0]):
        idx = order[pos]
        fill_tdrnn_input(features, idx, depth, context, x)
        t[0] = targets[idx]
        err, status = step(params, sizes, woff, boff, aoff, use_bias, x, t, eta, acts, deltas)
        total += err
        for c in range(context.shape[0]):
            context[c] = acts[h0 + c]
        if status != OK:
            return total, status, pos
    return total, OK, -1
