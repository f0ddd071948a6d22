"""Independent reference routines used as test oracles."""

import numpy as np


def naive_matmul(a, b):
    rows, inner = len(a), len(a[0])
    cols = len(b[0])
    out = [[0.0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            acc = 0.0
            for k in range(inner):
                acc += a[i][k] * b[k][j]
            out[i][j] = acc
    return np.array(out)


def central_diff(f, x, h=1e-5):
    """Gradient of scalar ``f`` at array ``x`` by central differences, one entry at a time."""
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        g[i] = (fp - fm) / (2 * h)
    return grad


def rel_err(analytic, numeric):
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    diff = np.abs(analytic - numeric)
    return np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)


def sparseout_branch_form(a, r, p, q):
    """Two-branch definition: dropped -> a - |a|^(q/2), kept -> a + |a|^(q/2) (1-p)/p."""
    s = np.abs(a) ** (q / 2)
    return np.where(r == 0, a - s, a + s * (1 - p) / p)


def elementwise_diff5(f, x, h=1e-4):
    """Derivative of an elementwise map by the 5-point central stencil, O(h^4) error.

    The higher order keeps relative error small near roots of the derivative.
    """
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
