"""Pure-Python reference implementations of the hot kernels.

These mirror ``_kernels.pyx`` exactly (same signatures, same in-place
semantics) and are used when the compiled module is unavailable or when
``SICMULTIPORT_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

BS, PS, SWAP = 0, 1, 2


def apply_elements(kinds, m1, m2, params, states):
    """Apply optical elements in order to each row of ``states`` (in place)."""
    nel = len(kinds)
    nb = states.shape[0]
    for e in range(nel):
        k = kinds[e]
        i = m1[e]
        if k == BS:
            j = m2[e]
            r = math.sqrt(params[e])
            t = math.sqrt(1.0 - params[e])
            for b in range(nb):
                a = states[b, i]
                c = states[b, j]
                states[b, i] = r * a + t * c
                states[b, j] = t * a - r * c
        elif k == PS:
            ph = complex(math.cos(params[e]), math.sin(params[e]))
            for b in range(nb):
                states[b, i] = states[b, i] * ph
        else:
            j = m2[e]
            for b in range(nb):
                a = states[b, i]
                states[b, i] = states[b, j]
                states[b, j] = a
    return states


def purity_terms(p, lines, jac, hess):
    """Evaluate the two purity constraints at ``p``.

    Fills ``jac`` (2 x n) with both gradients and ``hess`` (n x n) with the
    Hessian of the cubic constraint; returns ``(quad, cubic)``.
    """
    n = len(p)
    s2 = 0.0
    s3 = 0.0
    for i in range(n):
        pi = p[i]
        s2 += pi * pi
        s3 += pi * pi * pi
        jac[0, i] = 2.0 * pi
        jac[1, i] = pi * pi
        for j in range(n):
            hess[i, j] = 0.0
        hess[i, i] = 2.0 * pi
    lsum = 0.0
    for row in range(len(lines)):
        a = lines[row, 0]
        b = lines[row, 1]
        c = lines[row, 2]
        pa, pb, pc = p[a], p[b], p[c]
        lsum += pa * pb * pc
        jac[1, a] -= pb * pc
        jac[1, b] -= pa * pc
        jac[1, c] -= pa * pb
        hess[a, b] -= pc
        hess[b, a] -= pc
        hess[a, c] -= pb
        hess[c, a] -= pb
        hess[b, c] -= pa
        hess[c, b] -= pa
    return s2 - 1.0 / 6.0, s3 / 3.0 - lsum


def purity_residuals_batch(P, lines):
    """Row-wise ``(quad, cubic)`` residuals for a stack of distributions."""
    nrow = P.shape[0]
    out = np.empty((nrow, 2))
    for r in range(nrow):
        s2 = 0.0
        s3 = 0.0
        for i in range(P.shape[1]):
            x = P[r, i]
            s2 += x * x
            s3 += x * x * x
        lsum = 0.0
        for row in range(len(lines)):
            lsum += P[r, lines[row, 0]] * P[r, lines[row, 1]] * P[r, lines[row, 2]]
        out[r, 0] = s2 - 1.0 / 6.0
        out[r, 1] = s3 / 3.0 - lsum
    return out
