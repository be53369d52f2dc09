"""Pure NumPy implementations of the hot loops.

Mirrors ``_kernels.pyx`` function by function; used when the compiled
extension is missing or ``VERTEXKIT_PURE_PYTHON=1`` is set.
"""

import numpy as np


def taylor_recurrence(s, length):
    """Coefficients u_0..u_length of ((1+x)/(1-x))**s."""
    out = np.empty(length + 1, dtype=np.float64)
    out[0] = 1.0
    if length >= 1:
        out[1] = 2.0 * s
    two_s = 2.0 * s
    for k in range(1, length):
        out[k + 1] = (two_s * out[k] + (k - 1) * out[k - 1]) / (k + 1)
    return out


def parity_partial_sums(u, start, shifts, power, checkpoints):
    """Partial sums of u[m] / (shift + m)**power over m = start, start+2, ...

    Returns an array of shape (len(shifts), len(checkpoints)); column j holds
    the sum of the first ``checkpoints[j]`` terms.
    """
    shifts = np.asarray(shifts, dtype=np.float64)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    nterms = int(checkpoints.max())
    if len(u) < start + 2 * (nterms - 1) + 1:
        raise IndexError("mode table too short for requested partial sums")
    m = np.arange(start, start + 2 * nterms, 2)
    um = u[m]
    out = np.empty((shifts.size, checkpoints.size), dtype=np.float64)
    for i, sh in enumerate(shifts):
        cs = np.cumsum(um / (sh + m) ** power)
        out[i] = cs[checkpoints - 1]
    return out


def f_closed_form(a, b, f00, order, diag_even, diag_odd):
    """Closed-form coupling matrix F of size (order+1)x(order+1).

    ``diag_even[n-1]`` holds a_{2n} Stilde^b_{2n} - b_{2n} Stilde^a_{2n}
    and ``diag_odd[n-1]`` holds a_{2n-1} Etilde^b_{2n-1} - b_{2n-1} Etilde^a_{2n-1}.
    """
    size = order + 1
    F = np.zeros((size, size), dtype=np.complex128)
    g = f00 - 1.0
    F[0, 0] = f00
    if order == 0:
        return F
    idx = np.arange(1, size)
    half = (idx + 1) // 2
    sgn = np.where(half % 2 == 0, 1.0, -1.0)
    zero_col = g * sgn * a[idx] / np.sqrt(idx)
    odd = idx % 2 == 1
    F[idx, 0] = np.where(odd, 1j * zero_col, zero_col)
    F[0, idx] = np.conj(F[idx, 0])

    r = idx[:, None].astype(np.float64)
    c = idx[None, :].astype(np.float64)
    ar, br = a[idx][:, None], b[idx][:, None]
    ac, bc = a[idx][None, :], b[idx][None, :]
    s = sgn[:, None] * sgn[None, :]
    # diagonal entries are filled separately; keep their placeholder finite
    diff = np.where(r == c, 1.0, r - c)
    plus = (ar * bc + br * ac) / (r + c)
    minus = (ar * bc - br * ac) / diff
    zm = g * s * ar * ac / np.sqrt(r * c)
    root = np.sqrt(r * c)
    ro, co = odd[:, None], odd[None, :]

    block = np.zeros((order, order), dtype=np.complex128)
    ee = ~ro & ~co
    oo = ro & co
    eo = ~ro & co
    oe = ro & ~co
    block[ee] = (zm - 0.5 * s * root * (plus + minus))[ee]
    block[oo] = (zm + 0.5 * s * root * (plus + minus))[oo]
    # mixed parity: the symmetric product sits over r - c, the antisymmetric over r + c
    mixed = 0.5 * s * root * ((ar * bc + br * ac) / diff + (ar * bc - br * ac) / (r + c))
    block[eo] = (-1j * mixed - 1j * zm)[eo]
    block[oe] = (-1j * mixed + 1j * zm)[oe]

    n_even = order // 2
    n_odd = (order + 1) // 2
    e_idx = np.arange(2, 2 * n_even + 1, 2)
    o_idx = np.arange(1, 2 * n_odd, 2)
    ae, be = a[e_idx], b[e_idx]
    block[e_idx - 1, e_idx - 1] = (
        g * ae * ae / e_idx - 0.5 * ae * be - 0.5
        - (e_idx / np.pi) * (np.sqrt(3.0) / 2.0) * diag_even[:n_even]
    )
    ao, bo = a[o_idx], b[o_idx]
    block[o_idx - 1, o_idx - 1] = (
        g * ao * ao / o_idx + 0.5 * ao * bo + 0.5
        + (np.sqrt(3.0) / (2.0 * np.pi)) * o_idx * diag_odd[:n_odd]
    )
    F[1:, 1:] = block
    return F
