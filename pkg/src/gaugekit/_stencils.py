"""Finite-difference stencils shared by the field and operator modules.

All functions act on plain ndarrays along a given axis and broadcast over the
rest, so algebra components ride along untouched. Node derivatives are
centered second order inside and one-sided 3-point second order at the two
ends of a bounded axis; periodic axes wrap. The staggered (cell-midpoint)
difference and average, together with their exact transposes, carry the
energy form of the elliptic operators.
"""

from __future__ import annotations

import numpy as np


def _axslice(ndim, axis, sl):
    out = [slice(None)] * ndim
    out[axis] = sl
    return tuple(out)


def deriv_node(v, axis, h, periodic):
    """First derivative collocated at the nodes."""
    v = np.asarray(v)
    if periodic:
        return (np.roll(v, -1, axis) - np.roll(v, 1, axis)) / (2.0 * h)
    out = np.empty_like(v, dtype=float)
    nd = v.ndim
    s = lambda sl: _axslice(nd, axis, sl)
    out[s(slice(1, -1))] = (v[s(slice(2, None))] - v[s(slice(0, -2))]) / (2.0 * h)
    out[s(slice(0, 1))] = (
        -3.0 * v[s(slice(0, 1))] + 4.0 * v[s(slice(1, 2))] - v[s(slice(2, 3))]
    ) / (2.0 * h)
    out[s(slice(-1, None))] = (
        3.0 * v[s(slice(-1, None))] - 4.0 * v[s(slice(-2, -1))] + v[s(slice(-3, -2))]
    ) / (2.0 * h)
    return out


def second_deriv_node(v, axis, h, periodic):
    """Second derivative collocated at the nodes (compact 3-point interior).

    End nodes of a bounded axis use the one-sided 4-point second-order rule
    so the value stays second-order accurate up to the boundary.
    """
    v = np.asarray(v)
    if periodic:
        return (np.roll(v, -1, axis) - 2.0 * v + np.roll(v, 1, axis)) / (h * h)
    out = np.empty_like(v, dtype=float)
    nd = v.ndim
    s = lambda sl: _axslice(nd, axis, sl)
    out[s(slice(1, -1))] = (
        v[s(slice(2, None))] - 2.0 * v[s(slice(1, -1))] + v[s(slice(0, -2))]
    ) / (h * h)
    out[s(slice(0, 1))] = (
        2.0 * v[s(slice(0, 1))]
        - 5.0 * v[s(slice(1, 2))]
        + 4.0 * v[s(slice(2, 3))]
        - v[s(slice(3, 4))]
    ) / (h * h)
    out[s(slice(-1, None))] = (
        2.0 * v[s(slice(-1, None))]
        - 5.0 * v[s(slice(-2, -1))]
        + 4.0 * v[s(slice(-3, -2))]
        - v[s(slice(-4, -3))]
    ) / (h * h)
    return out


def deriv_mid(v, axis, h, periodic):
    """Difference at cell midpoints: (v_{i+1} - v_i)/h.

    Periodic axes return N midpoints (the last wraps); bounded axes N-1.
    """
    v = np.asarray(v)
    if periodic:
        return (np.roll(v, -1, axis) - v) / h
    nd = v.ndim
    s = lambda sl: _axslice(nd, axis, sl)
    return (v[s(slice(1, None))] - v[s(slice(0, -1))]) / h


def avg_mid(v, axis, periodic):
    """Two-point average at cell midpoints, matching deriv_mid's layout."""
    v = np.asarray(v)
    if periodic:
        return 0.5 * (np.roll(v, -1, axis) + v)
    nd = v.ndim
    s = lambda sl: _axslice(nd, axis, sl)
    return 0.5 * (v[s(slice(1, None))] + v[s(slice(0, -1))])


def deriv_mid_t(m, axis, h, periodic):
    """Exact transpose of deriv_mid, mapping midpoint arrays back to nodes."""
    m = np.asarray(m)
    if periodic:
        return (np.roll(m, 1, axis) - m) / h
    nd = m.ndim
    s = lambda sl: _axslice(nd, axis, sl)
    shape = list(m.shape)
    shape[axis] += 1
    out = np.zeros(shape, dtype=float)
    out[s(slice(0, -1))] -= m / h
    out[s(slice(1, None))] += m / h
    return out


def avg_mid_t(m, axis, periodic):
    """Exact transpose of avg_mid."""
    m = np.asarray(m)
    if periodic:
        return 0.5 * (np.roll(m, 1, axis) + m)
    nd = m.ndim
    s = lambda sl: _axslice(nd, axis, sl)
    shape = list(m.shape)
    shape[axis] += 1
    out = np.zeros(shape, dtype=float)
    out[s(slice(0, -1))] += 0.5 * m
    out[s(slice(1, None))] += 0.5 * m
    return out


def quad_weights_1d(n, h, periodic):
    """Composite quadrature weights along one axis.

    Periodic axes use the (exact for the grid) rectangle rule; bounded axes
    the composite trapezoid rule.
    """
    w = np.full(n, h)
    if not periodic:
        w[0] = 0.5 * h
        w[-1] = 0.5 * h
    return w


def cumulative_trapezoid(v, axis, h):
    """Running composite-trapezoid integral along a bounded axis, zero at 0.

    The forward difference of the result reproduces the two-point midpoint
    average of v exactly, and the final entry equals the full composite
    trapezoid integral, so support bookkeeping downstream stays exact.
    """
    v = np.asarray(v, dtype=float)
    nd = v.ndim
    s = lambda sl: _axslice(nd, axis, sl)
    mid = 0.5 * (v[s(slice(1, None))] + v[s(slice(0, -1))]) * h
    out = np.zeros_like(v)
    out[s(slice(1, None))] = np.cumsum(mid, axis=axis)
    return out


def one_sided_deriv_at_face(v, axis, h, side, order=2):
    """Inward-pointing one-sided derivative at a boundary face.

    side 0 is the low end of the axis, side 1 the high end; the result is the
    derivative along +axis (not yet flipped for inwardness) evaluated on the
    face slice, with the axis dimension removed. order selects the 3-point
    second-order or the 5-point fourth-order rule.
    """
    v = np.asarray(v)
    nd = v.ndim
    s = lambda idx: _axslice(nd, axis, idx)
    if order == 2:
        if side == 0:
            return (-3.0 * v[s(0)] + 4.0 * v[s(1)] - v[s(2)]) / (2.0 * h)
        return (3.0 * v[s(-1)] - 4.0 * v[s(-2)] + v[s(-3)]) / (2.0 * h)
    if order != 4:
        raise ValueError(f"unsupported one-sided order: {order}")
    if side == 0:
        return (
            -25.0 * v[s(0)] + 48.0 * v[s(1)] - 36.0 * v[s(2)]
            + 16.0 * v[s(3)] - 3.0 * v[s(4)]
        ) / (12.0 * h)
    return -(
        -25.0 * v[s(-1)] + 48.0 * v[s(-2)] - 36.0 * v[s(-3)]
        + 16.0 * v[s(-4)] - 3.0 * v[s(-5)]
    ) / (12.0 * h)
