"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_core.pyx`` must agree with them to
roundoff. Every function takes and returns float64 arrays.
"""
import numpy as np

_LN2 = np.log(2.0)
_LARGE = 30.0


def asinh_sinh_scaled(a, c):
    """Evaluate ``asinh(sinh(a) * c)`` without overflow for large ``a``.

    ``a`` must be non-negative, ``c`` non-negative. Arrays broadcast.
    """
    a, c = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(c, dtype=float))
    out = np.empty(a.shape)
    small = a <= _LARGE
    out[small] = np.arcsinh(np.sinh(a[small]) * c[small])
    big = ~small
    if np.any(big):
        ab, cb = a[big], c[big]
        with np.errstate(divide="ignore"):
            # log(sinh(a) * c) = a - ln2 + log1p(-exp(-2a)) + ln c
            lnz = ab - _LN2 + np.log1p(-np.exp(-2.0 * ab)) + np.log(cb)
        out[big] = asinh_from_log(lnz)
    return out


def asinh_from_log(lnz):
    """``asinh(exp(lnz))`` for any real ``lnz`` (``-inf`` gives 0)."""
    lnz = np.asarray(lnz, dtype=float)
    out = np.empty(lnz.shape)
    big = lnz > 20.0
    with np.errstate(over="ignore"):
        out[~big] = np.arcsinh(np.exp(lnz[~big]))
    lb = lnz[big]
    out[big] = lb + np.log1p(np.sqrt(1.0 + np.exp(-2.0 * lb)))
    return out


def log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return x - _LN2 + np.log1p(np.exp(-2.0 * x))


def log_sinh(x):
    """log(sinh(x)) for x > 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return x - _LN2 + np.log1p(-np.exp(-2.0 * x))


def chart_components(xi, axis, sign, G):
    """Pull an ambient form back through an orthographic chart.

    ``xi`` has shape (N, d), ``G`` shape (N, d+1, d+1). The chart embeds
    ``xi`` into R^{d+1} with ``sign * sqrt(1 - |xi|^2)`` inserted at slot
    ``axis``. Returns ``J^T G J`` with shape (N, d, d).
    """
    xi = np.asarray(xi, dtype=float)
    G = np.asarray(G, dtype=float)
    q = np.sqrt(1.0 - np.einsum("ni,ni->n", xi, xi))
    v = -sign * xi / q[:, None]
    keep = [j for j in range(G.shape[1]) if j != axis]
    Grr = G[:, keep][:, :, keep]
    gir = G[:, axis, keep]
    gri = G[:, keep, axis]
    gii = G[:, axis, axis]
    return (
        Grr
        + v[:, :, None] * gir[:, None, :]
        + gri[:, :, None] * v[:, None, :]
        + gii[:, None, None] * v[:, :, None] * v[:, None, :]
    )


def join_ambient(X, k, a, c, Hb):
    """Ambient matrix of a block form given in join coordinates.

    ``X`` (N, k+n) are unit vectors ``(cos(beta) w, sin(beta) u)``. The form is
    ``a * sigma_{S^{k-1}}(dw) + Hb(du, du) + c * dbeta^2``; ``Hb`` (N, n, n) is an
    ambient representative of the S^{n-1} block. Returns (N, k+n, k+n).
    """
    X = np.asarray(X, dtype=float)
    N, m = X.shape
    x1, x2 = X[:, :k], X[:, k:]
    n1 = np.sqrt(np.einsum("ni,ni->n", x1, x1))
    n2 = np.sqrt(np.einsum("ni,ni->n", x2, x2))
    w = x1 / n1[:, None]
    u = x2 / n2[:, None]
    cb, sb = n1, n2
    a = np.broadcast_to(np.asarray(a, dtype=float), (N,))
    c = np.broadcast_to(np.asarray(c, dtype=float), (N,))
    G = np.zeros((N, m, m))
    Pw = np.eye(k)[None] - w[:, :, None] * w[:, None, :]
    G[:, :k, :k] = (a / cb**2)[:, None, None] * Pw
    Pu = np.eye(m - k)[None] - u[:, :, None] * u[:, None, :]
    G[:, k:, k:] = (Pu @ np.asarray(Hb, dtype=float) @ Pu) / (sb**2)[:, None, None]
    nu = np.concatenate([-sb[:, None] * w, cb[:, None] * u], axis=1)
    G += c[:, None, None] * nu[:, :, None] * nu[:, None, :]
    return G


def stencil_sup(V, h):
    """Max-abs value, first and second central differences over stencils.

    ``V`` has shape (N, S, d, d) with the stencil layout of
    :func:`hypext.spheres.stencil_offsets`. Returns ``(d0, d1, d2)``.
    """
    V = np.asarray(V, dtype=float)
    N, S, d, _ = V.shape
    if N == 0:
        return 0.0, 0.0, 0.0
    f0 = V[:, 0]
    d0 = np.max(np.abs(f0))
    plus = V[:, 1 : 1 + d]
    minus = V[:, 1 + d : 1 + 2 * d]
    d1 = np.max(np.abs(plus - minus)) / (2.0 * h)
    d2 = np.max(np.abs(plus - 2.0 * f0[:, None] + minus)) / (h * h)
    if d > 1:
        mixed = V[:, 1 + 2 * d :].reshape(N, -1, 4, d, d)
        dm = mixed[:, :, 0] - mixed[:, :, 1] - mixed[:, :, 2] + mixed[:, :, 3]
        d2 = max(d2, np.max(np.abs(dm)) / (4.0 * h * h))
    return float(d0), float(d1), float(d2)
