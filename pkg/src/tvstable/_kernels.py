"""Numba kernels for the time-varying ARMA recursions.

Conventions shared by every kernel: series are stored row-wise (one path per
row), pre-sample values of X and of the residuals are zero, and coefficient
curves arrive pre-evaluated on the time grid.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def filter_paths(ar_vals, ma_vals, z):
    """Run X_t = -sum_j a_j(t) X_{t-j} + z_t + sum_k b_k(t) z_{t-k}.

    Args:
        ar_vals: (p, n) AR curve values on the time grid.
        ma_vals: (q, n) MA curve values on the time grid.
        z: (S, n + q) scaled innovations gamma(.) * eps; column i + q is time i.

    Returns:
        (S, n) array of paths.
    """
    p = ar_vals.shape[0]
    q = ma_vals.shape[0]
    n_paths = z.shape[0]
    n = z.shape[1] - q
    out = np.zeros((n_paths, n))
    for s in range(n_paths):
        for i in range(n):
            acc = z[s, i + q]
            for k in range(1, q + 1):
                acc += ma_vals[k - 1, i] * z[s, i + q - k]
            for j in range(1, p + 1):
                if i - j >= 0:
                    acc -= ar_vals[j - 1, i] * out[s, i - j]
            out[s, i] = acc
    return out


@njit(cache=True)
def invert_paths(x, ar_vals, ma_vals, gam):
    """Conditional inversion eps_t = [sum_j a_j(t) X_{t-j} - sum_k b_k(t) g(t-k) eps_{t-k}] / g(t).

    Args:
        x: (S, T) observed paths.
        ar_vals: (p, T) AR curve values.
        ma_vals: (q, T) MA curve values.
        gam: (T,) scale curve values.

    Returns:
        (S, T) standardized residuals.
    """
    p = ar_vals.shape[0]
    q = ma_vals.shape[0]
    n_paths, n = x.shape
    eps = np.zeros((n_paths, n))
    for s in range(n_paths):
        for t in range(n):
            num = x[s, t]
            for j in range(1, p + 1):
                if t - j >= 0:
                    num += ar_vals[j - 1, t] * x[s, t - j]
            for k in range(1, q + 1):
                if t - k >= 0:
                    num -= ma_vals[k - 1, t] * gam[t - k] * eps[s, t - k]
            eps[s, t] = num / gam[t]
    return eps


@njit(cache=True)
def t_loss_grad(x, upow, ar_c, ma_c, g_c, nu, nu_free, want_grad):
    """Summed Student-t negative log-likelihood kernel with forward sensitivities.

    The parameter vector is laid out as [AR coefficients (row-major),
    MA coefficients (row-major), nu (if free), gamma coefficients]. Only the
    data-dependent part is accumulated; the normalizing constant of the t
    density is added by the caller.

    Args:
        x: (S, T) data.
        upow: (T, D) powers of rescaled time, upow[t, d] = u_t ** d.
        ar_c: (p, da + 1) AR curve coefficients.
        ma_c: (q, db + 1) MA curve coefficients.
        g_c: (dg + 1,) scale curve coefficients.
        nu: degrees of freedom.
        nu_free: whether nu occupies a slot in the gradient.
        want_grad: skip the sensitivity recursion when False.

    Returns:
        (status, loss_sum, grad) where loss_sum = sum of
        (nu + 1)/2 log(1 + e^2/nu) + log gamma_t and status is 0 on success,
        1 for a non-positive scale and 2 for a non-finite recursion.
    """
    p, na = ar_c.shape
    q, nb = ma_c.shape
    ng = g_c.shape[0]
    n_paths, n = x.shape
    off_ma = p * na
    off_nu = off_ma + q * nb
    off_g = off_nu + (1 if nu_free else 0)
    n_par = off_g + ng
    grad = np.zeros(n_par)

    gam = np.zeros(n)
    ar_vals = np.zeros((p, n))
    ma_vals = np.zeros((q, n))
    for t in range(n):
        g = 0.0
        for d in range(ng):
            g += g_c[d] * upow[t, d]
        if not g > 0.0:
            return 1, np.inf, grad
        gam[t] = g
        for j in range(p):
            v = 0.0
            for d in range(na):
                v += ar_c[j, d] * upow[t, d]
            ar_vals[j, t] = v
        for k in range(q):
            v = 0.0
            for d in range(nb):
                v += ma_c[k, d] * upow[t, d]
            ma_vals[k, t] = v

    half_nu1 = 0.5 * (nu + 1.0)
    loss = 0.0
    eps = np.zeros(n)
    deps = np.zeros((n, n_par))
    dnum = np.zeros(n_par)
    for s in range(n_paths):
        for t in range(n):
            num = x[s, t]
            if want_grad:
                for r in range(n_par):
                    dnum[r] = 0.0
            for j in range(1, p + 1):
                if t - j >= 0:
                    xl = x[s, t - j]
                    num += ar_vals[j - 1, t] * xl
                    if want_grad:
                        for d in range(na):
                            dnum[(j - 1) * na + d] += upow[t, d] * xl
            for k in range(1, q + 1):
                if t - k >= 0:
                    b = ma_vals[k - 1, t]
                    gk = gam[t - k]
                    el = eps[t - k]
                    num -= b * gk * el
                    if want_grad:
                        for d in range(nb):
                            dnum[off_ma + (k - 1) * nb + d] -= upow[t, d] * gk * el
                        for d in range(ng):
                            dnum[off_g + d] -= b * upow[t - k, d] * el
                        bg = b * gk
                        for r in range(n_par):
                            dnum[r] -= bg * deps[t - k, r]
            gt = gam[t]
            e = num / gt
            eps[t] = e
            z2 = e * e
            loss += half_nu1 * math.log1p(z2 / nu) + math.log(gt)
            if want_grad:
                for r in range(n_par):
                    deps[t, r] = dnum[r] / gt
                for d in range(ng):
                    deps[t, off_g + d] -= e * upow[t, d] / gt
                dl_de = (nu + 1.0) * e / (nu + z2)
                for r in range(n_par):
                    grad[r] += dl_de * deps[t, r]
                for d in range(ng):
                    grad[off_g + d] += upow[t, d] / gt
                if nu_free:
                    grad[off_nu] += 0.5 * math.log1p(z2 / nu) - half_nu1 * z2 / (nu * (nu + z2))
        if not math.isfinite(loss):
            return 2, np.inf, grad
    for r in range(n_par):
        if not math.isfinite(grad[r]):
            return 2, np.inf, grad
    return 0, loss, grad
