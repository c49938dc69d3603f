"""numba implementations of the hot loops.

Each function mirrors one in ``_numpy_kernels`` with the same signature.
No fastmath anywhere: the compensated sums depend on strict IEEE ordering.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def neumaier_sum(x):
    s = 0.0
    c = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


@njit(cache=True, nogil=True)
def block_hed_batch(post, starts, block_len, base, disc, norm):
    """HED scores of block-resampled post-onset segments.

    ``starts`` is (B, n_blocks); row ``i`` rebuilds the segment from blocks
    ``post[s:s + block_len]`` for each start ``s``, truncated to ``len(post)``.
    """
    n_rep = starts.shape[0]
    n_blocks = starts.shape[1]
    length = post.shape[0]
    out = np.empty(n_rep)
    for i in range(n_rep):
        s = 0.0
        c = 0.0
        k = 0
        for j in range(n_blocks):
            st = starts[i, j]
            for o in range(block_len):
                if k >= length:
                    break
                lift = post[st + o] - base
                if lift < 0.0:
                    lift = 0.0
                v = lift * disc[k]
                t = s + v
                if abs(s) >= abs(v):
                    c += (s - t) + v
                else:
                    c += (v - t) + s
                s = t
                k += 1
        out[i] = (s + c) / norm
    return out


@njit(cache=True, nogil=True)
def slds_filter(obs, log_trans, means, variances, log_init):
    """Forward filter for a switching model with scalar Gaussian emissions.

    Returns (posteriors, status). ``status`` is -1 on success, otherwise the
    first index at which every regime log-likelihood was non-finite.
    """
    n = obs.shape[0]
    k = means.shape[0]
    post = np.empty((n, k))
    log_norm = np.empty(k)
    for j in range(k):
        log_norm[j] = -0.5 * math.log(2.0 * math.pi * variances[j])
    log_prior = np.empty(k)
    log_joint = np.empty(k)
    for j in range(k):
        log_prior[j] = log_init[j]
    for t in range(n):
        if t > 0:
            for j in range(k):
                m = -np.inf
                for i in range(k):
                    v = log_joint[i] + log_trans[i, j]
                    if v > m:
                        m = v
                if m == -np.inf:
                    log_prior[j] = -np.inf
                    continue
                acc = 0.0
                for i in range(k):
                    acc += math.exp(log_joint[i] + log_trans[i, j] - m)
                log_prior[j] = m + math.log(acc)
        y = obs[t]
        mx = -np.inf
        for j in range(k):
            d = y - means[j]
            log_joint[j] = log_prior[j] + log_norm[j] - 0.5 * d * d / variances[j]
            if log_joint[j] > mx:
                mx = log_joint[j]
        if not math.isfinite(mx):
            return post, t
        total = 0.0
        for j in range(k):
            post[t, j] = math.exp(log_joint[j] - mx)
            total += post[t, j]
        for j in range(k):
            post[t, j] /= total
            log_joint[j] = math.log(post[t, j]) if post[t, j] > 0.0 else -np.inf
    return post, -1


@njit(cache=True, nogil=True)
def ewma(x, alpha, init):
    out = np.empty(x.shape[0])
    s = init
    for i in range(x.shape[0]):
        s = alpha * x[i] + (1.0 - alpha) * s
        out[i] = s
    return out


@njit(cache=True, nogil=True)
def linear_recursion(drive, phi, z0):
    """z[0] = z0, z[t+1] = phi * z[t] + drive[t]."""
    n = drive.shape[0]
    z = np.empty(n + 1)
    z[0] = z0
    for t in range(n):
        z[t + 1] = phi * z[t] + drive[t]
    return z
