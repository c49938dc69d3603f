"""Pure numpy/scipy implementations of the hot loops (no JIT)."""
import math

import numpy as np
from scipy.signal import lfilter
from scipy.special import logsumexp


def neumaier_sum(x):
    # exactly rounded, so at least as accurate as the compensated loop
    return math.fsum(np.asarray(x, dtype=np.float64).tolist())


def _neumaier_rows(m):
    s = np.zeros(m.shape[0])
    c = np.zeros(m.shape[0])
    for j in range(m.shape[1]):
        v = m[:, j]
        t = s + v
        c += np.where(np.abs(s) >= np.abs(v), (s - t) + v, (v - t) + s)
        s = t
    return s + c


def block_hed_batch(post, starts, block_len, base, disc, norm):
    length = post.shape[0]
    idx = (starts[:, :, None] + np.arange(block_len)).reshape(starts.shape[0], -1)
    vals = post[idx[:, :length]]
    terms = np.maximum(vals - base, 0.0) * disc
    return _neumaier_rows(terms) / norm


def slds_filter(obs, log_trans, means, variances, log_init):
    n = obs.shape[0]
    k = means.shape[0]
    post = np.empty((n, k))
    log_norm = -0.5 * np.log(2.0 * np.pi * variances)
    log_prior = np.array(log_init, dtype=np.float64)
    log_joint = np.empty(k)
    # squared distances may overflow to inf; that row then reports failure
    with np.errstate(divide="ignore", over="ignore"):
        for t in range(n):
            if t > 0:
                log_prior = logsumexp(log_joint[:, None] + log_trans, axis=0)
            d = obs[t] - means
            log_joint = log_prior + log_norm - 0.5 * d * d / variances
            mx = log_joint.max()
            if not np.isfinite(mx):
                return post, t
            w = np.exp(log_joint - mx)
            post[t] = w / w.sum()
            log_joint = np.log(post[t])
    return post, -1


def ewma(x, alpha, init):
    x = np.asarray(x, dtype=np.float64)
    out, _ = lfilter([alpha], [1.0, -(1.0 - alpha)], x, zi=[(1.0 - alpha) * init])
    return out


def linear_recursion(drive, phi, z0):
    drive = np.asarray(drive, dtype=np.float64)
    z = np.empty(drive.shape[0] + 1)
    z[0] = z0
    if drive.shape[0]:
        z[1:], _ = lfilter([1.0], [1.0, -phi], drive, zi=[phi * z0])
    return z
