"""Brute-force reference implementations used only by the tests."""

import numpy as np


def naive_dft(x, inverse=False):
    x = np.asarray(x, dtype=complex)
    n = x.size
    idx = np.arange(n)
    # reduce the product mod n before scaling keeps twiddle arguments small
    sign = 1 if inverse else -1
    kernel = np.exp(sign * 2j * np.pi * (np.outer(idx, idx) % n) / n)
    return kernel @ x / np.sqrt(n)


def isfft_sum(x_dd):
    M, N = x_dd.shape
    out = np.zeros((M, N), dtype=complex)
    for m in range(M):
        for n in range(N):
            acc = 0j
            for k in range(N):
                for l in range(M):
                    acc += x_dd[l, k] * np.exp(2j * np.pi * (n * k / N - m * l / M))
            out[m, n] = acc / np.sqrt(N * M)
    return out


def sfft_sum(y_tf):
    M, N = y_tf.shape
    out = np.zeros((M, N), dtype=complex)
    for l in range(M):
        for k in range(N):
            acc = 0j
            for n in range(N):
                for m in range(M):
                    acc += y_tf[m, n] * np.exp(-2j * np.pi * (k * n / N - l * m / M))
            out[l, k] = acc / np.sqrt(N * M)
    return out


def dzt_sum(x, M, N):
    out = np.zeros((M, N), dtype=complex)
    for l in range(M):
        for k in range(N):
            out[l, k] = sum(x[l + n * M] * np.exp(-2j * np.pi * n * k / N) for n in range(N)) / np.sqrt(N)
    return out


def idzt_sum(z):
    M, N = z.shape
    x = np.zeros(M * N, dtype=complex)
    for l in range(M):
        for n in range(N):
            x[l + n * M] = sum(z[l, k] * np.exp(2j * np.pi * n * k / N) for k in range(N)) / np.sqrt(N)
    return x


def ltv_channel_loop(samples, paths, fs, cp_len):
    """Per-sample evaluation of r(t) = sum_i h_i s(t - tau_i) exp(j2pi nu_i (t - tau_i))."""
    r = np.zeros(len(samples), dtype=complex)
    for p in range(len(samples)):
        t = (p - cp_len) / fs
        for h, tau, nu in paths:
            d = int(round(tau * fs))
            if p - d >= 0:
                r[p] += h * samples[p - d] * np.exp(2j * np.pi * nu * (t - tau))
    return r
