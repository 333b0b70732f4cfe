"""Independent reference computations used to pin expected test values.

Everything here is deliberately written without reusing the library's
vectorized code paths: plain math loops, closed forms, quadrature, and
textbook formulas.
"""
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def rabi_probability(quad_rate, delta, kappa, duration):
    """Closed-form |0> -> |1> transition probability for a constant x drive.

    H = (delta/2) sz + kappa * quad_rate * sx held for ``duration``.
    """
    drive = 2.0 * kappa * quad_rate
    eff = math.sqrt(drive * drive + delta * delta)
    if eff == 0.0:
        return 0.0
    return (drive / eff) ** 2 * math.sin(eff * duration / 2.0) ** 2


def pm_quadratures_direct(amps, depths, freqs, t):
    """Plain-loop evaluation of the phase-modulated quadrature sums."""
    wx = 0.0
    wy = 0.0
    for a, b, nu in zip(amps, depths, freqs):
        if nu == 0.0:
            phase = b * t
        else:
            phase = b / nu * math.sin(nu * t)
        wx += 0.5 * a * math.cos(phase)
        wy += 0.5 * a * math.sin(phase)
    return wx, wy


def sfb_quadratures_direct(amps, freqs, phases, quad_angles, t):
    wx = 0.0
    wy = 0.0
    for a, w, phi, vphi in zip(amps, freqs, phases, quad_angles):
        env = 0.5 * a * math.cos(w * t + phi)
        wx += env * math.cos(vphi)
        wy += env * math.sin(vphi)
    return wx, wy


def gaussian_density(x, mean, fwhm):
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    return math.exp(-0.5 * ((x - mean) / sigma) ** 2) / (
        math.sqrt(2.0 * math.pi) * sigma
    )


def brute_force_objective(point_fidelity, m, n, delta_range, kappa_range, delta_fwhm, kappa_fwhm, kappa_mean):
    """Weighted grid average via explicit loops and explicit normalization.

    ``point_fidelity(delta, kappa)`` supplies the single-point values.
    """
    deltas = [
        delta_range[0] + i * (delta_range[1] - delta_range[0]) / (m - 1)
        for i in range(m)
    ]
    kappas = [
        kappa_range[0] + j * (kappa_range[1] - kappa_range[0]) / (n - 1)
        for j in range(n)
    ]
    total = 0.0
    norm = 0.0
    for d in deltas:
        for k in kappas:
            w = gaussian_density(d, 0.0, delta_fwhm) * gaussian_density(
                k, kappa_mean, kappa_fwhm
            )
            norm += w
            total += w * point_fidelity(d, k)
    return total / norm


def gp_log_likelihood(values, corr, mu, sigma2):
    """Full Gaussian log-likelihood of sample values under the process model."""
    values = np.asarray(values, dtype=float)
    n = values.size
    resid = values - mu
    sign, logdet = np.linalg.slogdet(corr)
    assert sign > 0
    quad = resid @ np.linalg.solve(corr, resid)
    return -0.5 * (n * math.log(2.0 * math.pi * sigma2) + logdet + quad / sigma2)


def abs_cos_integral(g_ac, omega_s, t):
    """Adaptive quadrature of int_0^t g |cos(w u)| du, split at the kinks."""
    from scipy.integrate import quad

    half = math.pi / omega_s
    edges = [0.0]
    k = 1
    while (2 * k - 1) * half / 2 < t:
        edges.append((2 * k - 1) * half / 2)
        k += 1
    edges.append(t)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda u: abs(math.cos(omega_s * u)), lo, hi, epsabs=1e-13)
        total += val
    return g_ac * total
