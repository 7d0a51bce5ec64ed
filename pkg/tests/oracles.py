"""Independent reference implementations used to check expected values.

These deliberately take a different computational route from the package:
covariance by explicit double loops, eigenvalues from characteristic
polynomial roots, determinants by cofactor expansion, filter responses from
the analog prototype, spectra straight from the FFT.
"""

import numpy as np


def covariance_loops(centered):
    """Naive O(n p^2) summation definition of the sample covariance."""
    x = np.asarray(centered, dtype=float)
    n, p = x.shape
    out = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            acc = 0.0
            for t in range(n):
                acc += x[t, i] * x[t, j]
            out[i, j] = acc / (n - 1)
    return out


def det_cofactor(m):
    """Determinant by recursive cofactor expansion (p <= 4 in practice)."""
    m = np.asarray(m, dtype=float)
    k = m.shape[0]
    if k == 1:
        return float(m[0, 0])
    total = 0.0
    for j in range(k):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += ((-1.0) ** j) * m[0, j] * det_cofactor(minor)
    return total


def charpoly_eigenvalues(m):
    """Eigenvalues as roots of det(m - lambda I), built by cofactor expansion.

    Polynomial coefficients are recovered by evaluating the determinant at
    k+1 sample points and solving the Vandermonde system; roots come from
    numpy's companion-matrix solver. Nothing here touches the Jacobi path.
    """
    m = np.asarray(m, dtype=float)
    k = m.shape[0]
    # char poly has degree k; sample at k+1 points scaled to the matrix size
    scale = max(1.0, np.abs(m).max())
    points = np.linspace(-2.0 * scale * k, 2.0 * scale * k, k + 1)
    values = [det_cofactor(m - lam * np.eye(k)) for lam in points]
    coeffs = np.polyfit(points, values, k)
    roots = np.roots(coeffs)
    return np.sort_complex(roots).real[::-1]


def analog_lp2_response(freqs_hz, cutoff_hz, sample_rate_hz):
    """|H| of the prototype 1/(s^2 + sqrt(2) s + 1) through the prewarped bilinear map."""
    k = np.tan(np.pi * cutoff_hz / sample_rate_hz)
    z = np.exp(2j * np.pi * np.asarray(freqs_hz, dtype=float) / sample_rate_hz)
    s = (z - 1.0) / (z + 1.0) / k
    return np.abs(1.0 / (s * s + np.sqrt(2.0) * s + 1.0))


def periodogram(x, rate_hz):
    """(freqs, power) straight from the FFT of the raw samples."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    freqs = np.fft.rfftfreq(n, d=1.0 / rate_hz)
    power = np.abs(np.fft.rfft(x, axis=0)) ** 2 / n
    return freqs, power


def peak_frequency(x, rate_hz):
    """Frequency of the largest non-DC periodogram bin of a 1-D signal."""
    freqs, power = periodogram(np.asarray(x, dtype=float).reshape(-1, 1), rate_hz)
    idx = 1 + int(np.argmax(power[1:, 0]))
    return float(freqs[idx])


def amari_loops(p):
    """Hand transcription of the Amari index formula with explicit loops."""
    p = np.abs(np.asarray(p, dtype=float))
    k = p.shape[0]
    total = 0.0
    for i in range(k):
        row = sum(p[i, j] for j in range(k))
        total += row / max(p[i, j] for j in range(k)) - 1.0
    for j in range(k):
        col = sum(p[i, j] for i in range(k))
        total += col / max(p[i, j] for i in range(k)) - 1.0
    return total / (2.0 * k)


def gauss_logcosh_mean(order=128):
    """E[log cosh X], X ~ N(0,1), by Gauss-Hermite quadrature."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    return float(np.sum(weights * np.log(np.cosh(nodes))) / np.sqrt(2.0 * np.pi))
