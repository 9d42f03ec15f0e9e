"""Reference values computed independently of the package's numerics."""
import mpmath

mpmath.mp.dps = 30


def airy_zeros(count):
    """Magnitudes of the first ``count`` zeros of Ai, by scanning and bisection in mpmath."""
    zeros, x, step = [], mpmath.mpf(0), mpmath.mpf("0.05")
    prev = mpmath.airyai(-x)
    while len(zeros) < count:
        x_next = x + step
        cur = mpmath.airyai(-x_next)
        if mpmath.sign(cur) != mpmath.sign(prev):
            lo, hi = x, x_next
            for _ in range(100):
                mid = (lo + hi) / 2
                if mpmath.sign(mpmath.airyai(-mid)) == mpmath.sign(mpmath.airyai(-lo)):
                    lo = mid
                else:
                    hi = mid
            zeros.append(float((lo + hi) / 2))
        x, prev = x_next, cur
    return zeros


def bouncer_energy(n, hbar, m, g):
    """Continuum bouncer level: (hbar^2 m g^2 / 2)^(1/3) a_n."""
    scale = mpmath.cbrt(mpmath.mpf(hbar) ** 2 * m * mpmath.mpf(g) ** 2 / 2)
    return float(scale * airy_zeros(n)[-1])


def bouncer_mean_height(n, hbar, m, g):
    """<x>_n = 2 E_n / (3 m g) for the continuum bouncer (virial theorem)."""
    return 2.0 * bouncer_energy(n, hbar, m, g) / (3.0 * m * g)


def free_gaussian_density(x, x0, sigma, p0, t, m_eff, hbar):
    """|psi(x, t)|^2 for a free Gaussian with kinetic term p^2 / (2 m_eff)."""
    s2 = sigma ** 2 * (1 + (hbar * t / (2 * m_eff * sigma ** 2)) ** 2)
    centre = x0 + p0 * t / m_eff
    return [float(mpmath.exp(-(xi - centre) ** 2 / (2 * s2)) / mpmath.sqrt(2 * mpmath.pi * s2))
            for xi in x]
