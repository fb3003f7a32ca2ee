"""Closed-form limit profiles of the odometer and the cluster time scale.

The bulk odometer limit: u_n(z)/n^2 converges, for 0 < |z| < 1, to

    f(r) = r^2 - 1 - 2 ln r                      (d = 2)
    f(r) = r^2 + 2/((d-2) r^(d-2)) - d/(d-2)     (d >= 3),   r = |z|.

Both arise as radial integrals of the stopped-Green asymptotics,

    f(r) = int_r^1 4 t ln(t/r) dt                          (d = 2)
    f(r) = int_r^1 (2d/(d-2)) (t^(d-1) r^(2-d) - t) dt     (d >= 3),

and ``limit_integral_check`` verifies the evaluation against quadrature.
Summing the profile over the cluster gives the total construction time:
sum of all walkers' steps ~ n^(d+2) * d omega_d / (d+2), because
d omega_d int_0^1 x^(d-1) f(x) dx = d omega_d / (d+2).

Near the origin the bulk profile diverges and a different scaling takes
over (``near_origin_prediction``): at a fixed site a (d >= 3) the odometer
grows like omega_d n^d G(0, a); along |y_n| -> infinity with |y_n|/n -> 0
it is n^2 4 ln(n/|y_n|) in d = 2 and n^2 (2/(d-2)) (|y_n|/n)^(2-d) for
d >= 3.
"""

import math

from scipy.integrate import quad

from .green import free_green
from .lattice import ball_volume


def limit_f(r: float, d: int) -> float:
    """Bulk odometer limit profile at radius r in (0, 1)."""
    if not 0.0 < r < 1.0:
        raise ValueError(f"r={r} outside the open interval (0, 1)")
    if d < 2:
        raise ValueError("need d >= 2")
    if d == 2:
        return r * r - 1.0 - 2.0 * math.log(r)
    return r * r + 2.0 / ((d - 2) * r ** (d - 2)) - d / (d - 2.0)


def limit_integrand(t: float, r: float, d: int) -> float:
    """Radial integrand whose integral over [r, 1] is limit_f(r, d)."""
    if d == 2:
        return 4.0 * t * math.log(t / r)
    return (2.0 * d / (d - 2)) * (t ** (d - 1) * r ** (2 - d) - t)


def limit_integral_check(r: float, d: int):
    """(quadrature value, closed form, difference) of the profile integral."""
    closed = limit_f(r, d)
    value, _err = quad(limit_integrand, r, 1.0, args=(r, d), epsabs=1e-12, epsrel=1e-12)
    return value, closed, value - closed


def near_origin_prediction(n: int, d: int, a=None, y_norm: float | None = None,
                           green_mode: str = "exact") -> float:
    """Predicted odometer value in the near-origin regime.

    Exactly one of ``a`` (fixed lattice site; d >= 3) and ``y_norm``
    (norm of a slowly growing site sequence) must be given.
    """
    if (a is None) == (y_norm is None):
        raise ValueError("give exactly one of a (fixed site) or y_norm (growing)")
    if a is not None:
        if d < 3:
            raise ValueError("fixed-site prediction needs d >= 3 (free Green's function)")
        return ball_volume(d) * float(n) ** d * free_green(a, d, mode=green_mode)
    if y_norm <= 0:
        raise ValueError("y_norm must be positive")
    if d == 2:
        return float(n) ** 2 * 4.0 * math.log(n / y_norm)
    return float(n) ** 2 * (2.0 / (d - 2)) * (y_norm / n) ** (2 - d)


def timescale_constant(d: int) -> float:
    """Limit of (total steps)/n^(d+2): d omega_d / (d + 2)."""
    if d < 2:
        raise ValueError("need d >= 2")
    return d * ball_volume(d) / (d + 2)


def timescale_integral(d: int) -> float:
    """Quadrature of d omega_d int_0^1 x^(d-1) f(x) dx (equals the constant)."""
    value, _err = quad(lambda x: x ** (d - 1) * limit_f(x, d), 0.0, 1.0,
                       epsabs=1e-10, epsrel=1e-10, limit=200)
    return d * ball_volume(d) * value
