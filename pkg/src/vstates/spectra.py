"""Closed-form bifurcation spectrum around circles and annuli in the unit disc.

All formulas are in the parameter lambda = 1 - 2 Omega.  Simply-connected
circles of radius b carry one eigenvalue per mode,

    lambda_m = (1 - b^{2m}) / m,    Omega_m = (m - 1 + b^{2m}) / (2m).

Annuli with radii b2 < b1 carry a 2x2 matrix family M_n(lambda) whose
determinant is b1 b2 n^2 P_n(lambda); real eigenvalues lambda_n^± exist iff
the reduced discriminant Delta_n is nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NoRealEigenvalueError


def omega_from_lambda(lam: float) -> float:
    """Angular velocity Omega = (1 - lambda) / 2."""
    return 0.5 * (1.0 - lam)


def _check_radii(b1: float, b2: float, allow_zero_inner: bool = False) -> None:
    lo_ok = (b2 >= 0.0) if allow_zero_inner else (b2 > 0.0)
    if not (lo_ok and b2 < b1 < 1.0):
        raise ConfigurationError(f"radii must satisfy 0 < b2 < b1 < 1, got b1={b1}, b2={b2}")


def sc_eigen(m: int, b: float) -> tuple[float, float]:
    """(lambda_m, Omega_m) of the circle of radius b; lambda_m = 1 - 2 Omega_m."""
    if m < 1:
        raise ConfigurationError(f"mode must be >= 1, got {m}")
    if not 0.0 < b < 1.0:
        raise ConfigurationError(f"radius must lie in (0,1), got {b}")
    lam = (1.0 - b ** (2 * m)) / m
    return lam, omega_from_lambda(lam)


def dc_matrix(n: int, lam: float, b1: float, b2: float) -> np.ndarray:
    """2x2 linearization matrix M_n(lambda) around the annulus."""
    if n < 1:
        raise ConfigurationError(f"mode must be >= 1, got {n}")
    _check_radii(b1, b2)
    b = b2 / b1
    off = b ** n - (b1 * b2) ** n
    return np.array([
        [b1 * (n * lam - 1.0 + b1 ** (2 * n) - n * b * b), b2 * off],
        [-b1 * off, b2 * (n * lam - n + 1.0 - b2 ** (2 * n))],
    ])


def pn_coefficients(n: int, b1: float, b2: float) -> tuple[float, float]:
    """(B, C) of the monic quadratic P_n(lambda) = lambda^2 - B lambda + C."""
    b = b2 / b1
    b1n, b2n, bn = b1 ** (2 * n), b2 ** (2 * n), b ** (2 * n)
    lin = 1.0 + b * b - (b1n - b2n) / n
    const = (b * b - (1.0 - bn) / n**2 + (1.0 - b * b) / n
             - (b1n - b2n * b * b) / n + (b1n - b2n) / n**2)
    return lin, const


def pn_eval(n: int, lam: float, b1: float, b2: float) -> float:
    lin, const = pn_coefficients(n, b1, b2)
    return (lam - lin) * lam + const


@dataclass(frozen=True)
class DcSpectrum:
    """Mode-n eigen-data of the annulus; lambdas absent when Delta_n < 0."""

    n: int
    b1: float
    b2: float
    delta: float
    lambda_plus: float | None
    lambda_minus: float | None
    omega_plus: float | None
    omega_minus: float | None


def dc_spectrum(n: int, b1: float, b2: float) -> DcSpectrum:
    """Discriminant, eigenvalues lambda_n^± and velocities Omega_n^± = (1 - lambda_n^∓)/2.

    The discriminant is evaluated in the factored form (A - B)(A + B) with
    A the half-difference term and B = b^n (1 - b1^{2n}) / n, avoiding the
    catastrophic cancellation of the squared form at large n.
    """
    if n < 1:
        raise ConfigurationError(f"mode must be >= 1, got {n}")
    _check_radii(b1, b2, allow_zero_inner=True)
    b = b2 / b1
    b1n, b2n = b1 ** (2 * n), b2 ** (2 * n)
    half_diff = 0.5 * (1.0 - b * b) - (2.0 - b1n - b2n) / (2 * n)
    coupling = b ** n * (1.0 - b1n) / n
    delta = (half_diff - coupling) * (half_diff + coupling)
    if delta < 0.0:
        return DcSpectrum(n, b1, b2, delta, None, None, None, None)
    center = 0.5 * (1.0 + b * b) - (b1n - b2n) / (2 * n)
    root = math.sqrt(delta)
    lam_plus, lam_minus = center + root, center - root
    return DcSpectrum(n, b1, b2, delta, lam_plus, lam_minus,
                      omega_plus=omega_from_lambda(lam_minus),
                      omega_minus=omega_from_lambda(lam_plus))


def onefold_eigen(b1: float, b2: float) -> tuple[float, float, float]:
    """(lambda_1^-, lambda_1^+, Omega_1) with Omega_1 = (b1^2 - b2^2)/2 = (1 - lambda_1^+)/2."""
    _check_radii(b1, b2)
    lam_minus = (b2 / b1) ** 2
    lam_plus = 1.0 + b2 * b2 - b1 * b1
    return lam_minus, lam_plus, omega_from_lambda(lam_plus)


def _fold_function(m: int, b1: float, x: float) -> float:
    """h(x) = m(1-(x/b1)^2) - 2 - 2(x/b1)^m + (b1^m + x^m)^2, strictly decreasing."""
    t = x / b1
    return m * (1.0 - t * t) - 2.0 - 2.0 * t ** m + (b1 ** m + x ** m) ** 2


def b_star(m: int, b1: float, tol: float = 1e-12) -> float:
    """Fold radius: the unique root of h in (0, b1), by bisection.

    h(0) = m - 2 + b1^{2m} > 0 and h(b1) = 4(b1^{2m} - 1) < 0 bracket the
    root; bisection runs until the bracket width and |h| both reach tol
    (or the bracket hits floating-point resolution).
    """
    if m < 2:
        raise ConfigurationError(f"mode must be >= 2, got {m}")
    if not 0.0 < b1 < 1.0:
        raise ConfigurationError(f"outer radius must lie in (0,1), got {b1}")
    lo, hi = 0.0, b1
    mid = 0.5 * b1
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        val = _fold_function(m, b1, mid)
        if val > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol and abs(val) <= tol:
            break
        if hi - lo <= np.spacing(hi):
            break
    return mid


def onefold_intersections(b1: float, n_max: int) -> list[tuple[int, float]]:
    """Inner radii x_n where the 1-fold eigenvalue collides with mode n.

    For each n in 2..n_max with n >= 1/b1^2 there is exactly one root
    x_n in (0, b_n_star] of P_n(1 + x^2 - b1^2) = 0, increasing in n.
    Modes with n < 1/b1^2 never intersect and are omitted.
    """
    if n_max < 2:
        raise ConfigurationError(f"n_max must be >= 2, got {n_max}")
    out: list[tuple[int, float]] = []
    for n in range(2, n_max + 1):
        if n < 1.0 / (b1 * b1):
            continue
        hi = b_star(n, b1)

        def phi(x: float) -> float:
            return pn_eval(n, 1.0 + x * x - b1 * b1, b1, x)

        lo = 0.0
        flo, fhi = phi(lo), phi(hi)
        if flo > 0.0:
            # only possible through rounding at the threshold n ~ 1/b1^2
            out.append((n, 0.0))
            continue
        if fhi < 0.0:
            out.append((n, hi))
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if phi(mid) <= 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13:
                break
        out.append((n, 0.5 * (lo + hi)))
    return out


@dataclass(frozen=True)
class KernelVector:
    """Null direction of M_m(lambda_m^±), unit length, first nonzero component > 0."""

    components: tuple[float, float]
    mode: int


def kernel_vector(m: int, branch: str, b1: float, b2: float) -> KernelVector:
    """Kernel of the mode-m matrix at the chosen eigenvalue branch."""
    if branch not in ("plus", "minus"):
        raise ConfigurationError(f"branch must be 'plus' or 'minus', got {branch!r}")
    spec = dc_spectrum(m, b1, b2)
    if spec.delta < 0.0:
        raise NoRealEigenvalueError(
            f"mode {m} has no real eigenvalues at b1={b1}, b2={b2} (Delta={spec.delta:.3e})")
    lam = spec.lambda_plus if branch == "plus" else spec.lambda_minus
    b = b2 / b1
    v = np.array([
        b2 * (m * lam - m + 1.0 - b2 ** (2 * m)),
        b1 * (b ** m - (b1 * b2) ** m),
    ])
    v /= np.linalg.norm(v)
    first = v[0] if v[0] != 0.0 else v[1]
    if first < 0.0:
        v = -v
    return KernelVector(components=(float(v[0]), float(v[1])), mode=m)


def transversality_ok(m: int, b1: float, b2: float) -> bool:
    """Crossing condition m > (2 + 2 b^m - (b1^m + b2^m)^2)/(1 - b^2); iff Delta_m > 0."""
    if m < 2:
        raise ConfigurationError(f"mode must be >= 2, got {m}")
    _check_radii(b1, b2)
    b = b2 / b1
    return m > (2.0 + 2.0 * b ** m - (b1 ** m + b2 ** m) ** 2) / (1.0 - b * b)


# ---------------------------------------------------------------------------
# Table samplers backing the CLI eigen commands.

def sc_eigen_rows(modes, radii):
    """Rows (m, b, lambda_m, omega_m)."""
    return [(m, b, *sc_eigen(m, b)) for m in modes for b in radii]


def dc_eigen_rows(modes, b1, points_per_mode: int = 200):
    """Rows (m, b2, lambda_minus, lambda_plus) over b2 in [0, b_m_star]."""
    rows = []
    for m in modes:
        if m < 2:
            raise ConfigurationError("doubly-connected eigenvalue curves need m >= 2")
        top = b_star(m, b1)
        for b2 in np.linspace(0.0, top, points_per_mode):
            spec = dc_spectrum(m, b1, float(b2))
            if spec.lambda_minus is None:
                continue
            rows.append((m, float(b2), spec.lambda_minus, spec.lambda_plus))
    return rows


def bstar_rows(modes, outer_radii):
    """Rows (m, b1, b_m_star)."""
    return [(m, b1, b_star(m, b1)) for m in modes for b1 in outer_radii]


def onefold_rows(b1, points: int = 200):
    """Rows (b2, lambda_minus, lambda_plus, omega_1) over b2 in (0, b1)."""
    rows = []
    for b2 in np.linspace(0.0, b1, points + 1)[1:-1]:
        lam_minus, lam_plus, omega1 = onefold_eigen(b1, float(b2))
        rows.append((float(b2), lam_minus, lam_plus, omega1))
    return rows
