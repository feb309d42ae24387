"""
Moduli of tangency orbits in linearized saddle charts.

Transition maps are polynomials with rational coefficients, so the modulus
tau = d(eta)/dx at the tangency point and the contact order are computed
exactly with sympy; numpy evaluates the same polynomials for the
finite-difference self-check and for plot samples.
"""
import math
from fractions import Fraction
from typing import Literal, Optional, Sequence, Union

import numpy as np
import sympy as sp
from numpy.polynomial import polynomial as npoly

from schemes.mapspec import MapSpec, Polynomial, SaddleChart, TransitionMap
from schemes.models import FrozenModel, Rational, Real
from utils.errors import DegenerateModulus, EigenvalueError, FiniteDifferenceMismatch, NoFiniteOrder
from utils.logging import get_logger

logger = get_logger(__name__)

X, Y, T = sp.symbols("x y t")

Number = Union[int, float, Fraction]


def check_eigenvalues(mu: Number, lam: Number) -> None:
    if not (0 < abs(lam) < 1 < abs(mu)):
        raise EigenvalueError(f"0<|λ|<1<|μ| violated by lambda={lam}, mu={mu}")


def _rational(value: Number) -> sp.Rational:
    value = Fraction(value) if not isinstance(value, float) else Fraction(str(value))
    return sp.Rational(value.numerator, value.denominator)


def _fraction(value: sp.Expr) -> Fraction:
    r = sp.Rational(value)
    return Fraction(int(r.p), int(r.q))


def polynomial_expr(coeffs: Polynomial) -> sp.Expr:
    return sp.Add(*(
        _rational(c) * X**i * Y**j
        for i, row in enumerate(coeffs)
        for j, c in enumerate(row)
        if c
    ))


def coefficient_array(coeffs: Polynomial) -> np.ndarray:
    width = max(len(row) for row in coeffs)
    out = np.zeros((len(coeffs), width), dtype=float)
    for i, row in enumerate(coeffs):
        for j, c in enumerate(row):
            out[i, j] = float(c)
    return out


def evaluate_exact(coeffs: Polynomial, x: Fraction, y: Fraction) -> Fraction:
    return sum(
        (Fraction(c) * x**i * y**j for i, row in enumerate(coeffs) for j, c in enumerate(row)),
        Fraction(0),
    )


def evaluate(coeffs: Polynomial, x, y) -> np.ndarray:
    """Vectorised float evaluation; x and y broadcast like numpy arrays."""
    return npoly.polyval2d(np.asarray(x, dtype=float), np.asarray(y, dtype=float), coefficient_array(coeffs))


def apply_transition(g: TransitionMap, point: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    x, y = Fraction(point[0]), Fraction(point[1])
    return evaluate_exact(g.xi, x, y), evaluate_exact(g.eta, x, y)


def linear_saddle_apply(mu: Number, lam: Number, p: Sequence[Number], n: int) -> tuple[Number, Number]:
    """n steps of (x, y) -> (mu x, lam y); negative n iterates the inverse."""
    check_eigenvalues(mu, lam)
    return mu**n * p[0], lam**n * p[1]


def in_linear_domain(mu: Number, lam: Number, p: Sequence[Number], t: float = 1.0) -> bool:
    """
    Membership in {|x| |y|^e <= t} with e = -log_|lam| |mu| > 0.

    Points of the x-axis are members for every x: the factor |y|^e vanishes.
    """
    check_eigenvalues(mu, lam)
    if not 0 < t <= 1:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    x, y = float(p[0]), float(p[1])
    if y == 0:
        return True
    exponent = -math.log(abs(mu)) / math.log(abs(lam))
    return abs(x) * abs(y) ** exponent <= t


def modulus_exact(g: TransitionMap) -> Fraction:
    """d(eta)/dx at a^s, exactly."""
    ax, ay = (_rational(c) for c in g.a_s)
    return _fraction(sp.diff(polynomial_expr(g.eta), X).subs({X: ax, Y: ay}))


def _central_difference(coeffs: np.ndarray, ax: float, ay: float, h: float) -> float:
    xs = np.array([ax + h, ax - h])
    values = npoly.polyval2d(xs, np.full(2, ay), coeffs)
    return float((values[0] - values[1]) / (2 * h))


def richardson_derivative(coeffs: Polynomial, ax: float, ay: float, h: float) -> float:
    """Central differences in x with two levels of Richardson extrapolation."""
    c = coefficient_array(coeffs)
    d = [_central_difference(c, ax, ay, h / 2**level) for level in range(3)]
    r1_h = (4 * d[1] - d[0]) / 3
    r1_half = (4 * d[2] - d[1]) / 3
    return (16 * r1_half - r1_h) / 15


def tau_at_tangency(g: TransitionMap, fd_step: Optional[float] = None, fd_tol: float = 1e-6) -> float:
    """
    Modulus tau of the tangency carried by g.

    Args:
        g: Transition map whose eta is differentiated at a^s
        fd_step: Initial finite-difference step; default 1e-4 * (1 + |a_x|)
        fd_tol: Relative tolerance between the exact and numeric derivative

    Returns:
        tau as a float

    Raises:
        DegenerateModulus: tau is zero
        FiniteDifferenceMismatch: the numeric self-check disagrees
    """
    tau = modulus_exact(g)
    if tau == 0:
        raise DegenerateModulus(f"transition '{g.id}' has d(eta)/dx = 0 at a^s")
    ax, ay = float(g.a_s[0]), float(g.a_s[1])
    h = fd_step if fd_step is not None else 1e-4 * (1 + abs(ax))
    estimate = richardson_derivative(g.eta, ax, ay, h)
    if not math.isclose(estimate, float(tau), rel_tol=fd_tol, abs_tol=fd_tol * 1e-3):
        raise FiniteDifferenceMismatch(
            f"transition '{g.id}': exact tau {float(tau)!r} vs finite differences {estimate!r}"
        )
    return float(tau)


def tangency_order(g: TransitionMap) -> tuple[int, Fraction]:
    """
    Contact order n and leading coefficient Q of the stable-manifold image.

    The vertical line through a^s is carried by g to the curve
    t -> (xi, eta)(a_x, a_y + t); as a graph over the xi direction it reads
    q(x) = q(a_x^u) + Q (x - a_x^u)^n + ...
    """
    ax, ay = (_rational(c) for c in g.a_s)
    eta = polynomial_expr(g.eta)
    along = sp.expand(eta.subs({X: ax, Y: ay + T}) - eta.subs({X: ax, Y: ay}))
    if along == 0:
        raise NoFiniteOrder(f"transition '{g.id}': eta is constant along the stable direction")
    coeffs = sp.Poly(along, T).all_coeffs()[::-1]
    n = next(i for i, c in enumerate(coeffs) if c != 0)
    slope = sp.diff(polynomial_expr(g.xi), Y).subs({X: ax, Y: ay})
    if slope == 0:
        raise NoFiniteOrder(f"transition '{g.id}': d(xi)/dy vanishes, the image is not a graph")
    return n, _fraction(coeffs[n] / slope**n)


def classify_tangency(n: int) -> Literal["transverse", "one-sided", "crossing"]:
    if n <= 1:
        return "transverse"
    return "one-sided" if n % 2 == 0 else "crossing"


def tau_iterate(tau: float, lam: Number, mu: Number, k: int) -> float:
    check_eigenvalues(mu, lam)
    return abs(lam / mu) ** k * tau


def log_ratio(lam: Number, mu: Number) -> float:
    check_eigenvalues(mu, lam)
    return math.log(abs(lam)) / math.log(abs(mu))


def tau_pair_invariant(tau1: float, tau2: float, mu: Number) -> float:
    if tau1 == 0 or tau2 == 0:
        raise DegenerateModulus("tau values must be nonzero")
    if abs(mu) <= 1:
        raise EigenvalueError(f"|mu| must exceed 1, got {mu}")
    return abs(tau2 / tau1) ** (1 / math.log(abs(mu)))


def separatrix_map_stable(t: float, lam_src: Number, lam_dst: Number) -> float:
    for lam in (lam_src, lam_dst):
        if not 0 < abs(lam) < 1:
            raise EigenvalueError(f"|lambda| must lie in (0, 1), got {lam}")
    rho = math.log(abs(lam_dst)) / math.log(abs(lam_src))
    return math.copysign(abs(t) ** rho, t) if t else 0.0


def separatrix_map_unstable(t: float, mu_src: Number, mu_dst: Number, c: float = 1.0) -> float:
    for mu in (mu_src, mu_dst):
        if abs(mu) <= 1:
            raise EigenvalueError(f"|mu| must exceed 1, got {mu}")
    if c <= 0:
        raise ValueError(f"separatrix constant must be positive, got {c}")
    rho = math.log(abs(mu_dst)) / math.log(abs(mu_src))
    return math.copysign(c * abs(t) ** rho, t) if t else 0.0


def separatrix_constant(
    tau: Optional[float],
    tau_prime: Optional[float],
    rho: float,
    scale: float = 1.0,
    n: int = 0,
) -> float:
    """
    Constant of the unstable separatrix conjugacy carrying |tau| to
    |scale|^n |tau'|; 1 when the separatrix holds no tangency point.
    """
    if tau is None or tau_prime is None:
        return 1.0
    if tau == 0 or tau_prime == 0:
        raise DegenerateModulus("tau values must be nonzero")
    return abs(scale) ** n * abs(tau_prime) / abs(tau) ** rho


def separatrix_period(chart: SaddleChart) -> int:
    """Least power of f fixing every separatrix of the saddle."""
    flips = chart.lam < 0 or chart.mu < 0
    return chart.period * (2 if flips else 1)


def minimal_k_f(charts: Sequence[SaddleChart]) -> int:
    return math.lcm(*(separatrix_period(c) for c in charts)) if charts else 1


def _scale_polynomial(coeffs: Polynomial, outer: Fraction, sx: Fraction, sy: Fraction) -> Polynomial:
    return tuple(
        tuple(outer * Fraction(c) * sx**i * sy**j for j, c in enumerate(row))
        for i, row in enumerate(coeffs)
    )


def transport_transition(g: TransitionMap, source: SaddleChart, target: SaddleChart, k: int) -> TransitionMap:
    """
    Exact chart transport F_target^k . g . F_source^-k of a transition map,
    with the tangency point moved to F_source^k(a^s).
    """
    sx, sy = source.mu ** -k, source.lam ** -k
    return TransitionMap(
        id=f"{g.id}@{k}",
        source=g.source,
        target=g.target,
        xi=_scale_polynomial(g.xi, target.mu ** k, sx, sy),
        eta=_scale_polynomial(g.eta, target.lam ** k, sx, sy),
        a_s=(source.mu ** k * g.a_s[0], source.lam ** k * g.a_s[1]),
    )


class TangencyReport(FrozenModel):
    transition: str
    tau: Real
    order: int
    leading: Rational
    classification: Literal["transverse", "one-sided", "crossing"]
    claimed_one_sided: Optional[bool] = None
    claim_agrees: Optional[bool] = None
    image_point: tuple[Rational, Rational]
    image_point_agrees: Optional[bool] = None
    log_ratio: Real


def compute_mapspec(ms: MapSpec, fd_step: Optional[float] = None, fd_tol: float = 1e-6) -> list[TangencyReport]:
    """Moduli, contact orders and claim checks for every declared tangency."""
    reports = []
    for claim in ms.tangency_points:
        g = ms.transition(claim.transition)
        tau = tau_at_tangency(g, fd_step=fd_step, fd_tol=fd_tol)
        n, leading = tangency_order(g)
        kind = classify_tangency(n)
        image = apply_transition(g, g.a_s)
        claim_agrees = None
        if claim.one_sided is not None:
            claim_agrees = claim.one_sided == (kind == "one-sided")
        image_agrees = None
        if claim.point is not None:
            image_agrees = tuple(claim.point) == image
        # the modulus transports with lambda of the target and mu of the source
        ratio = log_ratio(ms.chart(g.target).lam, ms.chart(g.source).mu)
        reports.append(TangencyReport(
            transition=g.id,
            tau=tau,
            order=n,
            leading=leading,
            classification=kind,
            claimed_one_sided=claim.one_sided,
            claim_agrees=claim_agrees,
            image_point=image,
            image_point_agrees=image_agrees,
            log_ratio=ratio,
        ))
        logger.info(f"Transition {g.id}: tau={tau!r}, order {n} ({kind})")
    return reports
