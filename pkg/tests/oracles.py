"""Independent numerical references used by the statistics tests.

Everything here is deliberately built from first principles (stdlib math
plus explicit formulas) so the test suite can check the production code
against a second, unrelated route.
"""

import math


def t_pdf(x: float, dof: float) -> float:
    """Student-t density with real-valued degrees of freedom."""
    log_norm = (
        math.lgamma((dof + 1.0) / 2.0)
        - math.lgamma(dof / 2.0)
        - 0.5 * math.log(dof * math.pi)
    )
    return math.exp(log_norm - (dof + 1.0) / 2.0 * math.log1p(x * x / dof))


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _adaptive_simpson(
        f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1
    ) + _adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)


def integrate(f, a: float, b: float, tol: float = 1e-13) -> float:
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 60)


def t_upper_tail(t: float, dof: float) -> float:
    """P(T > t) by quadrature.

    Substituting x = sqrt(dof) * tan(theta) maps the infinite tail onto
    the finite interval [atan(t / sqrt(dof)), pi/2] and reduces the
    integrand to a bounded, smooth c * cos(theta)^(dof - 1), so the
    quadrature stays accurate even for extreme t where the power-law
    tail would otherwise hide from the sample points.
    """
    log_norm = (
        math.lgamma((dof + 1.0) / 2.0)
        - math.lgamma(dof / 2.0)
        - 0.5 * math.log(dof * math.pi)
    )
    c = math.exp(log_norm) * math.sqrt(dof)
    theta0 = math.atan(t / math.sqrt(dof))

    def g(theta: float) -> float:
        return c * math.cos(theta) ** (dof - 1.0)

    return integrate(g, theta0, 0.5 * math.pi)


def welch_reference(x, y) -> tuple:
    """Welch statistic, Welch-Satterthwaite dof, and two-tailed p,
    all written out longhand."""
    nx, ny = len(x), len(y)
    mx = sum(x) / nx
    my = sum(y) / ny
    vx = sum((v - mx) ** 2 for v in x) / (nx - 1)
    vy = sum((v - my) ** 2 for v in y) / (ny - 1)
    if vx == 0.0 and vy == 0.0:
        return 0.0, 0.0, (1.0 if mx == my else 0.0)
    se2 = vx / nx + vy / ny
    t = (mx - my) / math.sqrt(se2)
    dof = se2 * se2 / (
        (vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1)
    )
    p = 2.0 * t_upper_tail(abs(t), dof)
    return t, dof, min(p, 1.0)
