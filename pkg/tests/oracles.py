"""Independent reference computations used by the tests."""

import mpmath


def normal_equations(X, y, digits=50):
    """Solve (X'X) b = X'y in extended precision; returns floats."""
    with mpmath.workdps(digits):
        A = mpmath.matrix([[mpmath.mpf(float(v)) for v in row] for row in X])
        b = mpmath.matrix([mpmath.mpf(float(v)) for v in y])
        beta = mpmath.lu_solve(A.T * A, A.T * b)
        return [float(beta[i]) for i in range(beta.rows)]


def analytic_r2(linear_predictors, sigma):
    """Expected R^2 of the true model on a sample: Var(lp) / (Var(lp) + sigma^2)."""
    n = len(linear_predictors)
    mean = sum(linear_predictors) / n
    var = sum((v - mean) ** 2 for v in linear_predictors) / n
    return var / (var + sigma ** 2)
