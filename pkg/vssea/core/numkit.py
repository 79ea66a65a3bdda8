"""Dense small-matrix numerics for synthesis and simulation.

Everything here is a pure function over numpy arrays, sized for the
four-state actuator model and the twelve-state observer (n <= 12), so the
Lyapunov solver uses the Kronecker-sum linear system directly and the
Riccati solver is Newton-Kleinman over repeated Lyapunov solves. Stability
verdicts come from the Routh array rather than an eigensolver.
"""
from __future__ import annotations

import logging
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from vssea.core.config import (
    CARE_MAX_ITERATIONS,
    CARE_RESIDUAL_TOL,
    LYAPUNOV_RESIDUAL_TOL,
    RANK_TOLERANCE,
    ROUTH_EPSILON,
)

logger = logging.getLogger(__name__)

Matrix = np.ndarray


class DimensionError(ValueError):
    pass


class SynthesisError(Exception):
    pass


class IntegrationError(ArithmeticError):
    pass


def as_matrix(value, name: str = "matrix") -> Matrix:
    """Coerce to a finite 2-D float array."""
    m = np.atleast_2d(np.asarray(value, dtype=float))
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _require_square(m: Matrix, name: str) -> int:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m.shape[0]


# -- Controllability --


def controllability_matrix(A, B) -> Matrix:
    """[B, AB, A^2 B, ..., A^(n-1) B]."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    n = _require_square(A, "A")
    if B.shape[0] != n:
        raise DimensionError(f"B has {B.shape[0]} rows, A is {n}x{n}")
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def numerical_rank(M, tol: float = RANK_TOLERANCE) -> int:
    """Rank of M after scaling by its max-norm; singular values <= tol count as zero."""
    M = as_matrix(M)
    scale = np.max(np.abs(M))
    if scale == 0.0:
        return 0
    s = np.linalg.svd(M / scale, compute_uv=False)
    return int(np.sum(s > tol))


def controllability_rank(A, B) -> int:
    return numerical_rank(controllability_matrix(A, B))


# -- Lyapunov --


def lyapunov_residual(A_cl, P, Q) -> float:
    """Frobenius norm of A^T P + P A + Q."""
    return float(np.linalg.norm(A_cl.T @ P + P @ A_cl + Q))


def solve_lyapunov(A_cl, Q, check: bool = True) -> Matrix:
    """Solve A_cl^T P + P A_cl = -Q through the vectorized Kronecker system.

    One step of iterative refinement is applied to the linear solve. With
    `check` the residual must come within LYAPUNOV_RESIDUAL_TOL * ||Q||.
    """
    A_cl = as_matrix(A_cl, "A_cl")
    Q = as_matrix(Q, "Q")
    n = _require_square(A_cl, "A_cl")
    if Q.shape != (n, n):
        raise DimensionError(f"Q must be {n}x{n}, got {Q.shape}")

    eye = np.eye(n)
    # row-major vec: vec(A^T P) = (A^T kron I) vec(P), vec(P A) = (I kron A^T) vec(P)
    M = np.kron(A_cl.T, eye) + np.kron(eye, A_cl.T)
    rhs = -Q.reshape(-1)
    try:
        p = np.linalg.solve(M, rhs)
        p = p + np.linalg.solve(M, rhs - M @ p)
    except np.linalg.LinAlgError as e:
        raise SynthesisError(f"Lyapunov system is singular: {e}") from e

    P = p.reshape(n, n)
    P = 0.5 * (P + P.T)
    if check:
        residual = lyapunov_residual(A_cl, P, Q)
        bound = LYAPUNOV_RESIDUAL_TOL * max(float(np.linalg.norm(Q)), 1e-300)
        if not np.isfinite(residual) or residual > bound:
            raise SynthesisError(
                f"Lyapunov residual {residual:.3e} exceeds {bound:.3e} "
                "(closed loop not Hurwitz?)"
            )
    return P


def is_positive_definite(P) -> bool:
    """Cholesky test on the symmetric part."""
    P = as_matrix(P)
    try:
        np.linalg.cholesky(0.5 * (P + P.T))
    except np.linalg.LinAlgError:
        return False
    return True


# -- Polynomials and Routh-Hurwitz --


def _descending(p: Polynomial) -> np.ndarray:
    coef = np.asarray(p.coef, dtype=float)
    if coef.size < 2:
        raise ValueError("polynomial degree must be at least 1")
    if coef[-1] == 0.0:
        raise ValueError("leading coefficient is zero")
    desc = coef[::-1]
    return desc / desc[0]


def routh_array(p: Polynomial, epsilon: float = ROUTH_EPSILON) -> list[np.ndarray]:
    """Routh array rows, leading coefficient normalized to +1.

    A zero first entry in a nonzero row is replaced by `epsilon`; an all-zero
    row is replaced by the derivative of the auxiliary polynomial above it.
    """
    a = _descending(p)
    n = a.size - 1
    width = n // 2 + 1
    rows = [np.zeros(width), np.zeros(width)]
    rows[0][: a[0::2].size] = a[0::2]
    rows[1][: a[1::2].size] = a[1::2]
    for i in range(2, n + 1):
        prev, above = rows[i - 1], rows[i - 2]
        if np.all(prev == 0.0):
            # auxiliary polynomial from row i-2, degree n-(i-2)
            deg = n - (i - 2)
            powers = deg - 2 * np.arange(width)
            prev = np.where(powers > 0, above * powers, 0.0)
            rows[i - 1] = prev
        if prev[0] == 0.0:
            prev = prev.copy()
            prev[0] = epsilon
            rows[i - 1] = prev
        row = np.zeros(width)
        for j in range(width - 1):
            row[j] = (prev[0] * above[j + 1] - above[0] * prev[j + 1]) / prev[0]
        rows.append(row)
    return rows


def rhp_root_count(p: Polynomial) -> int:
    """Sign changes in the first Routh column (roots with positive real part)."""
    column = np.array([row[0] for row in routh_array(p)])
    signs = np.sign(column)
    return int(np.sum(signs[1:] * signs[:-1] < 0))


def routh_hurwitz(p: Polynomial) -> bool:
    """True iff every root of p has strictly negative real part.

    Roots on the imaginary axis report False.
    """
    a = _descending(p)
    if np.any(a <= 0.0):
        return False
    n = a.size - 1
    width = n // 2 + 1
    above = np.zeros(width)
    prev = np.zeros(width)
    above[: a[0::2].size] = a[0::2]
    prev[: a[1::2].size] = a[1::2]
    for _ in range(2, n + 1):
        if prev[0] <= 0.0:
            return False
        row = np.zeros(width)
        for j in range(width - 1):
            row[j] = (prev[0] * above[j + 1] - above[0] * prev[j + 1]) / prev[0]
        above, prev = prev, row
    return bool(prev[0] > 0.0)


def characteristic_polynomial(A) -> Polynomial:
    """det(sI - A) by the Faddeev-LeVerrier recursion; no eigenvalues involved."""
    A = as_matrix(A, "A")
    _require_square(A, "A")
    n = A.shape[0]
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    identity = np.eye(n)
    M = np.zeros_like(A)
    for k in range(1, n + 1):
        M = A @ M + coef[n - k + 1] * identity
        coef[n - k] = -float(np.trace(A @ M)) / k
    return Polynomial(coef)


def is_hurwitz(A) -> bool:
    """Hurwitz test of a square matrix via its characteristic polynomial."""
    return routh_hurwitz(characteristic_polynomial(A))


# -- Pole placement --


def _check_poles(poles: Sequence[complex]) -> np.ndarray:
    p = np.asarray(poles, dtype=complex)
    if np.any(p.real >= 0.0):
        raise SynthesisError(f"requested poles must have negative real parts: {list(p)}")
    scale = max(1.0, float(np.max(np.abs(p))))
    remaining = list(p)
    while remaining:
        z = remaining.pop()
        if abs(z.imag) <= 1e-12 * scale:
            continue
        match = [i for i, w in enumerate(remaining) if abs(w - np.conj(z)) <= 1e-9 * scale]
        if not match:
            raise SynthesisError(f"pole {z} has no conjugate partner")
        remaining.pop(match[0])
    return p


def monic_from_roots(roots: Sequence[complex]) -> np.ndarray:
    """Descending real coefficients of prod(s - r) for conjugate-closed roots."""
    return np.real(np.poly(np.asarray(roots, dtype=complex)))


def pole_place_chain(poles: Sequence[complex]) -> np.ndarray:
    """Gain K = [k1..k4] placing the integrator chain's poles.

    The closed loop of the shift matrix with input [0,0,0,1] has
    characteristic polynomial s^4 + k4 s^3 + k3 s^2 + k2 s + k1.
    """
    if len(poles) != 4:
        raise SynthesisError(f"integrator chain needs 4 poles, got {len(poles)}")
    p = _check_poles(poles)
    coeffs = monic_from_roots(p)  # [1, c1, c2, c3, c4]
    return coeffs[1:][::-1].copy()


def chain_polynomial(K) -> Polynomial:
    """Closed-loop characteristic polynomial of the gain-K integrator chain."""
    K = np.asarray(K, dtype=float).reshape(-1)
    return Polynomial(np.concatenate([K, [1.0]]))


def place_poles_siso(A, B, poles: Sequence[complex]) -> np.ndarray:
    """Ackermann's formula: row gain K with eig(A - B K) = poles."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    n = _require_square(A, "A")
    if B.shape != (n, 1):
        raise DimensionError(f"single-input placement needs B of shape ({n}, 1), got {B.shape}")
    if len(poles) != n:
        raise SynthesisError(f"need {n} poles, got {len(poles)}")
    p = _check_poles(poles)
    C = controllability_matrix(A, B)
    if numerical_rank(C) < n:
        raise SynthesisError("pair (A, B) is not controllable")
    coeffs = monic_from_roots(p)
    phi = np.zeros_like(A)
    for c in coeffs:
        phi = phi @ A + c * np.eye(n)
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    y = np.linalg.solve(C.T, e_n)
    return (y @ phi).reshape(1, n)


# -- Riccati --


class CareSolution(NamedTuple):
    P: Matrix
    K: Matrix
    iterations: int
    residual: float


def care_residual(A, B, Q, R, P) -> float:
    """Frobenius norm of A^T P + P A - P B R^-1 B^T P + Q."""
    BtP = B.T @ P
    return float(np.linalg.norm(A.T @ P + P @ A - BtP.T @ np.linalg.solve(R, BtP) + Q))


def stabilizing_seed(A, B) -> Matrix:
    """A gain K0 with A - B K0 Hurwitz.

    Single-input pairs use pole placement; multi-input pairs use Bass's
    shifted controllability Gramian.
    """
    n = A.shape[0]
    alpha = 1.0 + float(np.linalg.norm(A))
    if B.shape[1] == 1:
        poles = [-alpha * (1.0 + 0.25 * i) for i in range(n)]
        return place_poles_siso(A, B, poles)
    shifted = -(A + alpha * np.eye(n)).T
    W = solve_lyapunov(shifted, 2.0 * B @ B.T, check=False)
    try:
        return B.T @ np.linalg.inv(W)
    except np.linalg.LinAlgError as e:
        raise SynthesisError("pair (A, B) is not stabilizable from the Gramian seed") from e


def newton_kleinman(A, B, Q, R, K0=None, max_iterations: int = CARE_MAX_ITERATIONS) -> CareSolution:
    """Newton-Kleinman iteration for the continuous algebraic Riccati equation."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    Q = as_matrix(Q, "Q")
    R = as_matrix(R, "R")
    n = _require_square(A, "A")
    m = B.shape[1]
    if B.shape[0] != n or Q.shape != (n, n) or R.shape != (m, m):
        raise DimensionError(
            f"incompatible CARE shapes A{A.shape} B{B.shape} Q{Q.shape} R{R.shape}"
        )

    K = stabilizing_seed(A, B) if K0 is None else as_matrix(K0, "K0")
    if not is_hurwitz(A - B @ K):
        raise SynthesisError("seed gain does not stabilize (A, B); pair not stabilizable")

    P_prev = None
    residual = float("inf")
    scale = 1.0
    for iteration in range(1, max_iterations + 1):
        A_k = A - B @ K
        P = solve_lyapunov(A_k, Q + K.T @ R @ K, check=False)
        K = np.linalg.solve(R, B.T @ P)
        residual = care_residual(A, B, Q, R, P)
        scale = 1.0 + float(np.linalg.norm(P))
        logger.debug(f"newton-kleinman iteration {iteration} residual {residual:.3e}")
        # quadratic convergence: stop once well inside tolerance or stalled inside it
        if residual <= 1e-2 * CARE_RESIDUAL_TOL * scale:
            return CareSolution(P, K, iteration, residual)
        stalled = P_prev is not None and float(np.linalg.norm(P - P_prev)) <= 1e-12 * scale
        if stalled and residual <= CARE_RESIDUAL_TOL * scale:
            return CareSolution(P, K, iteration, residual)
        P_prev = P

    if residual <= CARE_RESIDUAL_TOL * scale:
        return CareSolution(P, K, max_iterations, residual)
    raise SynthesisError(
        f"Newton-Kleinman did not converge in {max_iterations} iterations "
        f"(residual {residual:.3e})"
    )


def solve_care(A, B, Q, R) -> tuple[Matrix, Matrix]:
    """Stabilizing CARE solution P and LQR gain K = R^-1 B^T P."""
    sol = newton_kleinman(A, B, Q, R)
    if not is_hurwitz(as_matrix(A) - as_matrix(B) @ sol.K):
        raise SynthesisError("Riccati gain does not stabilize the closed loop")
    return sol.P, sol.K


# -- Integration --


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, x: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of x' = f(t, x)."""
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    k1 = _finite(f(t, x), t, "k1")
    k2 = _finite(f(t + 0.5 * h, x + 0.5 * h * k1), t, "k2")
    k3 = _finite(f(t + 0.5 * h, x + 0.5 * h * k2), t, "k3")
    k4 = _finite(f(t + h, x + h * k3), t, "k4")
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _finite(dx, t: float, stage: str) -> np.ndarray:
    dx = np.asarray(dx, dtype=float)
    if not np.all(np.isfinite(dx)):
        bad = np.flatnonzero(~np.isfinite(dx)).tolist()
        raise IntegrationError(f"non-finite derivative at t={t:.6g} stage {stage}, components {bad}")
    return dx
