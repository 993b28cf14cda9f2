"""Hamiltonian catalog: power, Bellman and robust-control variants.

Each model evaluates H(x, p) and its momentum gradient D_pH(x, p) in closed
form, vectorized over batches of points.  Coefficient functions (b, f, g,
sigma) accept an (n, d) array of positions; plain numbers are promoted to
constant functions.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

Scalar = Callable[[np.ndarray], np.ndarray]


def _as_scalar_fn(value) -> Scalar:
    if callable(value):
        return value
    c = float(value)
    return lambda x: np.full(np.asarray(x).shape[0], c)


def _as_vector_fn(value, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    if callable(value):
        return value
    v = np.broadcast_to(np.atleast_1d(np.asarray(value, dtype=float)), (dim,))
    return lambda x: np.broadcast_to(v, (np.asarray(x).shape[0], dim))


class HamiltonianModel:
    """Base class: closed-form H and D_pH plus growth metadata.

    Attributes
    ----------
    alpha : float or None
        Declared quadratic-growth constant: |H| <= alpha (1 + |p|^2) and
        |D_pH| (1 + |p|) <= alpha (1 + |p|^2).
    lip_grad : float or None
        Declared global Lipschitz constant of p -> D_pH(x, p), if any.
    """

    alpha: float | None = None
    lip_grad: float | None = None

    def hamiltonian(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class PowerHamiltonian(HamiltonianModel):
    """H(x, p) = b(x) (c + |p|^2)^(beta/2)."""

    def __init__(self, b, c: float, beta: float, alpha: float | None = None):
        c = float(c)
        beta = float(beta)
        if c < 0:
            raise ValueError("c must be nonnegative")
        if c == 0 and beta < 2:
            raise ValueError("c = 0 requires beta >= 2 for a locally Lipschitz D_pH")
        self.b = _as_scalar_fn(b)
        self.c = c
        self.beta = beta
        self.alpha = alpha

    def hamiltonian(self, x, p):
        p = np.atleast_2d(p)
        q = self.c + np.sum(p * p, axis=-1)
        return self.b(x) * q ** (self.beta / 2.0)

    def grad_p(self, x, p):
        p = np.atleast_2d(p)
        q = self.c + np.sum(p * p, axis=-1)
        coef = self.b(x) * self.beta * q ** (self.beta / 2.0 - 1.0)
        return coef[:, None] * p


class BellmanHamiltonian(HamiltonianModel):
    """H(x, p) = -f(x).p + (gamma-1)/gamma |g(x)^T p|^(gamma/(gamma-1)).

    The control matrix g(x) is d x d; a scalar or constant matrix is
    promoted.  gamma must lie in (1, 2].
    """

    def __init__(self, f, g, gamma: float, dim: int, alpha: float | None = None):
        gamma = float(gamma)
        if not (1.0 < gamma <= 2.0):
            raise ValueError("gamma must lie in (1, 2]")
        self.f = _as_vector_fn(f, dim)
        self.g = self._as_matrix_fn(g, dim)
        self.gamma = gamma
        self.dim = dim
        self.alpha = alpha

    @staticmethod
    def _as_matrix_fn(value, dim: int):
        if callable(value):
            return value
        m = np.asarray(value, dtype=float)
        if m.ndim == 0:
            m = float(m) * np.eye(dim)
        return lambda x: np.broadcast_to(m, (np.asarray(x).shape[0], dim, dim))

    def hamiltonian(self, x, p):
        p = np.atleast_2d(p)
        f = self.f(x)
        g = self.g(x)
        q = np.einsum("nji,nj->ni", g, p)  # g^T p
        s = self.gamma / (self.gamma - 1.0)
        qn = np.linalg.norm(q, axis=-1)
        return -np.sum(f * p, axis=-1) + (1.0 / s) * qn**s

    def grad_p(self, x, p):
        p = np.atleast_2d(p)
        f = self.f(x)
        g = self.g(x)
        q = np.einsum("nji,nj->ni", g, p)
        s = self.gamma / (self.gamma - 1.0)
        qn = np.linalg.norm(q, axis=-1)
        # d/dp of |q|^s / s = |q|^(s-2) g q; the exponent s - 2 >= 0 so the
        # q = 0 case is finite (zero for s > 2, g q itself for s = 2).
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(qn > 0.0, qn ** (s - 2.0), 1.0 if s == 2.0 else 0.0)
        return -f + w[:, None] * np.einsum("nij,nj->ni", g, q)


class RobustHamiltonian(HamiltonianModel):
    """Worst-case-disturbance Hamiltonian with scalar g and sigma.

    H(x, p) = -f(x).p + g(x)^2 |p|^2 / 2 - sigma(x)^2 |p|^2 / (2 delta).
    """

    def __init__(self, f, g, sigma, delta: float, dim: int,
                 alpha: float | None = None):
        delta = float(delta)
        if delta <= 0:
            raise ValueError("delta must be positive")
        self.f = _as_vector_fn(f, dim)
        self.g = _as_scalar_fn(g)
        self.sigma = _as_scalar_fn(sigma)
        self.delta = delta
        self.dim = dim
        self.alpha = alpha

    def _coef(self, x):
        return self.g(x) ** 2 - self.sigma(x) ** 2 / self.delta

    def hamiltonian(self, x, p):
        p = np.atleast_2d(p)
        p2 = np.sum(p * p, axis=-1)
        return -np.sum(self.f(x) * p, axis=-1) + 0.5 * self._coef(x) * p2

    def grad_p(self, x, p):
        p = np.atleast_2d(p)
        return -self.f(x) + self._coef(x)[:, None] * p


def ham_power(b, c, beta, alpha=None) -> PowerHamiltonian:
    return PowerHamiltonian(b, c, beta, alpha=alpha)


def ham_bellman(f, g, gamma, dim, alpha=None) -> BellmanHamiltonian:
    return BellmanHamiltonian(f, g, gamma, dim, alpha=alpha)


def ham_robust(f, g, sigma, delta, dim, alpha=None) -> RobustHamiltonian:
    return RobustHamiltonian(f, g, sigma, delta, dim, alpha=alpha)


def check_gradient_consistency(model: HamiltonianModel, x: np.ndarray,
                               p: np.ndarray, h: float = 1e-4,
                               tol: float = 1e-5) -> float:
    """Max deviation between D_pH and centered differences of H.

    Raises ValueError when the deviation exceeds `tol`.
    """
    x = np.atleast_2d(x)
    p = np.atleast_2d(p)
    dp = model.grad_p(x, p)
    worst = 0.0
    for i in range(p.shape[1]):
        e = np.zeros_like(p)
        e[:, i] = h
        fd = (model.hamiltonian(x, p + e) - model.hamiltonian(x, p - e)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd - dp[:, i]))))
    if worst > tol:
        raise ValueError(f"D_pH inconsistent with H: max deviation {worst:.3e}")
    return worst


def check_growth(model: HamiltonianModel, x: np.ndarray, p: np.ndarray) -> None:
    """Verify the declared quadratic-growth constant on a sample set."""
    if model.alpha is None:
        return
    x = np.atleast_2d(x)
    p = np.atleast_2d(p)
    pn = np.linalg.norm(p, axis=-1)
    bound = model.alpha * (1.0 + pn**2)
    hv = np.abs(model.hamiltonian(x, p))
    gv = np.linalg.norm(model.grad_p(x, p), axis=-1) * (1.0 + pn)
    if np.any(hv > bound * (1 + 1e-12)) or np.any(gv > bound * (1 + 1e-12)):
        raise ValueError("declared growth constant alpha violated on samples")
