"""Deterministic-equivalent machinery shared by the uplink and downlink analyses.

The object of study is the resolvent

    T(rho) = ( sum_m  w_m I_M / (1 + delta_m)  +  S  +  rho I_M )^{-1}

where each delta_m solves the coupled fixed point delta_m = Tr{w_m T} and S
is a fixed Hermitian nonnegative-definite matrix. Because every weight
multiplies the identity, T is a function of the scalar

    c = rho + sum_m w_m / (1 + delta_m)

alone, so after one eigendecomposition of S every iteration costs O(M):

    Tr T   = sum_i 1 / (lambda_i + c),      Tr T^2 = sum_i 1 / (lambda_i + c)^2.

The derivative quantities ("primed" traces) solve a small linear system
(I - J) delta' = v and satisfy  mu' = Tr T' = -d mu / d rho, which the test
suite checks by finite differences. A Monte Carlo resolvent oracle that
draws explicit random matrices is provided for validation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import crandn

COND_LIMIT = 1e12


class DeError(RuntimeError):
    """Base class for deterministic-equivalent solver failures."""


class DeConvergenceError(DeError):
    """Fixed point did not reach the tolerance within the iteration budget."""

    def __init__(self, residual: float, max_iter: int):
        super().__init__(
            f"fixed point not converged after {max_iter} iterations "
            f"(last residual {residual:.3e})"
        )
        self.residual = residual


class DeRegimeError(DeError):
    """The derivative system is singular; the regularizer is too small."""


@dataclass(frozen=True)
class DeProblem:
    """One resolvent problem: scalar weights, optional S matrix, regularizer.

    ``exclusions`` lists indices of ``weights`` removed from the sum (the
    leave-one-out and leave-two-out variants). ``s_eigvals`` may be passed
    to reuse an existing eigendecomposition of ``s_matrix``.
    """

    weights: np.ndarray
    rho: float
    dim: int
    s_matrix: np.ndarray | None = None
    s_eigvals: np.ndarray | None = None
    exclusions: tuple[int, ...] = ()

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "weights", w)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        bad = [i for i in self.exclusions if not 0 <= i < w.size]
        if bad:
            raise ValueError(f"exclusion indices out of range: {bad}")

    def kept_indices(self) -> np.ndarray:
        mask = np.ones(self.weights.size, dtype=bool)
        mask[list(self.exclusions)] = False
        return np.nonzero(mask)[0]

    def eigvals(self) -> np.ndarray | None:
        if self.s_eigvals is not None:
            return np.asarray(self.s_eigvals, dtype=float)
        if self.s_matrix is None:
            return None
        return np.linalg.eigvalsh(self.s_matrix)


@dataclass(frozen=True)
class DeSolution:
    """Converged fixed point plus the scalar resolvent summaries.

    ``delta`` is aligned with ``kept``: entry j belongs to weight index
    kept[j] of the originating problem. ``tr_t2`` is Tr{T^2}.
    """

    delta: np.ndarray
    mu: float
    c: float
    tr_t2: float
    iterations: int
    residual: float
    kept: np.ndarray
    weights_kept: np.ndarray
    problem: DeProblem = field(repr=False)

    def t_matrix(self) -> np.ndarray:
        """Materialize T = (c I + S)^{-1} (M x M)."""
        if self.problem.s_matrix is None:
            return np.eye(self.problem.dim) / self.c
        s = self.problem.s_matrix
        evals, evecs = np.linalg.eigh(s)
        return (evecs / (evals + self.c)) @ evecs.conj().T


@dataclass(frozen=True)
class DePrimeSolution:
    """Solution of the derivative system for one seed weighting."""

    delta_prime: np.ndarray
    mu_prime: float


def _traces(evals: np.ndarray | None, dim: int, c: float) -> tuple[float, float]:
    if evals is None:
        return dim / c, dim / c**2
    shifted = evals + c
    if shifted.min() <= 0:
        raise DeError(f"resolvent not positive definite (min eigenvalue {shifted.min():.3e})")
    if shifted.max() / shifted.min() > COND_LIMIT:
        raise DeError("resolvent condition number exceeds limit")
    return float(np.sum(1.0 / shifted)), float(np.sum(1.0 / shifted**2))


def solve_delta(
    problem: DeProblem,
    tol: float = 1e-9,
    max_iter: int = 500,
) -> DeSolution:
    """Iterate the fixed point from delta^(0) = 1/rho to relative tolerance.

    Convergence is measured as max_m |delta_m^(t) - delta_m^(t-1)| /
    (1 + delta_m^(t)); failure to converge raises, never returns silently.
    """
    kept = problem.kept_indices()
    w = problem.weights[kept]
    evals = problem.eigvals()
    rho, dim = problem.rho, problem.dim

    if w.size == 0:
        c = rho
        mu, tr2 = _traces(evals, dim, c)
        return DeSolution(
            delta=np.zeros(0), mu=mu, c=c, tr_t2=tr2, iterations=0,
            residual=0.0, kept=kept, weights_kept=w, problem=problem,
        )

    delta = np.full(w.size, 1.0 / rho)
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        c = rho + float(np.sum(w / (1.0 + delta)))
        mu, tr2 = _traces(evals, dim, c)
        new = w * mu
        residual = float(np.max(np.abs(new - delta) / (1.0 + new)))
        delta = new
        if residual < tol:
            return DeSolution(
                delta=delta, mu=mu, c=c, tr_t2=tr2, iterations=iteration,
                residual=residual, kept=kept, weights_kept=w, problem=problem,
            )
    raise DeConvergenceError(residual, max_iter)


def solve_delta_prime(solution: DeSolution, seed_weight: float = 1.0) -> DePrimeSolution:
    """Solve (I - J) delta' = v and assemble mu' = Tr{T'}.

    ``seed_weight`` scales the constant matrix seeding T' (seed_weight * I
    between the two resolvents); the default 1 gives Tr{T^2}'s deterministic
    equivalent, i.e. -d mu / d rho.
    """
    w = solution.weights_kept
    tr2 = solution.tr_t2
    if w.size == 0:
        return DePrimeSolution(delta_prime=np.zeros(0), mu_prime=seed_weight * tr2)

    # The quadratic coupling carries the (1 + delta)^2 factor of the summed
    # (column) term; the row/column choice is invisible when all weights are
    # equal but matters for mixed weight classes.
    denom = (1.0 + solution.delta) ** 2
    j_matrix = np.outer(w, w / denom) * tr2
    if w.size and np.max(np.abs(np.linalg.eigvals(j_matrix))) >= 1.0:
        raise DeRegimeError(
            "derivative system singular (spectral radius of J >= 1); "
            "the regularizer is too small for the deterministic equivalent"
        )
    v = seed_weight * w * tr2
    delta_prime = np.linalg.solve(np.eye(w.size) - j_matrix, v)
    if np.any(delta_prime < -1e-12 * max(1.0, float(np.max(np.abs(delta_prime))))):
        raise DeRegimeError("negative derivative fixed point")
    mu_prime = tr2 * (seed_weight + float(np.sum(w * delta_prime / denom)))
    return DePrimeSolution(delta_prime=delta_prime, mu_prime=mu_prime)


def resolvent_trace_mc_oracle(
    problem: DeProblem,
    num_draws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Empirical Tr{R^-1}, Tr{R^-2} over explicit random channel draws.

    Draws R = sum_m w_m u_m u_m^H + S + rho I with u_m standard complex
    Gaussian vectors. Used only by tests as the independent side of the
    deterministic-equivalent checks.
    """
    kept = problem.kept_indices()
    w = problem.weights[kept]
    dim = problem.dim
    s = problem.s_matrix if problem.s_matrix is not None else 0.0
    tr1 = 0.0
    tr2 = 0.0
    eye = np.eye(dim)
    for _ in range(num_draws):
        r = problem.rho * eye + s
        if w.size:
            u = crandn(rng, dim, w.size)
            r = r + (u * w[None, :]) @ u.conj().T
        inv = np.linalg.inv(r)
        tr1 += np.real(np.trace(inv))
        tr2 += np.real(np.trace(inv @ inv))
    return tr1 / num_draws, tr2 / num_draws
