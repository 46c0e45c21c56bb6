"""ADMM solvers for atomic-norm-regularized regression.

``solve_mrar`` minimizes mrlf(y - Xc) + lambda * N_A(c) by splitting c = z:
the c-update is the atomic prox, the z-update runs a short half-quadratic
loop (reweighted ridge with weights exp(-e^2/(2 sigma^2)) / sigma^2), and the
scaled multiplier closes the loop.  ``solve_ar_squared`` is the same skeleton
with the squared loss, whose z-update is a single prefactored linear solve.
Iteration stops when both ||c - z||_inf and the c step drop below epsilon.

Systems with more atoms than observations are solved through the m x m dual
form of the ridge system (precomputed X X^T), which keeps the per-iteration
cost at O(m^2 n) instead of O(n^2 m).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .atomic import JOINT_ROWS, AtomicSet, atomic_norm, vector_prox_arrays
from .errors import DimensionMismatch, NotSPD, ShapeMismatch
from .modal import ModalLoss, _mrlf_raw, adaptive_sigma, default_sigma_floor
from .numkit import as_matrix, as_vector, solve_spd


@dataclass(frozen=True)
class SquaredLoss:
    """Marker for the squared data-fidelity term ||y - Xc||^2."""


@dataclass(frozen=True)
class SolverConfig:
    """ADMM settings; defaults follow the reference configuration."""

    lam: float = 1e-3
    mu: float = 0.1
    epsilon: float = 1e-7
    max_iter: int = 100_000
    hq_inner_tol: float = 1e-6
    hq_inner_max: int = 10
    loss: object = field(default_factory=SquaredLoss)

    def __post_init__(self):
        if not (self.lam > 0.0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not (self.mu > 0.0):
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not (self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be at least 1")
        if not (self.hq_inner_tol > 0.0):
            raise ValueError("hq_inner_tol must be positive")
        if int(self.hq_inner_max) < 1:
            raise ValueError("hq_inner_max must be at least 1")
        if not isinstance(self.loss, (ModalLoss, SquaredLoss)):
            raise TypeError(f"loss must be ModalLoss or SquaredLoss, got {self.loss!r}")


@dataclass(frozen=True)
class SolveHistory:
    """Per-iteration ||c - z||_inf, ||c step||_inf, objective, and sigma."""

    gap: np.ndarray
    step: np.ndarray
    objective: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class SolveResult:
    coefficients: np.ndarray
    converged: bool
    iterations: int
    history: SolveHistory
    sigma: object = None  # final bandwidth: float, per-modality array, or None


def _check_problem(X, y):
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(
            f"y has length {y.shape[0]} but X has {X.shape[0]} rows"
        )
    return X, y


def _trim(hist, k):
    return SolveHistory(*(a[:k].copy() for a in hist))


def solve_mrar(X, y, aset, cfg):
    """Run the modal-regression ADMM; cfg.loss must be a ModalLoss."""
    X, y = _check_problem(X, y)
    if not isinstance(cfg.loss, ModalLoss):
        raise TypeError("solve_mrar requires cfg.loss to be a ModalLoss")
    if aset.kind == JOINT_ROWS:
        raise ShapeMismatch("joint-rows problems go through solve_mrar_multimodal")
    m, n = X.shape
    order, bounds = vector_prox_arrays(aset, n)
    impl = kernels.active()
    Xt = np.ascontiguousarray(X.T)
    woodbury = m < n
    XXt = X @ Xt if woodbury else np.zeros((0, 0))
    loss = cfg.loss
    floor = loss.min_sigma if loss.min_sigma is not None else default_sigma_floor(y)
    mu, lam = cfg.mu, cfg.lam
    max_iter = int(cfg.max_iter)
    gamma = lam / mu

    c = np.zeros(n)
    z = np.zeros(n)
    dual = np.zeros(n)
    hist = tuple(np.empty(max_iter) for _ in range(4))
    sigma = loss.kernel.sigma
    converged = False
    iterations = max_iter
    for i in range(max_iter):
        if loss.adaptive_bandwidth:
            sigma = adaptive_sigma(y - X @ z, floor)
        c_prev = c
        c = impl.block_shrink(z - dual / mu, order, bounds, gamma)
        z, _ = impl.hq_inner(
            X, Xt, XXt, y, c + dual / mu, mu, sigma, z,
            cfg.hq_inner_tol, int(cfg.hq_inner_max), woodbury,
        )
        dual = dual + mu * (c - z)
        gap = float(np.max(np.abs(c - z))) if n else 0.0
        step = float(np.max(np.abs(c - c_prev))) if n else 0.0
        obj = _mrlf_raw(y - X @ c, sigma) + lam * atomic_norm(aset, c)
        hist[0][i], hist[1][i], hist[2][i], hist[3][i] = gap, step, obj, sigma
        if gap < cfg.epsilon and step < cfg.epsilon:
            converged = True
            iterations = i + 1
            break
    return SolveResult(c, converged, iterations, _trim(hist, iterations), float(sigma))


def _squared_prefactor(X, Xt, mu, woodbury):
    if woodbury:
        S = X @ Xt
        S[np.diag_indices(S.shape[0])] += 0.5 * mu
        return np.linalg.cholesky(S)
    M = 2.0 * (Xt @ X)
    M[np.diag_indices(M.shape[0])] += mu
    return np.linalg.cholesky(M)


def solve_ar_squared(X, y, aset, cfg):
    """Squared-loss ADMM for min ||y - Xc||^2 + lam * N_A(c)."""
    X, y = _check_problem(X, y)
    if not isinstance(cfg.loss, SquaredLoss):
        raise TypeError("solve_ar_squared requires cfg.loss to be a SquaredLoss")
    if aset.kind == JOINT_ROWS:
        raise ShapeMismatch("joint-rows problems go through solve_ar_squared_multimodal")
    m, n = X.shape
    order, bounds = vector_prox_arrays(aset, n)
    impl = kernels.active()
    Xt = np.ascontiguousarray(X.T)
    woodbury = m < n
    try:
        L = _squared_prefactor(X, Xt, cfg.mu, woodbury)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - mu > 0 keeps it SPD
        raise NotSPD("ridge system is not positive definite") from exc
    mu, lam = cfg.mu, cfg.lam
    max_iter = int(cfg.max_iter)
    gamma = lam / mu
    b_const = 2.0 * (Xt @ y)

    c = np.zeros(n)
    z = np.zeros(n)
    dual = np.zeros(n)
    hist = tuple(np.empty(max_iter) for _ in range(4))
    converged = False
    iterations = max_iter
    for i in range(max_iter):
        c_prev = c
        c = impl.block_shrink(z - dual / mu, order, bounds, gamma)
        z = impl.squared_zstep(L, X, Xt, b_const + mu * c + dual, mu, woodbury)
        dual = dual + mu * (c - z)
        gap = float(np.max(np.abs(c - z))) if n else 0.0
        step = float(np.max(np.abs(c - c_prev))) if n else 0.0
        r = y - X @ c
        obj = float(r @ r) + lam * atomic_norm(aset, c)
        hist[0][i], hist[1][i], hist[2][i], hist[3][i] = gap, step, obj, np.nan
        if gap < cfg.epsilon and step < cfg.epsilon:
            converged = True
            iterations = i + 1
            break
    return SolveResult(c, converged, iterations, _trim(hist, iterations), None)


def solve_crc(A, y, lam):
    """Collaborative ridge representation (A^T A + lam I)^{-1} A^T y."""
    A, y = _check_problem(A, y)
    if not (lam > 0.0):
        raise ValueError(f"lam must be positive, got {lam}")
    G = A.T @ A
    G[np.diag_indices(G.shape[0])] += lam
    return solve_spd(G, A.T @ y)


def _check_multimodal(Xs, ys, aset):
    if aset.kind != JOINT_ROWS:
        raise ShapeMismatch("multimodal solvers require the joint-rows atomic set")
    if len(Xs) == 0 or len(Xs) != len(ys):
        raise DimensionMismatch(
            f"got {len(Xs)} dictionaries and {len(ys)} targets"
        )
    pairs = [_check_problem(X, y) for X, y in zip(Xs, ys)]
    n = pairs[0][0].shape[1]
    for X, _ in pairs[1:]:
        if X.shape[1] != n:
            raise DimensionMismatch("modalities disagree on the number of atoms")
    return pairs, n


def solve_mrar_multimodal(Xs, ys, aset, cfg):
    """Joint-rows modal regression over modalities (X_j, y_j) sharing atoms.

    Each column of the coefficient matrix gets its own half-quadratic ridge
    update and adaptive bandwidth; the row-sparsity prox ties them together.
    Returns a SolveResult whose sigma is the vector of final bandwidths.
    """
    if not isinstance(cfg.loss, ModalLoss):
        raise TypeError("solve_mrar_multimodal requires cfg.loss to be a ModalLoss")
    pairs, n = _check_multimodal(Xs, ys, aset)
    impl = kernels.active()
    loss = cfg.loss
    nmod = len(pairs)
    Xts = [np.ascontiguousarray(X.T) for X, _ in pairs]
    wb = [X.shape[0] < n for X, _ in pairs]
    XXts = [X @ Xt if w else np.zeros((0, 0)) for (X, _), Xt, w in zip(pairs, Xts, wb)]
    floors = [
        loss.min_sigma if loss.min_sigma is not None else default_sigma_floor(y)
        for _, y in pairs
    ]
    mu, lam = cfg.mu, cfg.lam
    max_iter = int(cfg.max_iter)
    gamma = lam / mu

    C = np.zeros((n, nmod))
    Z = np.zeros((n, nmod))
    dual = np.zeros((n, nmod))
    sigmas = np.array([loss.kernel.sigma] * nmod)
    hist = tuple(np.empty(max_iter) for _ in range(4))
    converged = False
    iterations = max_iter
    for i in range(max_iter):
        if loss.adaptive_bandwidth:
            for j, (X, y) in enumerate(pairs):
                sigmas[j] = adaptive_sigma(y - X @ Z[:, j], floors[j])
        C_prev = C
        C = impl.row_shrink(Z - dual / mu, gamma)
        for j, (X, y) in enumerate(pairs):
            v = np.ascontiguousarray(C[:, j] + dual[:, j] / mu)
            zj, _ = impl.hq_inner(
                X, Xts[j], XXts[j], y, v, mu, float(sigmas[j]),
                np.ascontiguousarray(Z[:, j]),
                cfg.hq_inner_tol, int(cfg.hq_inner_max), wb[j],
            )
            Z[:, j] = zj
        dual = dual + mu * (C - Z)
        gap = float(np.max(np.abs(C - Z)))
        step = float(np.max(np.abs(C - C_prev)))
        obj = lam * atomic_norm(aset, C)
        for j, (X, y) in enumerate(pairs):
            obj += _mrlf_raw(y - X @ C[:, j], float(sigmas[j]))
        hist[0][i], hist[1][i], hist[2][i], hist[3][i] = gap, step, obj, np.max(sigmas)
        if gap < cfg.epsilon and step < cfg.epsilon:
            converged = True
            iterations = i + 1
            break
    return SolveResult(C, converged, iterations, _trim(hist, iterations), sigmas.copy())


def solve_ar_squared_multimodal(Xs, ys, aset, cfg):
    """Squared-loss counterpart of the joint-rows solver."""
    if not isinstance(cfg.loss, SquaredLoss):
        raise TypeError(
            "solve_ar_squared_multimodal requires cfg.loss to be a SquaredLoss"
        )
    pairs, n = _check_multimodal(Xs, ys, aset)
    impl = kernels.active()
    nmod = len(pairs)
    Xts = [np.ascontiguousarray(X.T) for X, _ in pairs]
    wb = [X.shape[0] < n for X, _ in pairs]
    Ls = [
        _squared_prefactor(X, Xt, cfg.mu, w)
        for (X, _), Xt, w in zip(pairs, Xts, wb)
    ]
    b_consts = [2.0 * (Xt @ y) for Xt, (_, y) in zip(Xts, pairs)]
    mu, lam = cfg.mu, cfg.lam
    max_iter = int(cfg.max_iter)
    gamma = lam / mu

    C = np.zeros((n, nmod))
    Z = np.zeros((n, nmod))
    dual = np.zeros((n, nmod))
    hist = tuple(np.empty(max_iter) for _ in range(4))
    converged = False
    iterations = max_iter
    for i in range(max_iter):
        C_prev = C
        C = impl.row_shrink(Z - dual / mu, gamma)
        for j, (X, _) in enumerate(pairs):
            b = b_consts[j] + mu * C[:, j] + dual[:, j]
            Z[:, j] = impl.squared_zstep(Ls[j], X, Xts[j], np.ascontiguousarray(b), mu, wb[j])
        dual = dual + mu * (C - Z)
        gap = float(np.max(np.abs(C - Z)))
        step = float(np.max(np.abs(C - C_prev)))
        obj = lam * atomic_norm(aset, C)
        for j, (X, y) in enumerate(pairs):
            r = y - X @ C[:, j]
            obj += float(r @ r)
        hist[0][i], hist[1][i], hist[2][i], hist[3][i] = gap, step, obj, np.nan
        if gap < cfg.epsilon and step < cfg.epsilon:
            converged = True
            iterations = i + 1
            break
    return SolveResult(C, converged, iterations, _trim(hist, iterations), None)
