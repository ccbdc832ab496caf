"""Eigenbasis of the average matrix and the transformed perturbation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .errors import DefectiveMatrix

COND_CAP = 1e8


@dataclass(frozen=True, eq=False)
class EigenStructure:
    alpha: np.ndarray       # real parts, non-increasing
    beta: np.ndarray        # imaginary parts, +beta listed before -beta
    V: np.ndarray
    V_inv: np.ndarray
    norm_V: float
    norm_V_inv: float
    cond_V: float

    @property
    def n(self):
        return len(self.alpha)

    @property
    def alpha1(self):
        return float(self.alpha[0])

    @property
    def n_pairs(self):
        return int(np.sum(self.beta > 0))

    @property
    def eigenvalues(self):
        return self.alpha + 1j * self.beta


def _normalize_columns(V):
    V = V / np.linalg.norm(V, axis=0)
    for k in range(V.shape[1]):
        col = V[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())[0]
        V[:, k] = col * (abs(col[idx]) / col[idx])
    return V


def decompose(A, tol=1e-9, cond_cap=COND_CAP):
    """Ordered eigendecomposition A V = V diag(alpha + i beta).

    Raises DefectiveMatrix when the eigenvector matrix is too ill conditioned
    for V^-1-based bounds to mean anything.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if not np.any(A):
        raise ValueError("A must be nonzero")
    w, V = np.linalg.eig(A)
    order = sorted(range(len(w)), key=lambda k: (-w[k].real, -abs(w[k].imag), -w[k].imag))
    w = w[order]
    V = _normalize_columns(np.asarray(V[:, order], dtype=complex))
    # conjugate partner columns must be exact conjugates so y = V^-1 x pairs up
    for k in range(len(w) - 1):
        if w[k].imag > 0 and np.isclose(w[k + 1], np.conj(w[k]), rtol=1e-10, atol=1e-14):
            V[:, k + 1] = np.conj(V[:, k])
    norm_V = float(np.linalg.norm(V, 2))
    smin = float(np.linalg.svd(V, compute_uv=False)[-1])
    cond = norm_V / smin if smin > 0 else np.inf
    if not np.isfinite(cond) or cond > cond_cap:
        raise DefectiveMatrix(f"eigenvector matrix condition number {cond:.3g} exceeds {cond_cap:.3g}",
                              cond=cond)
    V_inv = np.linalg.inv(V)
    resid = float(np.linalg.norm(A @ V - V * w, 2))
    if resid > tol * np.linalg.norm(A, 2):
        raise DefectiveMatrix(f"eigen-residual {resid:.3g} too large", cond=cond, residual=resid)
    return EigenStructure(alpha=w.real.copy(), beta=w.imag.copy(), V=V, V_inv=V_inv,
                          norm_V=norm_V, norm_V_inv=float(np.linalg.norm(V_inv, 2)), cond_V=cond)


def choose_lambda(alpha):
    """Minimizer of M(lam) = lam + max_k |alpha_k - lam| and the minimum value.

    The minimum is attained at the smallest real part and equals the largest.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size == 0:
        raise ValueError("alpha must be nonempty")
    if np.any(np.diff(alpha) > 0):
        raise ValueError("alpha must be non-increasing")
    return float(alpha[-1]), float(alpha[0])


def refine_G_minus(G):
    """G(t) with the imaginary part of its diagonal removed."""

    def G_minus(t):
        Gt = G(t)
        d = np.imag(np.diagonal(Gt, axis1=-2, axis2=-1))
        return Gt - 1j * (d[..., :, None] * np.eye(Gt.shape[-1]))

    return G_minus


class _CoeffBank:
    """Evaluate a list of TimeCoeff at one scalar time with a single sin call."""

    def __init__(self, coeffs):
        self.offset = np.array([c.offset for c in coeffs], dtype=float)
        sins = [(k, a, f, p) for k, c in enumerate(coeffs) for a, f, p in c.sinusoids]
        self.owner = np.array([s[0] for s in sins], dtype=int)
        self.amp = np.array([s[1] for s in sins], dtype=float)
        self.freq = np.array([s[2] for s in sins], dtype=float)
        self.phase = np.array([s[3] for s in sins], dtype=float)

    def __call__(self, t):
        if not self.owner.size:
            return self.offset
        vals = self.amp * np.sin(self.freq * t + self.phase)
        return self.offset + np.bincount(self.owner, vals, minlength=len(self.offset))


def _norm2(M):
    if M.shape == (2, 2):
        fro = float(np.vdot(M, M).real)
        det = abs(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
        return math.sqrt(max(0.0, 0.5 * (fro + math.sqrt(max(0.0, fro * fro - 4 * det * det)))))
    return float(np.linalg.svd(M, compute_uv=False)[0])


@dataclass(frozen=True, eq=False)
class EigenbasisMaps:
    """Pointwise evaluators for the system written in y = V^-1 x.

    Array arguments are evaluated in batch; scalar times take a precompiled
    path (G(t) = sum_e c_e(t) K_e with constant K_e) used inside ODE solvers.
    """

    eig: EigenStructure
    spec: object

    @cached_property
    def _g_bank(self):
        n = self.eig.n
        entries = self.spec.Gstar
        K = np.array([np.outer(self.eig.V_inv[:, i], self.eig.V[j, :]) for (i, j), _ in entries])
        K = K.reshape(len(entries), n, n)
        # coefficients are real, so dropping Im diag commutes with the sum over entries
        Km = K.copy()
        idx = np.arange(n)
        Km[:, idx, idx] = Km[:, idx, idx].real
        return _CoeffBank([c for _, c in entries]), K.reshape(-1, n * n), Km.reshape(-1, n * n)

    @cached_property
    def _f_bank(self):
        return _CoeffBank(self.spec.forcing.eta), self.spec.forcing.F0 * self.eig.V_inv

    def _G_scalar(self, t, minus=False):
        bank, K, Km = self._g_bank
        n = self.eig.n
        if not len(K):
            return np.zeros((n, n), dtype=complex)
        return (bank(t) @ (Km if minus else K)).reshape(n, n)

    def G(self, t):
        if np.ndim(t) == 0:
            return self._G_scalar(float(t))
        return self.eig.V_inv @ self.spec.Gstar_matrix(t) @ self.eig.V

    def G_minus(self, t):
        if np.ndim(t) == 0:
            return self._G_scalar(float(t), minus=True)
        return refine_G_minus(self.G)(t)

    def G_norm(self, t):
        if np.ndim(t) == 0:
            return _norm2(self._G_scalar(float(t))) if self.spec.Gstar else 0.0
        return _spec_norm(self.G(t))

    def G_minus_norm(self, t):
        if np.ndim(t) == 0:
            if not self.spec.Gstar:
                return 0.0
            return _norm2(self._G_scalar(float(t), minus=True))
        return _spec_norm(self.G_minus(t))

    def F(self, t):
        if np.ndim(t) == 0:
            bank, W = self._f_bank
            return W @ bank(float(t))
        return self.spec.forcing.vector(t) @ self.eig.V_inv.T

    def F_norm(self, t):
        if self.spec.forcing.F0 == 0.0:
            return np.zeros(np.shape(t)) if np.ndim(t) else 0.0
        if np.ndim(t) == 0:
            v = self.F(t)
            return math.sqrt(float(np.vdot(v, v).real))
        return np.linalg.norm(self.F(t), axis=-1)

    def eta_transformed_norm(self, t):
        """||V^-1 eta(t)||, the unit-amplitude forcing profile in the eigenbasis."""
        F0 = self.spec.forcing.F0
        return self.F_norm(t) / F0 if F0 else self.F_norm(t)

    def z0(self, x0):
        return float(np.linalg.norm(self.eig.V_inv @ np.asarray(x0, dtype=float)))


def _spec_norm(M):
    if not np.any(M):
        return np.zeros(M.shape[:-2]) if M.ndim > 2 else 0.0
    out = np.linalg.norm(M, ord=2, axis=(-2, -1))
    return out if np.ndim(out) else float(out)


def to_eigenbasis(eig, spec):
    return EigenbasisMaps(eig, spec)


def fundamental_norm_check(lam, beta, dt):
    """Relative deviation of ||exp((lam I + i diag(beta)) dt)|| from e^(lam dt).

    Also folds in the conditioning identity ||w|| ||w^-1|| = 1.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    M = (lam * np.eye(len(beta)) + 1j * np.diag(beta)) * dt
    w = expm(M)
    w_inv = expm(-M)
    nw = np.linalg.norm(w, 2)
    cond = nw * np.linalg.norm(w_inv, 2)
    return float(max(abs(nw * np.exp(-lam * dt) - 1.0), abs(cond - 1.0)))
