"""Derivations and automorphisms of the supported algebras.

Der(V) is spanned by Lyapunov commutators [L_u, L_v]; an orthonormal
basis of that span (Frobenius inner product) is built once per algebra
and cached.  Automorphisms are sampled from the identity component as
exponentials of derivations, which is all the verification suites need.
Under trace-form coordinates derivations are skew-symmetric matrices and
automorphisms are orthogonal, so exponentials are cheap and well
conditioned.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraError,
    AlgebraSpec,
    Element,
    frobenius_inner,
    lyapunov_basis_stack,
    lyapunov_map,
    norm,
)
from . import algebra as _alg

# Candidate commutators below this relative mass are discarded while
# orthonormalizing the spanning set.
RANK_TOL = 1e-9
DERIVATION_TOL = 1e-8
EXP_SCALE_THRESHOLD = 0.5
_TAYLOR_ORDER = 13


def commutator_derivation(u: Element, v: Element) -> np.ndarray:
    """[L_u, L_v], always a derivation."""
    Lu, Lv = lyapunov_map(u), lyapunov_map(v)
    return Lu @ Lv - Lv @ Lu


@dataclass(frozen=True)
class DerivationBasis:
    """Orthonormal basis of Der(V) under the Frobenius inner product."""

    algebra: AlgebraSpec
    stack: np.ndarray  # (k, dim, dim)

    @property
    def dimension(self) -> int:
        return self.stack.shape[0]

    @property
    def maps(self) -> tuple[np.ndarray, ...]:
        return tuple(self.stack)


@functools.lru_cache(maxsize=None)
def _structure_tensor(spec: AlgebraSpec) -> np.ndarray:
    """T[i, j] = coords of c_i o c_j."""
    dim = spec.dim
    eye = np.eye(dim)
    T = np.empty((dim, dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            T[i, j] = _alg._jp_coords(spec, eye[i], eye[j])
            T[j, i] = T[i, j]
    T.setflags(write=False)
    return T


@functools.lru_cache(maxsize=None)
def derivation_basis(spec: AlgebraSpec) -> DerivationBasis:
    """Span {[L_{c_i}, L_{c_j}]} and orthonormalize (modified Gram-Schmidt)."""
    dim = spec.dim
    S = lyapunov_basis_stack(spec)
    kept: list[np.ndarray] = []
    for i in range(dim):
        for j in range(i + 1, dim):
            C = S[i] @ S[j] - S[j] @ S[i]
            w = C.ravel().copy()
            w0 = np.linalg.norm(w)
            if w0 <= RANK_TOL:
                continue
            for b in kept:  # two passes for stability
                w -= (b @ w) * b
            for b in kept:
                w -= (b @ w) * b
            r = np.linalg.norm(w)
            if r > RANK_TOL * (1.0 + w0):
                kept.append(w / r)
    if kept:
        stack = np.stack(kept).reshape(len(kept), dim, dim)
    else:
        stack = np.zeros((0, dim, dim))
    stack.setflags(write=False)
    return DerivationBasis(spec, stack)


def leibniz_residual(spec: AlgebraSpec, D: np.ndarray) -> float:
    """Worst violation of D(a o b) = Da o b + a o Db over basis pairs.

    Checking on basis pairs is exhaustive: the defect is bilinear.
    """
    T = _structure_tensor(spec)
    lhs = np.einsum("ijk,lk->ijl", T, D)
    rhs = np.einsum("ai,ajk->ijk", D, T) + np.einsum("bj,ibk->ijk", D, T)
    worst = float(np.max(np.linalg.norm(lhs - rhs, axis=2)))
    return worst / (1.0 + float(np.linalg.norm(D)))


def is_derivation(spec: AlgebraSpec, D: np.ndarray, tol: float = DERIVATION_TOL) -> bool:
    return leibniz_residual(spec, D) <= tol


@dataclass(frozen=True)
class Automorphism:
    """Orthogonal algebra automorphism with its multiplicativity defect."""

    algebra: AlgebraSpec
    matrix: np.ndarray
    residual: float

    def apply(self, x: Element) -> Element:
        if x.algebra != self.algebra:
            raise AlgebraError("algebra mismatch")
        return Element(self.algebra, self.matrix @ x.coords)

    def inverse(self) -> "Automorphism":
        return Automorphism(self.algebra, self.matrix.T.copy(), self.residual)


def _expm(A: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring with a fixed-order Taylor core."""
    nrm = float(np.linalg.norm(A))
    squarings = 0
    if nrm > EXP_SCALE_THRESHOLD:
        squarings = int(np.ceil(np.log2(nrm / EXP_SCALE_THRESHOLD)))
        A = A / (2.0**squarings)
    E = np.eye(A.shape[0])
    # Horner evaluation of sum A^k / k!
    for k in range(_TAYLOR_ORDER, 0, -1):
        E = np.eye(A.shape[0]) + (A @ E) / k
    for _ in range(squarings):
        E = E @ E
    return E


def exp_action(D: np.ndarray, coords: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(t D) @ coords without forming the exponential when t D is small."""
    A = t * D
    nrm = float(np.linalg.norm(A))
    if nrm > 0.9:
        return _expm(A) @ coords
    # truncation bound nrm^(k+1)/(k+1)! keeps these below 1e-16 relative
    if nrm <= 0.03:
        terms = 7
    elif nrm <= 0.15:
        terms = 10
    elif nrm <= 0.5:
        terms = 13
    else:
        terms = 17
    acc = coords.copy()
    term = coords
    for k in range(1, terms + 1):
        term = (A @ term) / k
        acc += term
    return acc


def multiplicativity_residual(spec: AlgebraSpec, X: np.ndarray) -> float:
    """Worst defect of X(a o b) = Xa o Xb over orthonormal basis pairs."""
    T = _structure_tensor(spec)
    lhs = np.einsum("ijk,lk->ijl", T, X)
    rhs = np.einsum("ai,bj,abk->ijk", X, X, T)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=2)))


def exp_derivation(
    spec: AlgebraSpec, D: np.ndarray, t: float = 1.0, validate: bool = True
) -> Automorphism:
    """exp(t D) as an Automorphism; rejects non-derivations."""
    D = np.asarray(D, dtype=float)
    if D.shape != (spec.dim, spec.dim):
        raise AlgebraError(f"map shape {D.shape} does not match dim {spec.dim}")
    if validate and not is_derivation(spec, D):
        raise AlgebraError("input map violates the Leibniz rule")
    X = _expm(t * D)
    return Automorphism(spec, X, multiplicativity_residual(spec, X))


def random_derivation(spec: AlgebraSpec, rng: np.random.Generator) -> np.ndarray:
    """Standard-normal coefficients on the orthonormal basis, scaled 1/sqrt(k)."""
    basis = derivation_basis(spec)
    k = basis.dimension
    if k == 0:
        return np.zeros((spec.dim, spec.dim))
    coeffs = rng.standard_normal(k) / np.sqrt(k)
    return np.tensordot(coeffs, basis.stack, axes=(0, 0))


def random_automorphism(spec: AlgebraSpec, rng: np.random.Generator, scale: float = 1.0) -> Automorphism:
    return exp_derivation(spec, scale * random_derivation(spec, rng), validate=False)


def project_perp_derivations(spec: AlgebraSpec, H: np.ndarray) -> np.ndarray:
    """Component of H orthogonal to Der(V) (Frobenius inner product)."""
    basis = derivation_basis(spec)
    if basis.dimension == 0:
        return np.array(H, dtype=float)
    flat = basis.stack.reshape(basis.dimension, -1)
    coeffs = flat @ np.asarray(H, dtype=float).ravel()
    return H - np.tensordot(coeffs, basis.stack, axes=(0, 0))


def tangent_stack(basis: DerivationBasis, coords: np.ndarray) -> np.ndarray:
    """(k, dim) rows D_k x for a coordinate vector x."""
    if basis.dimension == 0:
        return np.zeros((0, coords.shape[0]))
    return basis.stack @ coords


def orbit_tangent(x: Element, basis: DerivationBasis | None = None) -> list[Element]:
    """Tangent directions D_k x to the automorphism orbit at x."""
    if basis is None:
        basis = derivation_basis(x.algebra)
    return [Element(x.algebra, row) for row in tangent_stack(basis, x.coords)]


def commutes_via_derivations(a: Element, b: Element, tol: float = _alg.TIE_TOL) -> tuple[bool, float]:
    """Operator commutation via the pairing <a, D b> = 0 for all D in Der."""
    _alg._same_algebra(a, b)
    basis = derivation_basis(a.algebra)
    if basis.dimension == 0:
        return True, 0.0
    vals = tangent_stack(basis, b.coords) @ a.coords
    residual = float(np.max(np.abs(vals)) / (1.0 + norm(a) * norm(b)))
    return residual <= tol, residual


def derivation_pairing(a: Element, b: Element) -> np.ndarray:
    """Vector of pairings <a, D_k b> over the cached basis."""
    basis = derivation_basis(a.algebra)
    return tangent_stack(basis, b.coords) @ a.coords
