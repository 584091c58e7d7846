"""Derivative jets of scalar potentials up to fourth order.

A jet packages value, gradient, Hessian and the symmetric third/fourth
derivative tensors at a point.  These tensors are the sole input to all
curvature computations, so their index symmetries are enforced bitwise:
every entry of an orbit under index permutation is the same float.

The finite-difference path composes second-order central stencils per axis
(tensor products for mixed partials), so every derivative carries an O(h^2)
truncation error.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NotConvexHere, ZeroVector

# scale-aware positive-definiteness threshold: lambda_min > PD_RTOL*(1+lambda_max)
PD_RTOL = 1e-10


def symmetrize(T: np.ndarray) -> np.ndarray:
    """Return T with each permutation orbit set to the orbit mean (bitwise equal)."""
    T = np.asarray(T, dtype=float)
    k = T.ndim
    n = T.shape[0]
    out = np.empty_like(T)
    for idx in itertools.combinations_with_replacement(range(n), k):
        perms = set(itertools.permutations(idx))
        val = sum(T[p] for p in sorted(perms)) / len(perms)
        for p in perms:
            out[p] = val
    return out


def is_fully_symmetric(T: np.ndarray) -> bool:
    k = T.ndim
    return all(
        np.array_equal(T, np.transpose(T, perm))
        for perm in itertools.permutations(range(k))
    )


def pd_check(H: np.ndarray) -> tuple[bool, float, float]:
    """Scale-aware PD test; returns (ok, lambda_min, lambda_max)."""
    w = np.linalg.eigvalsh(H)
    lo, hi = float(w[0]), float(w[-1])
    return lo > PD_RTOL * (1.0 + abs(hi)), lo, hi


@dataclass
class PotentialJet:
    """Value and derivatives of a convex potential at one point."""

    x: np.ndarray
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    third: np.ndarray
    fourth: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def validate(self) -> "PotentialJet":
        """Check symmetry and strong convexity; raise NotConvexHere on failure."""
        ok, lo, hi = pd_check(self.hessian)
        if not ok:
            raise NotConvexHere(
                f"hessian at {self.x} has lambda_min={lo:.3e} (lambda_max={hi:.3e})"
            )
        return self

    def scaled(self, c: float) -> "PotentialJet":
        """Jet of c * psi at the same point."""
        return PotentialJet(
            x=self.x.copy(),
            value=c * self.value,
            gradient=c * self.gradient,
            hessian=c * self.hessian,
            third=c * self.third,
            fourth=c * self.fourth,
        )


# -- central finite-difference stencils (all second-order accurate) ----------

_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 0, 1), (-0.5, 0.0, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 0, 1, 2), (-0.5, 1.0, 0.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}

STENCIL_RADIUS = 2  # widest one-axis reach of the order<=4 stencils


def fd_partial(values: Callable[[np.ndarray], float], x: np.ndarray,
               orders: tuple[int, ...], h: float,
               cache: dict | None = None) -> float:
    """Mixed partial d^{|orders|} f / prod_i dx_i^{orders[i]} by tensor-product stencils."""
    x = np.asarray(x, dtype=float)
    axes = [a for a, o in enumerate(orders) if o > 0]
    offs = [_STENCILS[orders[a]][0] for a in axes]
    coefs = [_STENCILS[orders[a]][1] for a in axes]
    total = 0.0
    scale = h ** sum(orders)
    for combo in itertools.product(*(range(len(o)) for o in offs)):
        c = 1.0
        pt = x.copy()
        for which, ci in enumerate(combo):
            c *= coefs[which][ci]
            pt[axes[which]] += offs[which][ci] * h
        if c == 0.0:
            continue
        if cache is not None:
            key = tuple(pt.tolist())
            if key not in cache:
                cache[key] = values(pt)
            total += c * cache[key]
        else:
            total += c * values(pt)
    return total / scale


def fd_jet(values: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> PotentialJet:
    """Full jet of a scalar function by second-order central differences.

    The function is evaluated at O(5^k) stencil points per mixed partial;
    evaluations are cached across partials so each grid point is used once.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    cache: dict = {}
    value = values(x.copy())
    grad = np.empty(n)
    hess = np.empty((n, n))
    third = np.empty((n,) * 3)
    fourth = np.empty((n,) * 4)

    def orders_of(idx: tuple[int, ...]) -> tuple[int, ...]:
        o = [0] * n
        for i in idx:
            o[i] += 1
        return tuple(o)

    for i in range(n):
        grad[i] = fd_partial(values, x, orders_of((i,)), h, cache)
    for idx in itertools.combinations_with_replacement(range(n), 2):
        v = fd_partial(values, x, orders_of(idx), h, cache)
        for p in set(itertools.permutations(idx)):
            hess[p] = v
    for idx in itertools.combinations_with_replacement(range(n), 3):
        v = fd_partial(values, x, orders_of(idx), h, cache)
        for p in set(itertools.permutations(idx)):
            third[p] = v
    for idx in itertools.combinations_with_replacement(range(n), 4):
        v = fd_partial(values, x, orders_of(idx), h, cache)
        for p in set(itertools.permutations(idx)):
            fourth[p] = v
    return PotentialJet(x=x, value=value, gradient=grad, hessian=hess,
                        third=third, fourth=fourth)


# -- composite closed-form jet builders --------------------------------------

def jet_from_inner(x: np.ndarray, u: float, ui: np.ndarray, uij: np.ndarray,
                   uijk: np.ndarray, uijkl: np.ndarray,
                   f_derivs: tuple[float, float, float, float, float]) -> PotentialJet:
    """Jet of f(u(x)) from the jets of u and scalar derivatives f, f', .., f''''."""
    n = x.shape[0]
    f0, f1, f2, f3, f4 = f_derivs
    grad = f1 * ui
    hess = f2 * np.einsum("i,j->ij", ui, ui) + f1 * uij
    third = (
        f3 * np.einsum("i,j,k->ijk", ui, ui, ui)
        + f2 * (np.einsum("ij,k->ijk", uij, ui)
                + np.einsum("ik,j->ijk", uij, ui)
                + np.einsum("jk,i->ijk", uij, ui))
        + f1 * uijk
    )
    quad = np.einsum("i,j,k,l->ijkl", ui, ui, ui, ui)
    pair2 = (np.einsum("ij,kl->ijkl", uij, uij)
             + np.einsum("ik,jl->ijkl", uij, uij)
             + np.einsum("il,jk->ijkl", uij, uij))
    pair1 = (np.einsum("ij,k,l->ijkl", uij, ui, ui)
             + np.einsum("ik,j,l->ijkl", uij, ui, ui)
             + np.einsum("il,j,k->ijkl", uij, ui, ui)
             + np.einsum("jk,i,l->ijkl", uij, ui, ui)
             + np.einsum("jl,i,k->ijkl", uij, ui, ui)
             + np.einsum("kl,i,j->ijkl", uij, ui, ui))
    third1 = (np.einsum("ijk,l->ijkl", uijk, ui)
              + np.einsum("ijl,k->ijkl", uijk, ui)
              + np.einsum("ikl,j->ijkl", uijk, ui)
              + np.einsum("jkl,i->ijkl", uijk, ui))
    fourth = f4 * quad + f3 * pair1 + f2 * (pair2 + third1) + f1 * uijkl
    return PotentialJet(
        x=np.asarray(x, float),
        value=f0,
        gradient=grad,
        hessian=symmetrize(hess),
        third=symmetrize(third),
        fourth=symmetrize(fourth),
    )


def neg_log_jet(x: np.ndarray, u: float, ui: np.ndarray, uij: np.ndarray,
                uijk: np.ndarray | None = None,
                uijkl: np.ndarray | None = None) -> PotentialJet:
    """Jet of -log(u(x)); u must be positive at x."""
    n = np.asarray(x).shape[0]
    if uijk is None:
        uijk = np.zeros((n,) * 3)
    if uijkl is None:
        uijkl = np.zeros((n,) * 4)
    f = (-np.log(u), -1.0 / u, 1.0 / u**2, -2.0 / u**3, 6.0 / u**4)
    return jet_from_inner(np.asarray(x, float), u, ui, uij, uijk, uijkl, f)


def radial_r_jets(x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Jets of r(x) = |x| away from the origin."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ZeroVector("radial jets undefined at the origin")
    e = np.eye(n)
    ri = x / r
    rij = e / r - np.einsum("i,j->ij", x, x) / r**3
    rijk = (
        -(np.einsum("ij,k->ijk", e, x) + np.einsum("ik,j->ijk", e, x)
          + np.einsum("jk,i->ijk", e, x)) / r**3
        + 3.0 * np.einsum("i,j,k->ijk", x, x, x) / r**5
    )
    rijkl = (
        -(np.einsum("ij,kl->ijkl", e, e) + np.einsum("ik,jl->ijkl", e, e)
          + np.einsum("il,jk->ijkl", e, e)) / r**3
        + 3.0 * (np.einsum("ij,k,l->ijkl", e, x, x) + np.einsum("ik,j,l->ijkl", e, x, x)
                 + np.einsum("il,j,k->ijkl", e, x, x) + np.einsum("jk,i,l->ijkl", e, x, x)
                 + np.einsum("jl,i,k->ijkl", e, x, x) + np.einsum("kl,i,j->ijkl", e, x, x)) / r**5
        - 15.0 * np.einsum("i,j,k,l->ijkl", x, x, x, x) / r**7
    )
    return r, ri, rij, rijk, rijkl
