"""Algebraic curvature tensors and the reaction side of the flow.

Tensors live in a unitary polarized frame (reference metric = identity)
and carry the symmetries A[ijkl] = A[kjil] = A[ilkj] = A[jilk].  The
reaction quadratic

    Q(A)[ijkl] = 2 (A[ijpq] A[qpkl] + A[ilpq] A[qpkj] - A[ipkq] A[pjql])

drives the tensor ODE dA/dt = Q(A).  Boundary tensors for the null-vector
suites are produced by the shift A - m * (I x I) that moves the pair
maximum of A(v,w,v,w) to zero while keeping the maximizing pair fixed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _extrema
from .curvature import CurvatureSample, mirror_symmetrize, symmetry_defect
from .errors import (BadParams, BlowUp, NotExtremal, NotNegativeABC, NotPSD,
                     StabilityFailure)

BLOWUP_CAP = 1e12


@dataclass
class AlgCurvTensor:
    """Dimension-n algebraic curvature tensor in a unitary polarized frame."""

    A: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim != 4 or len(set(self.A.shape)) != 1:
            raise BadParams("tensor must have shape (n, n, n, n)")
        if not np.all(np.isfinite(self.A)):
            raise BadParams("tensor entries must be finite")
        if symmetry_defect(self.A) > 0:
            self.A = mirror_symmetrize(self.A)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def norm(self) -> float:
        return float(np.abs(self.A).max())

    def pair_value(self, v: np.ndarray, w: np.ndarray) -> float:
        return _extrema.pair_value(self.A, v, w)

    @classmethod
    def random(cls, n: int, seed: int, scale: float = 1.0) -> "AlgCurvTensor":
        rng = np.random.default_rng(seed)
        raw = rng.normal(size=(n,) * 4) * scale
        return cls(mirror_symmetrize(raw))

    @classmethod
    def from_sample(cls, sample: CurvatureSample) -> "AlgCurvTensor":
        return cls(sample.E_frame.copy())

    # -- canonical text serialization ----------------------------------------

    def to_text(self) -> str:
        lines = [str(self.n)]
        for idx in canonical_indices(self.n):
            lines.append(" ".join(map(str, idx)) + " " + repr(float(self.A[idx])))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "AlgCurvTensor":
        rows = [ln for ln in text.splitlines() if ln.strip()]
        n = int(rows[0])
        A = np.zeros((n,) * 4)
        for ln in rows[1:]:
            toks = ln.split()
            idx = tuple(int(t) for t in toks[:4])
            val = float(toks[4])
            for p in _class_orbit(idx):
                A[p] = val
        return cls(A)


def _class_orbit(idx):
    i, j, k, l = idx
    orbit = {(i, j, k, l)}
    frontier = set(orbit)
    while frontier:
        nxt = set()
        for (a, b, c, d) in frontier:
            for q in ((c, b, a, d), (a, d, c, b), (b, a, d, c)):
                if q not in orbit:
                    orbit.add(q)
                    nxt.add(q)
        frontier = nxt
    return orbit


def canonical_indices(n: int) -> list[tuple[int, int, int, int]]:
    """Lexicographically-least representative of each symmetry orbit."""
    reps = []
    seen = set()
    for idx in itertools.product(range(n), repeat=4):
        if idx in seen:
            continue
        orbit = _class_orbit(idx)
        seen |= orbit
        reps.append(min(orbit))
    return sorted(reps)


def identity_shift_tensor(n: int) -> np.ndarray:
    """T[ijkl] = delta_ik delta_jl; adds t |v|^2 |w|^2 to every pair value."""
    eye = np.eye(n)
    return np.einsum("ik,jl->ijkl", eye, eye)


# -- reaction quadratic and ODE -------------------------------------------------

def q_quadratic(A: AlgCurvTensor) -> AlgCurvTensor:
    """Reaction quadratic Q(A); output re-symmetrized onto the class."""
    T = A.A
    t1 = np.einsum("ijpq,qpkl->ijkl", T, T)
    t2 = np.einsum("ilpq,qpkj->ijkl", T, T)
    t3 = np.einsum("ipkq,pjql->ijkl", T, T)
    Q = 2.0 * (t1 + t2 - t3)
    drift = symmetry_defect(Q)
    out = AlgCurvTensor(mirror_symmetrize(Q))
    out_drift = drift / max(A.norm**2, 1e-300)
    if out_drift > 1e-10:
        raise BadParams(f"reaction quadratic left the symmetry class: {out_drift:.3e}")
    return out


@dataclass
class OdeTrajectory:
    times: list[float]
    tensors: list[AlgCurvTensor]
    max_symmetry_drift: float = 0.0

    def final(self) -> AlgCurvTensor:
        return self.tensors[-1]


def integrate_ode(A0: AlgCurvTensor, T: float, dt: float,
                  record_every: int = 1) -> OdeTrajectory:
    """Classical 4-stage integration of dA/dt = Q(A).

    Each accepted step is re-symmetrized; the worst drift is logged on the
    trajectory.  Raises BlowUp (with the partial trajectory attached) when
    any entry exceeds 1e12 or turns non-finite.
    """
    if dt <= 0:
        raise BadParams("dt must be positive")
    steps = int(np.ceil(T / dt))
    A = A0.A.copy()
    t = 0.0
    traj = OdeTrajectory([0.0], [AlgCurvTensor(A.copy())])

    def rhs(M):
        t1 = np.einsum("ijpq,qpkl->ijkl", M, M)
        t2 = np.einsum("ilpq,qpkj->ijkl", M, M)
        t3 = np.einsum("ipkq,pjql->ijkl", M, M)
        return 2.0 * (t1 + t2 - t3)

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, steps + 1):
            h = min(dt, T - t)
            k1 = rhs(A)
            k2 = rhs(A + 0.5 * h * k1)
            k3 = rhs(A + 0.5 * h * k2)
            k4 = rhs(A + h * k3)
            A = A + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            if (not np.all(np.isfinite(A))) or np.abs(A).max() > BLOWUP_CAP:
                raise BlowUp(t, traj)
            drift = symmetry_defect(A)
            traj.max_symmetry_drift = max(traj.max_symmetry_drift, drift)
            if drift > 1e-13 * max(1.0, float(np.abs(A).max())):
                raise StabilityFailure(
                    f"symmetry drift {drift:.3e} beyond tolerance", time=t)
            A = mirror_symmetrize(A)
            if step % record_every == 0 or t >= T:
                traj.times.append(t)
                traj.tensors.append(AlgCurvTensor(A.copy()))
    return traj


# -- extremal pairs and boundary construction -----------------------------------

MAX_ABC = "MAX_ABC"
MIN_ORTH_ABC = "MIN_ORTH_ABC"


def extremal_pair(A: AlgCurvTensor, mode: str, n_angles: int = 720,
                  restarts: int = 64, seed: int = 0):
    """Extremize A(v, w, v, w) over unit pairs; returns (v, w, value)."""
    if mode == MAX_ABC:
        mx, _ = _extrema.pair_extrema(A.A, orth=False, n_angles=n_angles,
                                      restarts=restarts, seed=seed)
        return mx.v, mx.w, mx.value
    if mode == MIN_ORTH_ABC:
        _, mn = _extrema.pair_extrema(A.A, orth=True, n_angles=n_angles,
                                      restarts=restarts, seed=seed)
        return mn.v, mn.w, mn.value
    raise BadParams(f"unknown extremal mode {mode!r}")


def shift_to_boundary(A: AlgCurvTensor, mode: str = MAX_ABC,
                      n_angles: int = 720, restarts: int = 64, seed: int = 0):
    """Shift A along I x I so the selected extremum lands exactly at zero.

    Returns (boundary tensor, v, w).  The shift changes every pair value by
    the same amount on unit pairs, so the witness pair is preserved.
    """
    v, w, val = extremal_pair(A, mode, n_angles, restarts, seed)
    shifted = AlgCurvTensor(A.A - val * identity_shift_tensor(A.n))
    return shifted, v, w


# -- null-vector verification ----------------------------------------------------

@dataclass
class NullVectorReport:
    v: np.ndarray
    w: np.ndarray
    witness_value: float
    first_derivative_residual: float
    hform_min_eig: float
    q_value: float
    sharper_value: float
    scale: float
    passed: bool = field(init=False)
    identity_tol: float = field(init=False)
    q_tol: float = field(init=False)
    psd_tol: float = field(init=False)

    def __post_init__(self):
        self.identity_tol = 1e-7 * max(self.scale, 1e-300)
        self.q_tol = 1e-8 * max(self.scale**2, 1e-300)
        self.psd_tol = 1e-8 * max(self.scale, 1.0)
        self.passed = (
            self.first_derivative_residual < self.identity_tol
            and self.hform_min_eig > -self.psd_tol
            and self.q_value <= self.q_tol
            and self.sharper_value <= self.q_tol
        )


def hform_blocks(A: AlgCurvTensor, v: np.ndarray, w: np.ndarray):
    """M1, M2, N of the boundary bilinear form; G1 = [[M1,N],[N^T,M2]]."""
    T = A.A
    M1 = -np.einsum("ijkl,j,l->ik", T, w, w)
    M2 = -np.einsum("ijkl,i,k->jl", T, v, v)
    N = -2.0 * np.einsum("ijkl,i,j->kl", T, v, w)
    return M1, M2, N


def assemble_block(M1, M2, N) -> np.ndarray:
    n = M1.shape[0]
    G = np.zeros((2 * n, 2 * n))
    G[:n, :n] = M1
    G[:n, n:] = N
    G[n:, :n] = N.T
    G[n:, n:] = M2
    return G


def null_vector_check_negative(A: AlgCurvTensor, n_angles: int = 720,
                               restarts: int = 64, seed: int = 0) -> NullVectorReport:
    """Verify the boundary structure at the pair maximum of a non-positive tensor.

    Requires the maximum of A(v,w,v,w) over unit pairs to sit inside the
    degenerate band around zero (NotExtremal otherwise).  Checks, at the
    witness (V, W): vanishing of the directional first derivatives, negative
    semidefiniteness of the boundary bilinear form, the sign of Q at the
    witness, and the sharper inequality Q + <M1, M2> <= 0.
    """
    scale = A.norm
    v, w, val = extremal_pair(A, MAX_ABC, n_angles, restarts, seed)
    band = 1e-9 * (1.0 + scale)
    if abs(val) > band:
        raise NotExtremal(
            f"pair maximum {val:.3e} is not inside the degenerate band {band:.3e}")
    T = A.A
    c = np.einsum("ijkl,i,k,l->j", T, v, v, w)
    d = np.einsum("ijkl,j,k,l->i", T, w, v, w)
    resid = max(np.abs(c).max(), np.abs(d).max())
    M1, M2, N = hform_blocks(A, v, w)
    G = assemble_block(M1, M2, N)
    min_eig = float(np.linalg.eigvalsh(G)[0])
    q = q_quadratic(A)
    qv = q.pair_value(v, w)
    sharper = qv + float(np.sum(M1 * M2))
    return NullVectorReport(v=v, w=w, witness_value=val,
                            first_derivative_residual=float(resid),
                            hform_min_eig=min_eig, q_value=qv,
                            sharper_value=sharper, scale=scale)


# -- block trace lemma -----------------------------------------------------------

@dataclass
class BlockMatrixInstance:
    M1: np.ndarray
    M2: np.ndarray
    N: np.ndarray

    @property
    def G1(self) -> np.ndarray:
        return assemble_block(self.M1, self.M2, self.N)

    @classmethod
    def random(cls, n: int, seed: int, rank: int | None = None) -> "BlockMatrixInstance":
        """G1 = B^T B for uniform B; rank-deficient B covers boundary cases."""
        rng = np.random.default_rng(seed)
        rows = 2 * n if rank is None else rank
        B = rng.uniform(-1.0, 1.0, size=(rows, 2 * n))
        G = B.T @ B
        return cls(M1=G[:n, :n].copy(), M2=G[n:, n:].copy(), N=G[:n, n:].copy())


def trace_lemma(instance: BlockMatrixInstance) -> float:
    """Tr(M1 M2 - N^2) for a PSD block instance.

    Verifies the PSD precondition (eigenvalues >= -1e-12 * scale) and the
    rotation similarity between [[M1,N],[N^T,M2]] and [[M2,-N^T],[-N,M1]]
    (characteristic polynomials agree to 1e-9 relative).
    """
    G1 = instance.G1
    scale = max(np.abs(G1).max(), 1.0)
    if float(np.linalg.eigvalsh(G1)[0]) < -1e-12 * scale:
        raise NotPSD("block matrix is not positive semidefinite")
    n = instance.M1.shape[0]
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    G2 = assemble_block(instance.M2, instance.M1, -instance.N.T)
    sim = J @ G1 @ J.T
    if np.abs(sim - G2).max() > 1e-12 * scale:
        raise NotPSD("rotation similarity identity failed")
    p1 = np.poly(np.linalg.eigvalsh(G1))
    p2 = np.poly(np.linalg.eigvalsh(G2))
    pscale = max(np.abs(p1).max(), 1.0)
    if np.abs(p1 - p2).max() > 1e-9 * pscale:
        raise NotPSD("characteristic polynomials of similar blocks diverged")
    return float(np.trace(instance.M1 @ instance.M2 - instance.N @ instance.N))


# -- probe for sign failure of Q on the orthogonal boundary in n >= 3 ------------

@dataclass
class NoabCounterexample:
    tensor: AlgCurvTensor
    v: np.ndarray
    w: np.ndarray
    q_value: float
    orth_min_after_shift: float
    trial: int


def noab_probe(n: int, seed: int, trials: int, q_threshold: float = -1e-6,
               n_angles: int = 256, restarts: int = 24) -> NoabCounterexample | None:
    """Search boundary tensors (orthogonal pair minimum shifted to zero) for
    a witness pair where Q is decisively negative.

    Each trial draws a random tensor, shifts its orthogonal-pair minimum to
    zero, and evaluates Q at the vanishing pair.  A hit is re-verified with
    a finer extremization before being returned.
    """
    if trials < 1:
        raise BadParams("trials must be >= 1")
    rng = np.random.default_rng(seed)
    for trial in range(trials):
        sub = int(rng.integers(0, 2**63 - 1))
        A = AlgCurvTensor.random(n, sub)
        shifted, v, w = shift_to_boundary(A, MIN_ORTH_ABC, n_angles=n_angles,
                                          restarts=restarts, seed=sub)
        qv = q_quadratic(shifted).pair_value(v, w)
        if qv < q_threshold:
            # verify the boundary quality with a stronger search
            _, _, vmin = extremal_pair(shifted, MIN_ORTH_ABC, n_angles=1024,
                                       restarts=max(96, 4 * restarts), seed=sub + 1)
            band = 1e-8 * (1.0 + shifted.norm)
            if vmin > -band:
                return NoabCounterexample(tensor=shifted, v=v, w=w, q_value=qv,
                                          orth_min_after_shift=float(vmin),
                                          trial=trial)
    return None


def noab_3d_probe(seed: int, trials: int,
                  q_threshold: float = -1e-6) -> NoabCounterexample | None:
    return noab_probe(3, seed, trials, q_threshold)


# -- componentwise control from sectional and orthogonal bounds ------------------

@dataclass
class PolarizationReport:
    bound_by_class: dict
    worst_margin: float
    violations: list
    passed: bool


def polarization_bounds(A: AlgCurvTensor, H_bound: float, O_bound: float,
                        check_sign: bool = True) -> PolarizationReport:
    """Check every component of a non-positive tensor against the chained
    bounds implied by |A(v,v,v,v)| <= H_bound (unit v) and
    |A(v,w,v,w)| <= O_bound (unit orthogonal pairs).

    The chain bounds successively wider index patterns by polarization:
      two-index pattern (a,a,a,b)                -> sqrt(H*O)
      bisectional pattern (a,a,b,b)/(a,b,b,a)    -> 1.5 H + 0.5 O + 2 sqrt(H*O)
      one-shared-index pattern (a,a,b,c)          -> (H + 7 O + 4 sqrt(H*O)) / 4
      all-distinct pattern (a,b,c,d)              -> 3 O
    each obtained from the discriminant of a sign-constrained quadratic or
    from evaluating the quartic at the corners t, s = +-1.
    """
    if H_bound < 0 or O_bound < 0:
        raise BadParams("bounds must be nonnegative")
    if check_sign:
        _, _, vmax = extremal_pair(A, MAX_ABC)
        if vmax > 1e-9 * (1.0 + A.norm):
            raise NotNegativeABC(f"pair maximum {vmax:.3e} is positive")
    H, O = float(H_bound), float(O_bound)
    root = np.sqrt(H * O)
    b_ho = root
    b2 = 1.5 * H + 0.5 * O + 2.0 * root
    b3 = 0.25 * H + 1.75 * O + root
    b4 = 3.0 * O
    tol = 1e-9 * (1.0 + A.norm)

    def class_bound(idx) -> tuple[str, float]:
        i, j, k, l = idx
        P = tuple(sorted((i, k)))
        Qm = tuple(sorted((j, l)))
        distinct = len(set(idx))
        if distinct == 1:
            return "sectional", H
        if distinct == 2:
            if P[0] == P[1] and Qm[0] == Qm[1]:
                return "orthogonal", O
            if P == Qm:
                return "bisectional", b2
            return "two-index-polar", b_ho
        if distinct == 3:
            if P[0] == P[1] or Qm[0] == Qm[1]:
                return "step-one", O
            return "one-shared", b3
        return "all-distinct", b4

    worst = -np.inf
    violations = []
    by_class: dict = {}
    for idx in canonical_indices(A.n):
        cname, bound = class_bound(idx)
        margin = abs(float(A.A[idx])) - bound
        worst = max(worst, margin)
        prev = by_class.get(cname, (-np.inf, None))
        if margin > prev[0]:
            by_class[cname] = (margin, idx)
        if margin > tol:
            violations.append((idx, float(A.A[idx]), bound))
    return PolarizationReport(bound_by_class=by_class, worst_margin=float(worst),
                              violations=violations, passed=not violations)
