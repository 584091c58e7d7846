"""Potential-level flow d(psi)/dt = 2 log det Hess(psi) - lambda * psi on grids.

Periodic mode evolves the periodic part of psi = (1/2) x.A.x + u(x) on the
unit torus (the quadratic matrix evolves by dA/dt = -lambda A; for the
unnormalized flow it is constant).  Frozen-window mode evolves interior
nodes of a box window; the boundary ring of width 2 (the monitor stencil
radius) follows the linearly extrapolated interior update rather than the
PDE.  Holding the ring at its initial values instead is unconditionally
unstable whenever det Hess deviates from 1 (the interior drifts relative
to the ring by 2 log det per unit time, so the interface Hessian loses
positivity at a rate independent of the step size) and would break the
fixed-point property of det-constant potentials; the extrapolated ring is
the stable surrogate.  Because no boundary treatment is exact, the
monitored set retreats inward by the stencil radius per monitor epoch plus
a diffusive-front margin (see monitor_offset).

Spatial discretization is second-order central differences; time stepping
is the classical four-stage explicit scheme with the adaptive step

    dt = 0.25 * h^2 / (2 * max_nodes lambda_max(Hess^-1)),

the linearization being a heat equation with diffusion tensor 2 Hess^-1.

A single writer owns the state during a run; monitors act on snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _extrema
from .curvature import core_form, oab_trace, scalar
from .errors import (BadParams, IncompatibleMode, SingularHessian,
                     StabilityFailure)
from .jets import PotentialJet, pd_check, symmetrize
from .potentials import (GridPotential, PotentialHandle,
                         QuadraticPlusPeriodic, write_grid_file)

RING = 2  # boundary ring width == widest monitor stencil radius

CHANNELS = ("S_min", "S_max", "ABC_max", "ORTH_ABC_min", "H_pol_min",
            "O_max", "chen_residual", "hpol_bound_residual")


@dataclass
class GridSpec:
    shape: tuple[int, ...]
    spacing: float | None = None          # derived for torus: 1/shape[0]
    origin: np.ndarray | None = None      # window lower corner


@dataclass
class FlowState:
    mode: str                              # 'periodic' | 'frozen-window'
    u: np.ndarray                          # periodic part / window values
    spacing: float
    origin: np.ndarray
    quad: np.ndarray | None = None         # torus quadratic matrix
    t: float = 0.0
    lam: float = 0.0

    @property
    def n(self) -> int:
        return self.u.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.u.shape

    def node_coords(self, idx: tuple[int, ...]) -> np.ndarray:
        return self.origin + self.spacing * np.asarray(idx, dtype=float)

    def copy(self) -> "FlowState":
        return FlowState(mode=self.mode, u=self.u.copy(), spacing=self.spacing,
                         origin=self.origin.copy(),
                         quad=None if self.quad is None else self.quad.copy(),
                         t=self.t, lam=self.lam)


# -- stencil application over whole grids --------------------------------------

_D1 = {1: ((-1, 1), (-0.5, 0.5)),
       2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
       3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
       4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0))}


def _axis_derivative(u: np.ndarray, axis: int, order: int, h: float) -> np.ndarray:
    offs, coefs = _D1[order]
    out = np.zeros_like(u)
    for o, c in zip(offs, coefs):
        if o == 0:
            out += c * u
        else:
            out += c * np.roll(u, -o, axis=axis)
    return out / h**order


def grid_derivative(u: np.ndarray, orders: tuple[int, ...], h: float) -> np.ndarray:
    """Mixed partial with the given per-axis orders, periodic wrap.

    Window callers must discard a ring of width 2 where the wrap is invalid.
    """
    out = u
    for axis, order in enumerate(orders):
        if order:
            out = _axis_derivative(out, axis, order, h)
    return out


def _hessian_fields(state: FlowState):
    """Total Hessian entry fields on the grid (n = 1 or 2)."""
    h = state.spacing
    u = state.u
    if state.n == 1:
        base = 0.0 if state.quad is None else state.quad[0, 0]
        return (base + grid_derivative(u, (2,), h),)
    a = state.quad if state.quad is not None else np.zeros((2, 2))
    if state.mode == "frozen-window":
        a = np.zeros((2, 2))
    hxx = a[0, 0] + grid_derivative(u, (2, 0), h)
    hyy = a[1, 1] + grid_derivative(u, (0, 2), h)
    hxy = a[0, 1] + grid_derivative(u, (1, 1), h)
    return hxx, hyy, hxy


def _logdet_and_check(state: FlowState, fields) -> np.ndarray:
    interior = _interior_mask(state)
    if state.n == 1:
        (hxx,) = fields
        bad = (hxx <= 0.0) & interior
        if bad.any():
            node = tuple(int(v) for v in np.argwhere(bad)[0])
            raise StabilityFailure("Hessian lost positivity", node=node, time=state.t)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(interior, np.log(np.where(hxx > 0, hxx, 1.0)), 0.0)
    hxx, hyy, hxy = fields
    det = hxx * hyy - hxy * hxy
    bad = ((det <= 0.0) | (hxx <= 0.0) | ~np.isfinite(det)) & interior
    if bad.any():
        node = tuple(int(v) for v in np.argwhere(bad)[0])
        raise StabilityFailure("Hessian lost positive-definiteness",
                               node=node, time=state.t)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(interior, np.log(np.where(det > 0, det, 1.0)), 0.0)


def _interior_mask(state: FlowState) -> np.ndarray:
    if state.mode == "periodic":
        return np.ones(state.shape, dtype=bool)
    mask = np.zeros(state.shape, dtype=bool)
    sl = tuple(slice(RING, m - RING) for m in state.shape)
    mask[sl] = True
    return mask


# -- operations -----------------------------------------------------------------

def init(handle: PotentialHandle, grid: GridSpec, mode: str,
         lam: float = 0.0) -> FlowState:
    """Sample the potential on the grid and verify convexity everywhere."""
    if mode not in ("periodic", "frozen-window"):
        raise BadParams(f"unknown boundary mode {mode!r}")
    if mode == "periodic":
        if not isinstance(handle, QuadraticPlusPeriodic):
            raise IncompatibleMode(
                "periodic mode needs a quadratic-plus-periodic potential")
        m = grid.shape[0]
        if any(s != m for s in grid.shape):
            raise BadParams("torus grids must be square")
        spacing = 1.0 / m
        origin = np.zeros(handle.n)
        axes = [np.arange(s) * spacing for s in grid.shape]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        u = np.array([handle.periodic_value(p) for p in pts]).reshape(grid.shape)
        state = FlowState(mode=mode, u=u, spacing=spacing, origin=origin,
                          quad=handle.quad.copy(), lam=lam)
    else:
        if grid.spacing is None or grid.origin is None:
            raise BadParams("frozen-window mode needs spacing and origin")
        origin = np.asarray(grid.origin, dtype=float)
        axes = [origin[i] + np.arange(grid.shape[i]) * grid.spacing
                for i in range(len(grid.shape))]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        vals = np.array([handle.value(p) for p in pts]).reshape(grid.shape)
        state = FlowState(mode=mode, u=vals, spacing=float(grid.spacing),
                          origin=origin, quad=None, lam=lam)
    _logdet_and_check(state, _hessian_fields(state))  # NotConvex -> StabilityFailure
    return state


def adaptive_dt(state: FlowState) -> float:
    """0.25 h^2 / (2 max lambda_max(Hess^-1)) over checked nodes."""
    fields = _hessian_fields(state)
    interior = _interior_mask(state)
    if state.n == 1:
        lam_min = float(fields[0][interior].min())
    else:
        hxx, hyy, hxy = (f[interior] for f in fields)
        tr = hxx + hyy
        det = hxx * hyy - hxy * hxy
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        lam_min = float(((tr - disc) / 2.0).min())
    if lam_min <= 0.0 or not np.isfinite(lam_min):
        raise SingularHessian("degenerate Hessian: no stable step size")
    return 0.25 * state.spacing**2 / (2.0 / lam_min)


def _extend_ring(du: np.ndarray, ring: int = RING) -> np.ndarray:
    """Fill the boundary ring by linear extrapolation of the interior update."""
    out = du.copy()
    m0, m1 = out.shape
    for r in range(ring - 1, -1, -1):
        out[r, :] = 2.0 * out[r + 1, :] - out[r + 2, :]
        out[m0 - 1 - r, :] = 2.0 * out[m0 - 2 - r, :] - out[m0 - 3 - r, :]
    for r in range(ring - 1, -1, -1):
        out[:, r] = 2.0 * out[:, r + 1] - out[:, r + 2]
        out[:, m1 - 1 - r] = 2.0 * out[:, m1 - 2 - r] - out[:, m1 - 3 - r]
    return out


def _rhs(state: FlowState, u: np.ndarray, quad: np.ndarray | None):
    probe = FlowState(mode=state.mode, u=u, spacing=state.spacing,
                      origin=state.origin, quad=quad, t=state.t, lam=state.lam)
    logdet = _logdet_and_check(probe, _hessian_fields(probe))
    du = 2.0 * logdet - state.lam * np.where(_interior_mask(state), u, 0.0)
    if state.mode == "frozen-window":
        du = _extend_ring(du)
    dq = None if quad is None else -state.lam * quad
    return du, dq


def step(state: FlowState, dt: float | None = None) -> FlowState:
    """One four-stage explicit step; frozen ring (window mode) is untouched."""
    if dt is None:
        dt = adaptive_dt(state)
    u, q = state.u, state.quad
    k1u, k1q = _rhs(state, u, q)

    def adv(field, k, frac):
        return field + frac * dt * k

    def advq(field, k, frac):
        return None if field is None else field + frac * dt * k

    k2u, k2q = _rhs(state, adv(u, k1u, 0.5), advq(q, k1q, 0.5))
    k3u, k3q = _rhs(state, adv(u, k2u, 0.5), advq(q, k2q, 0.5))
    k4u, k4q = _rhs(state, adv(u, k3u, 1.0), advq(q, k3q, 1.0))
    new_u = u + (dt / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
    new_q = None if q is None else q + (dt / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
    if not np.all(np.isfinite(new_u)):
        node = tuple(int(v) for v in np.argwhere(~np.isfinite(new_u))[0])
        raise StabilityFailure("non-finite values", node=node, time=state.t)
    out = FlowState(mode=state.mode, u=new_u, spacing=state.spacing,
                    origin=state.origin, quad=new_q, t=state.t + dt, lam=state.lam)
    _logdet_and_check(out, _hessian_fields(out))
    return out


# -- grid jets and monitors -------------------------------------------------------

_JET_ORDERS_2D = {
    "grad": ((1, 0), (0, 1)),
    "hess": ((2, 0), (1, 1), (0, 2)),
    "third": ((3, 0), (2, 1), (1, 2), (0, 3)),
    "fourth": ((4, 0), (3, 1), (2, 2), (1, 3), (0, 4)),
}


def grid_jets(state: FlowState) -> dict:
    """All derivative fields needed for curvature monitoring (n = 2)."""
    if state.n != 2:
        raise BadParams("curvature monitoring is implemented for n = 2 grids")
    h = state.spacing
    u = state.u
    fields = {}
    for group, orders in _JET_ORDERS_2D.items():
        for o in orders:
            fields[o] = grid_derivative(u, o, h)
    return fields


def jet_at_node(state: FlowState, fields: dict, idx: tuple[int, int]) -> PotentialJet:
    a = state.quad if (state.quad is not None and state.mode == "periodic") \
        else np.zeros((2, 2))
    x = state.node_coords(idx)
    grad = np.array([fields[(1, 0)][idx], fields[(0, 1)][idx]])
    if state.quad is not None and state.mode == "periodic":
        grad = grad + a @ x
    hess = np.array([
        [a[0, 0] + fields[(2, 0)][idx], a[0, 1] + fields[(1, 1)][idx]],
        [a[0, 1] + fields[(1, 1)][idx], a[1, 1] + fields[(0, 2)][idx]],
    ])
    third = np.empty((2, 2, 2))
    third[0, 0, 0] = fields[(3, 0)][idx]
    third[1, 1, 1] = fields[(0, 3)][idx]
    v = fields[(2, 1)][idx]
    third[0, 0, 1] = third[0, 1, 0] = third[1, 0, 0] = v
    v = fields[(1, 2)][idx]
    third[0, 1, 1] = third[1, 0, 1] = third[1, 1, 0] = v
    fourth = np.empty((2, 2, 2, 2))
    table = {4: fields[(4, 0)][idx], 3: fields[(3, 1)][idx],
             2: fields[(2, 2)][idx], 1: fields[(1, 3)][idx],
             0: fields[(0, 4)][idx]}
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    zeros = 4 - (i + j + k + l)
                    fourth[i, j, k, l] = table[zeros]
    value = float(state.u[idx])
    if state.quad is not None and state.mode == "periodic":
        value += 0.5 * float(x @ a @ x)
    ok, lo, hi = pd_check(hess)
    if not ok:
        raise StabilityFailure(
            f"monitored node lost convexity (lambda_min={lo:.3e})",
            node=idx, time=state.t)
    return PotentialJet(x=x, value=value, gradient=grad, hessian=symmetrize(hess),
                        third=third, fourth=fourth)


def monitor_offset(state0: FlowState, epoch: int, elapsed: float,
                   kappa: float = 1.25) -> int:
    """Depth (in nodes) excluded from monitoring in window mode.

    The ring error spreads diffusively with coefficient bounded by
    2 max lambda_max(Hess^-1), so the monitored set retreats by the stencil
    radius per epoch plus kappa standard deviations of the heat kernel.
    """
    if state0.mode == "periodic":
        return 0
    fields = _hessian_fields(state0)
    interior = _interior_mask(state0)
    if state0.n == 1:
        lam_min = float(fields[0][interior].min())
    else:
        hxx, hyy, hxy = (f[interior] for f in fields)
        tr = hxx + hyy
        det = hxx * hyy - hxy * hxy
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        lam_min = float(((tr - disc) / 2.0).min())
    diffusion = 2.0 / lam_min
    spread = kappa * np.sqrt(2.0 * diffusion * max(elapsed, 0.0)) / state0.spacing
    return RING * (1 + epoch) + int(np.ceil(spread))


def monitor_nodes(state: FlowState, per_axis: int, offset: int) -> list[tuple[int, int]]:
    """Evenly spread sample nodes at depth >= offset from the window edge."""
    lo = 0 if state.mode == "periodic" else offset
    out = []
    for m in state.shape:
        hi = m if state.mode == "periodic" else m - offset
        if hi - lo < 1:
            raise StabilityFailure("monitored window shrank to nothing",
                                   time=state.t)
        out.append(np.unique(np.linspace(lo, hi - 1, per_axis).astype(int)))
    return [(int(i), int(j)) for i in out[0] for j in out[1]]


@dataclass
class MonitorSeries:
    times: list = field(default_factory=list)
    channels: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)

    def record(self, t: float, values: dict):
        self.times.append(t)
        for k, v in values.items():
            self.channels.setdefault(k, []).append(v)

    def channel(self, name: str) -> np.ndarray:
        return np.asarray(self.channels[name])

    def to_csv(self, path, order: tuple = CHANNELS):
        cols = [c for c in order if c in self.channels]
        with open(path, "w") as fh:
            fh.write("t," + ",".join(cols) + "\n")
            for i, t in enumerate(self.times):
                row = [repr(float(t))]
                row += [repr(float(self.channels[c][i])) for c in cols]
                fh.write(",".join(row) + "\n")


def _channel_values(state: FlowState, nodes, n_angles: int = 240,
                    seed: int = 0) -> dict:
    fields = grid_jets(state)
    S_vals, abc_max, orth_min, hpol_min, o_vals = [], [], [], [], []
    for idx in nodes:
        sample = core_form(jet_at_node(state, fields, idx))
        Ef = sample.E_frame
        S_vals.append(scalar(sample))
        mx, _ = _extrema.pair_extrema(Ef, orth=False, n_angles=n_angles, seed=seed)
        abc_max.append(mx.value)
        _, omn = _extrema.pair_extrema(Ef, orth=True, n_angles=n_angles, seed=seed)
        orth_min.append(omn.value)
        _, hmn = _extrema.quartic_extrema(Ef, n_angles=n_angles, seed=seed)
        hpol_min.append(hmn.value)
        o_vals.append(oab_trace(sample))
    return {
        "S_min": float(np.min(S_vals)), "S_max": float(np.max(S_vals)),
        "ABC_max": float(np.max(abc_max)),
        "ORTH_ABC_min": float(np.min(orth_min)),
        "H_pol_min": float(np.min(hpol_min)),
        "O_max": float(np.max(o_vals)),
    }


def run(state: FlowState, T: float, monitors: tuple = CHANNELS,
        sample_per_axis: int = 5, monitor_epochs: int = 10,
        n_angles: int = 240, dt: float | None = None) -> tuple[FlowState, MonitorSeries]:
    """Advance to time T, recording monitor channels every few steps.

    chen_residual is S_min + n/(t + n/K) with K = -(initial S_min) when that
    is positive, else the K -> infinity limit S_min + n/t.  On a stability
    failure the exception carries the partial series.
    """
    if T <= state.t:
        raise BadParams("run needs T > current time")
    if dt is None:
        dt = adaptive_dt(state)
    steps = max(1, int(np.ceil((T - state.t) / dt)))
    dt = (T - state.t) / steps
    every = max(1, steps // monitor_epochs)
    series = MonitorSeries()
    n = state.n
    state0 = state

    def observe(st: FlowState, epoch: int):
        offset = monitor_offset(state0, epoch, st.t - state0.t)
        nodes = monitor_nodes(st, sample_per_axis, offset)
        vals = _channel_values(st, nodes, n_angles=n_angles)
        if series.times:
            K = series.labels["K"]
        else:
            s0 = vals["S_min"]
            K = -s0 if s0 < -1e-12 else np.inf
            series.labels["K"] = K
        shift = n / K if np.isfinite(K) else 0.0
        t_rel = st.t - series.labels.get("t0", st.t)
        if not series.times:
            series.labels["t0"] = st.t
            t_rel = 0.0
        denom = t_rel + shift
        vals["chen_residual"] = vals["S_min"] + (n / denom if denom > 0 else np.inf)
        bound = (n / denom if denom > 0 else np.inf) + 2.0 * max(vals["O_max"], 0.0)
        vals["hpol_bound_residual"] = (vals["H_pol_min"] / bound
                                       if np.isfinite(bound) and bound > 0 else 0.0)
        series.record(st.t, {k: v for k, v in vals.items() if k in monitors or k in
                             ("S_min",)})

    epoch = 0
    observe(state, epoch)
    try:
        for k in range(1, steps + 1):
            state = step(state, dt)
            if k % every == 0 or k == steps:
                epoch += 1
                observe(state, epoch)
    except StabilityFailure as exc:
        exc.partial_series = series
        raise
    return state, series


@dataclass
class KrVerdict:
    regular: bool
    epsilon: float
    first_violation: tuple | None
    series: MonitorSeries

    @property
    def label(self) -> str:
        if self.regular:
            return f"KR-WEAKLY-REGULAR({self.epsilon:g})"
        t, v = self.first_violation
        return f"VIOLATION(t={t:g}, ORTH_ABC_min={v:.3e})"


def kr_probe(handle: PotentialHandle, eps: float, grid: GridSpec,
             mode: str = "frozen-window", sample_per_axis: int = 5,
             tol: float = 1e-6, monitor_epochs: int = 8) -> KrVerdict:
    """Run the flow to time eps and test the orthogonal-pair minimum.

    Verdict is weakly regular when ORTH_ABC_min >= -tol at every recorded
    positive time; otherwise the first violating time is reported.
    """
    state = init(handle, grid, mode)
    _, series = run(state, eps, sample_per_axis=sample_per_axis,
                    monitor_epochs=monitor_epochs)
    times = np.asarray(series.times)
    vals = series.channel("ORTH_ABC_min")
    for t, v in zip(times[1:], vals[1:]):  # positive times only
        if v < -tol:
            return KrVerdict(False, eps, (float(t), float(v)), series)
    return KrVerdict(True, eps, None, series)


def save_checkpoint(state: FlowState, path) -> None:
    """Window checkpoints reuse the grid-potential text format plus a t header."""
    if state.mode != "frozen-window":
        raise BadParams("checkpoints are for frozen-window states")
    write_grid_file(path, state.origin, state.spacing, state.u, t=state.t)


def to_grid_potential(state: FlowState, name: str = "flow-checkpoint") -> GridPotential:
    if state.mode != "frozen-window":
        raise BadParams("grid potentials are extracted from window states")
    return GridPotential(state.origin, state.spacing, state.u, name=name)
