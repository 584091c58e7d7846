import numpy as np
import pytest

from hesselab import flow
from hesselab.errors import (BadParams, IncompatibleMode, SingularHessian,
                             StabilityFailure)
from hesselab.potentials import (GridPotential, catalog, quadratic,
                                 read_grid_file)


def torus(m=32):
    return flow.GridSpec(shape=(m, m))


def ball_window():
    return flow.GridSpec(shape=(40, 40), spacing=0.025,
                         origin=np.array([-0.5, -0.5]))


def radial_window():
    return flow.GridSpec(shape=(44, 44), spacing=0.028,
                         origin=np.array([0.35, -0.55]))


# -- init / dt ----------------------------------------------------------------------

def test_init_quadratic_torus_unit_det():
    state = flow.init(quadratic(2), torus(64), "periodic")
    hxx, hyy, hxy = flow._hessian_fields(state)
    det = hxx * hyy - hxy * hxy
    assert np.allclose(det, 1.0, atol=1e-12)


def test_init_perturbed_torus_valid():
    handle = catalog("quadratic_plus_periodic", amplitude=0.05)
    state = flow.init(handle, torus(32), "periodic")
    assert state.t == 0.0


def test_init_window_valid(ball2):
    state = flow.init(ball2, ball_window(), "frozen-window")
    assert state.mode == "frozen-window"


def test_incompatible_mode(ball2):
    with pytest.raises(IncompatibleMode):
        flow.init(ball2, torus(16), "periodic")
    with pytest.raises(BadParams):
        flow.init(quadratic(2), torus(16), "no-such-mode")


def test_adaptive_dt_formula():
    state = flow.init(quadratic(2), torus(64), "periodic")
    assert flow.adaptive_dt(state) == pytest.approx(0.25 / (2 * 64**2), rel=1e-12)
    doubled = flow.init(quadratic(2, quad=2.0 * np.eye(2)), torus(64), "periodic")
    assert flow.adaptive_dt(doubled) == pytest.approx(0.25 / 64**2, rel=1e-12)


def test_adaptive_dt_singular():
    degenerate = flow.FlowState(mode="frozen-window", u=np.zeros((12, 12)),
                                spacing=0.1, origin=np.zeros(2))
    with pytest.raises(SingularHessian):
        flow.adaptive_dt(degenerate)


# -- stepping ------------------------------------------------------------------------

def test_quadratic_exactly_stationary():
    state = flow.init(quadratic(2), torus(64), "periodic")
    out = state
    for _ in range(20):
        out = flow.step(out)
    assert np.abs(out.u - state.u).max() == 0.0


def test_constant_hessian_uniform_drift():
    c = 2.0
    state = flow.init(quadratic(2, quad=c * np.eye(2)), torus(32), "periodic")
    dt = 1e-4
    out = state
    for _ in range(10):
        out = flow.step(out, dt)
    expect = 2 * 2 * np.log(c) * out.t  # 2 n t log c, n = 2
    assert np.abs(out.u - state.u - expect).max() < 1e-12


@pytest.mark.parametrize("wave,k2", [((1, 0), 1.0), ((1, 1), 2.0)])
def test_linearized_decay_rates(wave, k2):
    """Small periodic perturbations decay at 8 pi^2 |k|^2 within 5%."""
    eps = 1e-4
    amp = eps * (2 * np.pi) ** 2 * k2
    handle = catalog("quadratic_plus_periodic", amplitude=amp, wave=wave)
    state = flow.init(handle, torus(64), "periodic")
    k = np.asarray(wave, dtype=float)
    axes = [np.arange(64) / 64.0 for _ in range(2)]
    mesh = np.meshgrid(*axes, indexing="ij")
    phase = 2 * np.pi * (k[0] * mesh[0] + k[1] * mesh[1])
    mode = np.cos(phase)

    def amplitude(st):
        return 2.0 * float(np.mean(st.u * mode))

    a0 = amplitude(state)
    T = 0.004 / k2
    steps = int(np.ceil(T / flow.adaptive_dt(state)))
    out = state
    dt = T / steps
    for _ in range(steps):
        out = flow.step(out, dt)
    a1 = amplitude(out)
    rate = np.log(a0 / a1) / out.t
    assert rate == pytest.approx(8 * np.pi**2 * k2, rel=0.05)


def test_step_counts_time():
    state = flow.init(quadratic(2), torus(16), "periodic")
    out = flow.step(state, 1e-3)
    assert out.t == pytest.approx(1e-3)
    assert state.t == 0.0  # input state untouched


# -- runs and monitors ------------------------------------------------------------------

def test_run_quadratic_channels_zero_and_chen_guard():
    state = flow.init(quadratic(2), torus(32), "periodic")
    _, series = flow.run(state, 0.01, monitor_epochs=3, sample_per_axis=3)
    for ch in ("S_min", "S_max", "ABC_max", "ORTH_ABC_min", "H_pol_min", "O_max"):
        assert np.allclose(series.channel(ch), 0.0, atol=1e-10)
    chen = series.channel("chen_residual")
    assert np.isinf(chen[0])      # K -> infinity guard at t = 0
    assert np.all(chen[1:] > 0)   # n / t with S_min = 0


def test_run_stationarity_of_curvature_channels():
    """det-constant potentials: every curvature channel constant to 1e-10."""
    state = flow.init(quadratic(2, quad=np.diag([2.0, 0.5])), torus(32), "periodic")
    _, series = flow.run(state, 0.01, monitor_epochs=4, sample_per_axis=3)
    for ch in ("S_min", "S_max", "ABC_max", "ORTH_ABC_min", "H_pol_min", "O_max"):
        vals = series.channel(ch)
        assert np.abs(vals - vals[0]).max() < 1e-10


def test_run_chen_bound_perturbed_torus():
    handle = catalog("quadratic_plus_periodic", amplitude=0.05)
    state = flow.init(handle, torus(32), "periodic")
    _, series = flow.run(state, 0.05, monitor_epochs=5, sample_per_axis=4)
    assert series.channel("chen_residual")[1:].min() >= -1e-6
    assert series.labels["K"] > 0


def test_window_run_abc_stays_nonpositive(ball2):
    state = flow.init(ball2, ball_window(), "frozen-window")
    _, series = flow.run(state, 0.006, monitor_epochs=4, sample_per_axis=4)
    assert series.channel("ABC_max").max() <= 1e-6
    assert series.channel("H_pol_min").max() <= 1e-6  # diagonal restriction


def test_window_run_reports_partial_series_on_failure(ball2):
    state = flow.init(ball2, ball_window(), "frozen-window")
    with pytest.raises(StabilityFailure) as err:
        # huge fixed step destroys positive-definiteness immediately
        flow.run(state, 0.01, monitor_epochs=2, dt=5e-3)
    assert hasattr(err.value, "partial_series")


def test_monitor_window_shrinks_to_nothing_raises(radial):
    grid = flow.GridSpec(shape=(16, 16), spacing=0.028,
                         origin=np.array([0.35, -0.2]))
    state = flow.init(radial, grid, "frozen-window")
    with pytest.raises(StabilityFailure):
        flow.run(state, 0.01, monitor_epochs=8, sample_per_axis=3)


def test_csv_round_trip(tmp_path):
    state = flow.init(quadratic(2), torus(16), "periodic")
    _, series = flow.run(state, 0.002, monitor_epochs=2, sample_per_axis=3)
    path = tmp_path / "series.csv"
    series.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header.startswith("t,S_min,S_max,ABC_max,ORTH_ABC_min,H_pol_min,O_max")


# -- weak-regularity probe ------------------------------------------------------------------

def test_kr_probe_radial_regular(radial):
    verdict = flow.kr_probe(radial, 0.0015, radial_window(), monitor_epochs=3)
    assert verdict.regular
    assert verdict.label.startswith("KR-WEAKLY-REGULAR")
    assert verdict.series.channel("ORTH_ABC_min").min() >= -1e-6


def test_kr_probe_detects_negative_orthogonal_curvature(ball2):
    verdict = flow.kr_probe(ball2, 0.002, ball_window(), monitor_epochs=3)
    assert not verdict.regular
    t, v = verdict.first_violation
    assert t > 0 and v < -1e-6


def test_kr_probe_quadratic_degenerate_is_regular():
    verdict = flow.kr_probe(quadratic(2), 0.002, torus(16), mode="periodic",
                            monitor_epochs=2)
    assert verdict.regular


# -- checkpoints -------------------------------------------------------------------------------

def test_checkpoint_roundtrip(tmp_path, ball2):
    state = flow.init(ball2, ball_window(), "frozen-window")
    out = state
    for _ in range(5):
        out = flow.step(out)
    path = tmp_path / "ckpt.grid"
    flow.save_checkpoint(out, path)
    origin, spacing, values, t = read_grid_file(path)
    assert t == pytest.approx(out.t)
    assert np.array_equal(values, out.u)
    handle = GridPotential(origin, spacing, values)
    x = np.array([0.0, 0.0])
    assert handle.value(x) == pytest.approx(float(out.u[20, 20]), abs=1e-10)


def test_to_grid_potential_matches_closed_form_at_t0(ball2):
    state = flow.init(ball2, ball_window(), "frozen-window")
    chk = flow.to_grid_potential(state)
    x = np.array([0.04, -0.03])
    jg = chk.jet(x)
    je = ball2.jet(x)
    assert abs(jg.value - je.value) < 1e-8
    assert np.abs(jg.hessian - je.hessian).max() < 5e-3
    with pytest.raises(BadParams):
        flow.to_grid_potential(flow.init(quadratic(2), torus(8), "periodic"))
