"""Audio-driven Hopf oscillator reservoir.

The reservoir is the forced Hopf normal form

    dx/dt = (mu*f(t) - (x^2 + y^2)) x - omega0 * y + A * f(t) * sin(Omega * t)
    dy/dt = (mu*f(t) - (x^2 + y^2)) y + omega0 * x

driven by f(t) = 1 + a(t), where a(t) is audio normalized to [-1, 1] and held
constant (zero-order hold) over each audio sample interval. Within every hold
interval the x state is emitted at `n_virtual` uniformly spaced instants (the
virtual nodes), so a clip of n samples yields an (n, n_virtual) response
matrix. Integration is fixed-step classical RK4.
"""

from dataclasses import dataclass, field

import numba
import numpy as np

from .audio import AudioClip
from .errors import ContractError, DivergenceError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class HopfParams:
    """Oscillator constants.

    mu sets the unforced limit-cycle radius (sqrt(mu)); omega0 is the
    resonance angular frequency in rad/s; amp and omega_f are the sinusoidal
    forcing amplitude and angular frequency. amp_scale multiplies amp and
    exists so the "stronger activation" variant can be switched on without
    touching the base amplitude.
    """

    mu: float = 1.0
    omega0: float = TWO_PI * 1000.0
    amp: float = 1.0
    omega_f: float = TWO_PI * 1000.0
    amp_scale: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.omega0 > 0 and self.omega_f > 0):
            raise ContractError("mu, omega0 and omega_f must be positive")
        if self.amp < 0:
            raise ContractError("forcing amplitude must be >= 0")
        if not self.amp_scale > 0:
            raise ContractError("amp_scale must be > 0")

    @property
    def effective_amp(self):
        return self.amp * self.amp_scale


@dataclass
class OscState:
    x: float
    y: float
    t: float = 0.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Step policy: n_virtual outputs per audio sample, substeps RK4 steps
    between consecutive outputs."""

    n_virtual: int = 100
    substeps: int = 4

    def __post_init__(self):
        if self.n_virtual < 2:
            raise ContractError("n_virtual must be >= 2")
        if self.substeps < 1:
            raise ContractError("substeps must be >= 1")


@dataclass(frozen=True)
class ReservoirConfig:
    params: HopfParams = field(default_factory=HopfParams)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    audio_rate: int = 4000
    washout_s: float = 0.05

    def __post_init__(self):
        if self.audio_rate <= 0:
            raise ContractError("audio_rate must be positive")
        if self.washout_s < 0:
            raise ContractError("washout_s must be >= 0")


@dataclass
class ReservoirResponse:
    """x-state samples: one row per audio sample, one column per virtual node."""

    matrix: np.ndarray
    audio_rate: int
    params_used: HopfParams


def drive_signal(audio_sample):
    """DC offset plus audio: f = 1 + a, in [0, 2] for normalized audio."""
    if not np.isfinite(audio_sample):
        raise ContractError("audio sample must be finite")
    if abs(audio_sample) > 1.0:
        raise ContractError(
            f"audio sample {audio_sample!r} outside [-1, 1]; normalize the clip first"
        )
    return 1.0 + audio_sample


def hopf_derivative(state, params, f):
    """Right-hand side of the forced oscillator for drive value f."""
    if not (np.isfinite(state.x) and np.isfinite(state.y) and np.isfinite(state.t)):
        raise ContractError("state must be finite")
    if not np.isfinite(f):
        raise ContractError("drive value must be finite")
    r2 = state.x * state.x + state.y * state.y
    gain = params.mu * f - r2
    dx = gain * state.x - params.omega0 * state.y + params.effective_amp * f * np.sin(
        params.omega_f * state.t
    )
    dy = gain * state.y + params.omega0 * state.x
    return dx, dy


def rk4_step(state, h, params, f):
    """One classical RK4 step with the drive held constant over the step."""
    if h <= 0:
        raise ContractError("step size must be positive")
    k1x, k1y = hopf_derivative(state, params, f)
    mid1 = OscState(state.x + 0.5 * h * k1x, state.y + 0.5 * h * k1y, state.t + 0.5 * h)
    k2x, k2y = hopf_derivative(mid1, params, f)
    mid2 = OscState(state.x + 0.5 * h * k2x, state.y + 0.5 * h * k2y, state.t + 0.5 * h)
    k3x, k3y = hopf_derivative(mid2, params, f)
    end = OscState(state.x + h * k3x, state.y + h * k3y, state.t + h)
    k4x, k4y = hopf_derivative(end, params, f)
    x = state.x + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
    y = state.y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
    out = OscState(x, y, state.t + h)
    if not (np.isfinite(out.x) and np.isfinite(out.y)):
        raise DivergenceError(f"state diverged at t={state.t!r}", where=state.t)
    return out


@numba.njit(cache=True)
def _integrate_hold(x, y, t, drive, mu, omega0, amp, omega_f, n_virtual, substeps, sample_dt):
    """Zero-order-hold integration kernel.

    Emits x at the start of each substep group: n_virtual emissions per drive
    sample, substeps RK4 steps between emissions. Returns the emission matrix,
    the final state and the index of the first sample whose integration went
    non-finite (-1 if none).
    """
    n = drive.shape[0]
    out = np.empty((n, n_virtual))
    h = sample_dt / (n_virtual * substeps)
    for i in range(n):
        f = drive[i]
        a = amp * f
        for k in range(n_virtual):
            out[i, k] = x
            for _ in range(substeps):
                r2 = x * x + y * y
                k1x = (mu * f - r2) * x - omega0 * y + a * np.sin(omega_f * t)
                k1y = (mu * f - r2) * y + omega0 * x
                xm = x + 0.5 * h * k1x
                ym = y + 0.5 * h * k1y
                tm = t + 0.5 * h
                r2 = xm * xm + ym * ym
                k2x = (mu * f - r2) * xm - omega0 * ym + a * np.sin(omega_f * tm)
                k2y = (mu * f - r2) * ym + omega0 * xm
                xm2 = x + 0.5 * h * k2x
                ym2 = y + 0.5 * h * k2y
                r2 = xm2 * xm2 + ym2 * ym2
                k3x = (mu * f - r2) * xm2 - omega0 * ym2 + a * np.sin(omega_f * tm)
                k3y = (mu * f - r2) * ym2 + omega0 * xm2
                xe = x + h * k3x
                ye = y + h * k3y
                te = t + h
                r2 = xe * xe + ye * ye
                k4x = (mu * f - r2) * xe - omega0 * ye + a * np.sin(omega_f * te)
                k4y = (mu * f - r2) * ye + omega0 * xe
                x = x + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
                y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
                t = te
        if not (np.isfinite(x) and np.isfinite(y)):
            return out, x, y, t, i
    return out, x, y, t, -1


@numba.njit(cache=True)
def _free_run(x, y, t, h, n_steps, mu, omega0, amp, omega_f):
    """Constant-drive (f=1) run storing the full (x, y) trajectory."""
    xs = np.empty(n_steps + 1)
    ys = np.empty(n_steps + 1)
    xs[0] = x
    ys[0] = y
    for i in range(n_steps):
        r2 = x * x + y * y
        k1x = (mu - r2) * x - omega0 * y + amp * np.sin(omega_f * t)
        k1y = (mu - r2) * y + omega0 * x
        xm = x + 0.5 * h * k1x
        ym = y + 0.5 * h * k1y
        tm = t + 0.5 * h
        r2 = xm * xm + ym * ym
        k2x = (mu - r2) * xm - omega0 * ym + amp * np.sin(omega_f * tm)
        k2y = (mu - r2) * ym + omega0 * xm
        xm2 = x + 0.5 * h * k2x
        ym2 = y + 0.5 * h * k2y
        r2 = xm2 * xm2 + ym2 * ym2
        k3x = (mu - r2) * xm2 - omega0 * ym2 + amp * np.sin(omega_f * tm)
        k3y = (mu - r2) * ym2 + omega0 * xm2
        xe = x + h * k3x
        ye = y + h * k3y
        te = t + h
        r2 = xe * xe + ye * ye
        k4x = (mu - r2) * xe - omega0 * ye + amp * np.sin(omega_f * te)
        k4y = (mu - r2) * ye + omega0 * xe
        x = x + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        t = te
        xs[i + 1] = x
        ys[i + 1] = y
    return xs, ys, t


def run_reservoir(clip: AudioClip, cfg: ReservoirConfig) -> ReservoirResponse:
    """Simulate the reservoir over a normalized clip at the configured rate.

    The state starts on the unforced cycle at (sqrt(mu), 0), t=0, runs through
    washout_s seconds of f=1 drive (discarded), then processes the clip with
    one zero-order-hold interval per audio sample. Raises DivergenceError with
    the offending sample index if the state ever goes non-finite.
    """
    if clip.rate != cfg.audio_rate:
        raise ContractError(
            f"clip rate {clip.rate} != configured audio rate {cfg.audio_rate}"
        )
    p = cfg.params
    n_virtual = cfg.integrator.n_virtual
    if len(clip) == 0:
        return ReservoirResponse(np.empty((0, n_virtual)), cfg.audio_rate, p)
    if not clip.normalized:
        raise ContractError("clip must be normalized before driving the reservoir")
    peak = float(np.max(np.abs(clip.samples)))
    if peak > 1.0 or not np.isfinite(peak):
        raise ContractError(f"normalized clip has |sample| max {peak}, expected <= 1")

    sample_dt = 1.0 / cfg.audio_rate
    x, y, t = np.sqrt(p.mu), 0.0, 0.0
    n_wash = int(round(cfg.washout_s * cfg.audio_rate))
    if n_wash > 0:
        _, x, y, t, bad = _integrate_hold(
            x, y, t, np.ones(n_wash), p.mu, p.omega0, p.effective_amp,
            p.omega_f, n_virtual, cfg.integrator.substeps, sample_dt,
        )
        if bad >= 0:
            raise DivergenceError(f"state diverged during washout sample {bad}", where=bad)

    drive = 1.0 + np.asarray(clip.samples, dtype=np.float64)
    matrix, x, y, t, bad = _integrate_hold(
        x, y, t, drive, p.mu, p.omega0, p.effective_amp,
        p.omega_f, n_virtual, cfg.integrator.substeps, sample_dt,
    )
    if bad >= 0:
        raise DivergenceError(f"state diverged at audio sample {bad}", where=bad)
    return ReservoirResponse(matrix, cfg.audio_rate, p)


def estimate_limit_cycle(params, duration, initial=None, steps_per_period=512):
    """Measure (radius, frequency_hz) of the unforced oscillator.

    Runs the A=0 oscillator for `duration` seconds and reports the mean radius
    over the last half of the run and the frequency implied by the mean
    zero-crossing spacing of x (linearly interpolated crossing times).
    Requires duration >= 20 natural periods so the averages are meaningful.
    """
    if params.effective_amp != 0.0:
        raise ContractError("limit-cycle estimation expects an unforced oscillator (A=0)")
    period = TWO_PI / params.omega0
    if duration < 20 * period:
        raise ContractError(
            f"duration {duration} s covers fewer than 20 periods ({20 * period} s)"
        )
    if initial is None:
        initial = (np.sqrt(params.mu), 0.0)
    h = period / steps_per_period
    n_steps = int(np.ceil(duration / h))
    xs, ys, _ = _free_run(
        float(initial[0]), float(initial[1]), 0.0, h, n_steps,
        params.mu, params.omega0, 0.0, params.omega_f,
    )
    half = len(xs) // 2
    xs, ys = xs[half:], ys[half:]
    radius = float(np.mean(np.sqrt(xs * xs + ys * ys)))

    t_axis = (half + np.arange(len(xs))) * h
    sign_flip = np.where(xs[:-1] * xs[1:] < 0)[0]
    if len(sign_flip) < 2:
        raise ContractError("too few zero crossings to estimate frequency")
    # Linear interpolation of each crossing instant.
    frac = xs[sign_flip] / (xs[sign_flip] - xs[sign_flip + 1])
    crossings = t_axis[sign_flip] + frac * h
    mean_spacing = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
    frequency = 1.0 / (2.0 * mean_spacing)
    return radius, frequency
