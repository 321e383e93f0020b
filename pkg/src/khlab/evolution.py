"""Linearized time evolution: boundary modes and the four-block system.

Restricted to the interface, the linearized wall-normal velocity obeys

    d2/dt2 u3 + d2/dx1^2 u3 = (a^2 + b^2)/2 * d2/dx2^2 u3,

so a tangential mode (k1, k2) evolves with squared exponent
lambda^2 = k1^2 - (a^2 + b^2)/2 * k2^2: streamwise modes grow at rate
k1 regardless of the transverse field, while spanwise modes can be
turned oscillatory.

In the decomposed interior picture the coefficient blocks evolve
independently (the linear system is block-diagonal):

    P block   c'' = +j^2 c        growing odd potentials, j >= n_cutoff
    L block   c'' = +j^2 c        low-frequency odd potentials
    g block   c'' = -2 j^2 c      even potentials, neutral oscillation
    r block   c'' = -k * k2^2 c   per phase, k = a^2 above / b^2 below

The operator A acts as the j^2 multiplier on potential coefficients and
as the tangential Fourier multiplier k2^2 on r.  The exact stepper uses
the per-mode cosh/sinh (or cos/sin, or linear) propagators; a classical
RK4 stepper exists for convergence studies and future forcing terms.
"""

import math
from dataclasses import dataclass

import numpy as np

from khlab.core import PerturbationState, TwoPhaseGridField, WaveVector

RK4_STABILITY_LIMIT = 2.8   # max |omega| * dt for the oscillatory blocks


class StabilityError(ValueError):
    """Requested RK4 step size violates the documented stability rule."""


# ---------------------------------------------------------------------------
# boundary modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryModeState:
    """Amplitude and amplitude velocity of one interface mode."""

    k: WaveVector
    amplitude: complex
    velocity: complex


def boundary_dispersion(k: WaveVector, a: float, b: float) -> float:
    """Squared temporal exponent of interface mode k: k1^2 - (a^2+b^2)/2 * k2^2."""
    k.require_nonzero()
    return float(k.k1) ** 2 - 0.5 * (a * a + b * b) * float(k.k2) ** 2


def _propagator(lambda_sq: float, t: float):
    """(C, S) with amp(t) = amp*C + vel*S, vel(t) = amp*lambda_sq*S + vel*C."""
    if lambda_sq > 0.0:
        w = math.sqrt(lambda_sq)
        return math.cosh(w * t), math.sinh(w * t) / w
    if lambda_sq < 0.0:
        w = math.sqrt(-lambda_sq)
        return math.cos(w * t), (math.sin(w * t) / w if w else t)
    return 1.0, t


def _rk4_second_order(amp, vel, lambda_sq, t, dt):
    """Classical RK4 on (amp' = vel, vel' = lambda_sq * amp) up to time t."""
    steps = max(1, int(round(t / dt)))
    h = t / steps
    y = np.asarray([amp, vel], dtype=complex)

    def rhs(y):
        return np.asarray([y[1], lambda_sq * y[0]], dtype=complex)

    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y[0], y[1]


def _check_rk4_step(lambda_sq_values, dt):
    if dt <= 0:
        raise StabilityError("rk4 requires dt > 0")
    omega_max = max((math.sqrt(abs(l)) for l in lambda_sq_values), default=0.0)
    if omega_max * dt > RK4_STABILITY_LIMIT:
        raise StabilityError(
            f"rk4 step dt={dt} unstable: |omega|*dt = {omega_max * dt:.3f} "
            f"exceeds the limit {RK4_STABILITY_LIMIT}")


def evolve_boundary_mode(state: BoundaryModeState, a: float, b: float, t: float,
                         stepper: str = "exact", dt: float = None) -> BoundaryModeState:
    """Advance one interface mode by time t.

    The exact stepper solves amp'' = lambda^2 * amp in closed form
    (cosh/sinh for growth, cos/sin for oscillation, linear at
    lambda^2 = 0).  stepper="rk4" integrates the same system with the
    classical scheme at step dt for convergence studies.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    lam_sq = boundary_dispersion(state.k, a, b)
    if stepper == "exact":
        C, S = _propagator(lam_sq, t)
        amp = state.amplitude * C + state.velocity * S
        vel = state.amplitude * lam_sq * S + state.velocity * C
    elif stepper == "rk4":
        if dt is None:
            raise ValueError("rk4 stepper requires dt")
        if t > 0:
            _check_rk4_step([lam_sq], dt)
            amp, vel = _rk4_second_order(state.amplitude, state.velocity, lam_sq, t, dt)
        else:
            amp, vel = state.amplitude, state.velocity
    else:
        raise ValueError(f"unknown stepper {stepper!r}")
    return BoundaryModeState(state.k, amp, vel)


# ---------------------------------------------------------------------------
# operator A on decomposed states
# ---------------------------------------------------------------------------

def r_fourier_multiplier(field: TwoPhaseGridField, weight_upper=1.0,
                         weight_lower=1.0, power=2):
    """Apply (weight * |k2|^power) per phase in the x2 Fourier direction."""
    n = field.n_tan
    k2 = np.rint(np.fft.fftfreq(n) * n).astype(int)
    m = np.abs(k2.astype(float)) ** power
    up = np.fft.ifft(np.fft.fft(field.values_upper, axis=1) * (weight_upper * m)[None, :, None],
                     axis=1).real
    lo = np.fft.ifft(np.fft.fft(field.values_lower, axis=1) * (weight_lower * m)[None, :, None],
                     axis=1).real
    return TwoPhaseGridField(field.n_tan, field.n_ver, up, lo)


def apply_A(state: PerturbationState) -> PerturbationState:
    """Apply the block operator A to every part of a state.

    Potential coefficients (P, L, g and their velocities) are multiplied
    by j^2; the r fields get the tangential Fourier multiplier k2^2,
    i.e. the negative second x2 derivative.
    """
    def scale(coeffs):
        return {j: (j ** 2) * c for j, c in coeffs.items()}

    def on_r(vec):
        if vec is None:
            return None
        return tuple(r_fourier_multiplier(comp) for comp in vec)

    return PerturbationState(
        state.n_cutoff,
        scale(state.P), scale(state.P_dot),
        scale(state.L), scale(state.L_dot),
        scale(state.g), scale(state.g_dot),
        on_r(state.r), on_r(state.r_dot),
    )


# ---------------------------------------------------------------------------
# full linear evolution
# ---------------------------------------------------------------------------

def _evolve_coeff_block(coeffs, dots, lambda_sq_of_j, t, stepper, dt):
    new_c, new_d = {}, {}
    for j in sorted(set(coeffs) | set(dots)):
        c = coeffs.get(j, 0.0 + 0.0j)
        d = dots.get(j, 0.0 + 0.0j)
        lam_sq = lambda_sq_of_j(j)
        if stepper == "exact":
            C, S = _propagator(lam_sq, t)
            new_c[j] = c * C + d * S
            new_d[j] = c * lam_sq * S + d * C
        else:
            new_c[j], new_d[j] = _rk4_second_order(c, d, lam_sq, t, dt)
    return new_c, new_d


def _evolve_r_exact(r, r_dot, a, b, t):
    """Exact x2-modewise propagation of r'' = -k * k2^2 * r per phase."""
    n = r[0].n_tan
    k2 = np.rint(np.fft.fftfreq(n) * n).astype(int).astype(float)
    out_r, out_d = [], []
    for comp, comp_dot in zip(r, r_dot):
        new_vals, new_dots = [], []
        for vals, dots, coef in ((comp.values_upper, comp_dot.values_upper, a),
                                 (comp.values_lower, comp_dot.values_lower, b)):
            vh = np.fft.fft(vals, axis=1)
            dh = np.fft.fft(dots, axis=1)
            w = coef * np.abs(k2)          # natural frequency per x2 mode
            C = np.cos(w * t)
            S = np.where(w > 0, np.divide(np.sin(w * t), np.where(w > 0, w, 1.0)), t)
            C = C[None, :, None]
            S = S[None, :, None]
            lam_sq = -(w ** 2)[None, :, None]
            new_vals.append(np.fft.ifft(vh * C + dh * S, axis=1).real)
            new_dots.append(np.fft.ifft(vh * lam_sq * S + dh * C, axis=1).real)
        out_r.append(TwoPhaseGridField(comp.n_tan, comp.n_ver, new_vals[0], new_vals[1]))
        out_d.append(TwoPhaseGridField(comp.n_tan, comp.n_ver, new_dots[0], new_dots[1]))
    return tuple(out_r), tuple(out_d)


def evolve_state(state: PerturbationState, a: float, b: float, t: float,
                 stepper: str = "exact", dt: float = None) -> PerturbationState:
    """Advance a decomposed perturbation by time t.

    Blocks evolve independently with their own stiffness: P and L grow
    and decay at rate j, g oscillates at sqrt(2)*j, r oscillates at
    a*|k2| above and b*|k2| below the interface (x2-independent r
    content moves linearly in t).  The exact stepper composes the
    closed-form propagators; rk4 uses the classical scheme and is
    rejected when max|omega|*dt exceeds RK4_STABILITY_LIMIT.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    if stepper not in ("exact", "rk4"):
        raise ValueError(f"unknown stepper {stepper!r}")
    if stepper == "rk4":
        if dt is None:
            raise ValueError("rk4 stepper requires dt")
        omegas = [-(j ** 2) for j in list(state.P) + list(state.P_dot)
                  + list(state.L) + list(state.L_dot)]
        omegas += [-2.0 * j ** 2 for j in list(state.g) + list(state.g_dot)]
        if state.r is not None:
            k2_max = state.r[0].n_tan // 2
            omegas.append(-(max(a, b) * k2_max) ** 2)
        if t > 0:
            _check_rk4_step(omegas, dt)

    P, P_dot = _evolve_coeff_block(state.P, state.P_dot, lambda j: float(j * j),
                                   t, stepper, dt)
    L, L_dot = _evolve_coeff_block(state.L, state.L_dot, lambda j: float(j * j),
                                   t, stepper, dt)
    g, g_dot = _evolve_coeff_block(state.g, state.g_dot, lambda j: -2.0 * j * j,
                                   t, stepper, dt)

    r, r_dot = state.r, state.r_dot
    if r is not None:
        if stepper == "exact":
            r, r_dot = _evolve_r_exact(r, state.r_dot, a, b, t)
        else:
            r, r_dot = _evolve_r_rk4_steps(r, state.r_dot, a, b, t, dt)

    return PerturbationState(state.n_cutoff, P, P_dot, L, L_dot, g, g_dot, r, r_dot)


def _evolve_r_rk4_steps(r, r_dot, a, b, t, dt):
    """Classical RK4 for the r block (field-valued second-order system)."""
    steps = max(1, int(round(t / dt)))
    h = t / steps

    def accel(vec):
        return tuple(r_fourier_multiplier(comp, -a * a, -b * b) for comp in vec)

    def combo(base, *scaled):
        out = []
        for i, comp in enumerate(base):
            acc = comp.values_upper.copy(), comp.values_lower.copy()
            up, lo = acc
            for s, vec in scaled:
                up += s * vec[i].values_upper
                lo += s * vec[i].values_lower
            out.append(TwoPhaseGridField(comp.n_tan, comp.n_ver, up, lo))
        return tuple(out)

    y, v = r, r_dot
    for _ in range(steps):
        ay1 = v
        av1 = accel(y)
        ay2 = combo(v, (0.5 * h, av1))
        av2 = accel(combo(y, (0.5 * h, ay1)))
        ay3 = combo(v, (0.5 * h, av2))
        av3 = accel(combo(y, (0.5 * h, ay2)))
        ay4 = combo(v, (h, av3))
        av4 = accel(combo(y, (h, ay3)))
        y = combo(y, (h / 6.0, ay1), (h / 3.0, ay2), (h / 3.0, ay3), (h / 6.0, ay4))
        v = combo(v, (h / 6.0, av1), (h / 3.0, av2), (h / 3.0, av3), (h / 6.0, av4))
    return y, v
