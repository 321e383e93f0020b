"""Perturbation decomposition and growth functionals.

A perturbation velocity chi on the slab (wall-normal component zero at
the walls) splits into the gradient of a harmonic potential h, which
carries the interface motion, plus a remainder r whose wall-normal
component vanishes on the interface and the walls.  The potential is
determined per tangential mode by its interface Neumann data; its odd
part expands in the streamwise family f_j (split at the cutoff n into
high frequencies P and low frequencies L) and its even part in g_j.

Growth is measured by quadratic functionals built from the block
operator A (the j^2 multiplier on potential coefficients, k2^2 on r):

    E_mu+/- = || A^(mu/2) dP/dt +/- A^((mu+1)/2) P ||^2
    G       = || dL/dt ||^2 + || A^(1/2) L ||^2
    F       = || dg/dt ||^2 + || A^(1/2) g ||^2
              + || dr/dt ||^2 + || k^(1/2) A^(1/2) r ||^2

with k = a^2 above and b^2 below the interface.  Fractional powers act
spectrally (j^mu on coefficients, |k2|^mu on r).  E_mu+ isolates the
growing branch: along exact evolution it is monotone with rate at least
2*n, which is what the invariant-region and exponential-growth checks
exercise.

The decomposition assumes data at reference time zero; materialising a
state at a later time applies the co-moving drift phases.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from khlab.core import (
    PerturbationState,
    TwoPhaseGridField,
    WaveVector,
    inner_product_vector,
    trace_spectrum,
    vector_field_zeros,
)
from khlab.eigenmodes import (
    build_harmonic_potentials,
    build_wall_bounded_profiles,
    potential_gradient_field,
    potential_gradient_norm_sq,
)
from khlab.evolution import r_fourier_multiplier


class AliasingError(ValueError):
    """Grid too coarse for the tangential content of the data."""


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

def _streamwise_trace_coefficients(trace_up, trace_lo, tol):
    """One-sided streamwise mode coefficients of the two interface traces.

    Returns {j: (C_up, C_lo)} for j >= 1 such that the trace equals
    sum_j Re(C * exp(i j x1)).  Rejects content off the k2 = 0 line,
    a nonzero mean (incompatible with Neumann side conditions) and
    energy at the Nyquist band.
    """
    n = trace_up.shape[0]
    su = trace_spectrum(trace_up)
    sl = trace_spectrum(trace_lo)
    freqs = np.rint(np.fft.fftfreq(n) * n).astype(int)

    off_line = 0.0
    for i2, k2 in enumerate(freqs):
        if k2 == 0:
            continue
        off_line = max(off_line,
                       float(np.max(np.abs(su[:, i2]))),
                       float(np.max(np.abs(sl[:, i2]))))
    if off_line > tol:
        raise ValueError(
            "interface trace has tangential content off the streamwise "
            f"mode line (max magnitude {off_line:.3e}); the odd/even "
            "potential families only span modes exp(i j x1)")

    mean = max(abs(su[0, 0]), abs(sl[0, 0]))
    if mean > tol:
        raise ValueError(
            f"interface trace has nonzero mean ({mean:.3e}); the wall-bounded "
            "Neumann problem for the potential is incompatible")

    if n % 2 == 0:
        nyq_amp = max(abs(su[n // 2, 0]), abs(sl[n // 2, 0]))
        if nyq_amp > tol:
            raise AliasingError(
                f"trace energy {nyq_amp:.3e} at the Nyquist mode j={n // 2} "
                f"of n_tan={n}; refine the tangential grid")

    coeffs = {}
    for i1, j in enumerate(freqs):
        if j < 1:
            continue
        cu = complex(2.0 * su[i1, 0])
        cl = complex(2.0 * sl[i1, 0])
        if max(abs(cu), abs(cl)) <= tol:
            continue
        coeffs[j] = (cu, cl)
    return coeffs


def _potential_split(chi3_up_trace, chi3_lo_trace, tol):
    """Odd/even potential coefficients from the two interface flux traces."""
    traces = _streamwise_trace_coefficients(chi3_up_trace, chi3_lo_trace, tol)
    odd, even = {}, {}
    for j, (cu, cl) in traces.items():
        # per-phase cosh(j(x3 -/+ 1)) amplitudes of the Neumann solution
        # combine into the odd/even family coefficients
        c_f = complex((cu + cl) / (2.0 * j))
        c_g = complex((cl - cu) / (2.0 * j))
        if abs(c_f) > tol:
            odd[j] = c_f
        if abs(c_g) > tol:
            even[j] = c_g
    return odd, even


def _gradient_from_coefficients(odd, even, n_tan, n_ver, t=0.0):
    grad = vector_field_zeros(n_tan, n_ver)
    for j in sorted(set(odd) | set(even)):
        f_pot, g_pot = build_harmonic_potentials(j)
        if j in odd:
            part = potential_gradient_field(f_pot, odd[j], n_tan, n_ver, t)
            grad = tuple(gc + pc for gc, pc in zip(grad, part))
        if j in even:
            part = potential_gradient_field(g_pot, even[j], n_tan, n_ver, t)
            grad = tuple(gc + pc for gc, pc in zip(grad, part))
    return grad


def _snap_r_rows(r3: TwoPhaseGridField, tol):
    worst = max(float(np.max(np.abs(r3.values_upper[:, :, 0]))),
                float(np.max(np.abs(r3.values_lower[:, :, -1]))),
                float(np.max(np.abs(r3.values_upper[:, :, -1]))),
                float(np.max(np.abs(r3.values_lower[:, :, 0]))))
    if worst > tol:
        raise ValueError(
            f"remainder field keeps a wall-normal trace of {worst:.3e}; "
            "decomposition failed to absorb the interface motion")
    up = r3.values_upper.copy()
    lo = r3.values_lower.copy()
    up[:, :, 0] = 0.0
    up[:, :, -1] = 0.0
    lo[:, :, 0] = 0.0
    lo[:, :, -1] = 0.0
    return TwoPhaseGridField(r3.n_tan, r3.n_ver, up, lo)


def _decompose_single(chi, tol):
    chi3 = chi[2]
    wall = max(float(np.max(np.abs(chi3.upper_wall_trace()))),
               float(np.max(np.abs(chi3.lower_wall_trace()))))
    if wall > tol:
        raise ValueError(
            f"wall-normal velocity {wall:.3e} at the walls; data outside "
            "the admissible class")
    odd, even = _potential_split(chi3.upper_interface_trace(),
                                 chi3.lower_interface_trace(), tol)
    grad_h = _gradient_from_coefficients(odd, even, chi3.n_tan, chi3.n_ver)
    r = tuple(c - g for c, g in zip(chi, grad_h))
    r = (r[0], r[1], _snap_r_rows(r[2], max(tol, 1e-9 * _vector_scale(chi))))
    return odd, even, r


def _vector_scale(vec):
    return max(1.0, max(c.max_abs() for c in vec))


def decompose_perturbation(chi, chi_dot, n_cutoff: int,
                           tol: float = None) -> PerturbationState:
    """Split (chi, d chi/dt) into the four-part state (P, L, g, r).

    chi and chi_dot are 3-vectors of TwoPhaseGridField with wall-normal
    component vanishing at the walls.  The harmonic potential is solved
    from the interface traces of the third component, split into odd and
    even streamwise families, and the odd family divided at n_cutoff
    into P (j >= n_cutoff) and L (j < n_cutoff).  The remainder
    r = chi - grad h has zero wall-normal trace on the interface and the
    walls (checked, then snapped exactly).  The same pipeline applied to
    chi_dot fills the velocity partners.
    """
    if n_cutoff < 1:
        raise ValueError("n_cutoff must be >= 1")
    if tol is None:
        tol = 1e-12 * max(_vector_scale(chi), _vector_scale(chi_dot))
    odd, even, r = _decompose_single(chi, tol)
    odd_dot, even_dot, r_dot = _decompose_single(chi_dot, tol)

    def split(coeffs):
        P = {j: c for j, c in coeffs.items() if j >= n_cutoff}
        L = {j: c for j, c in coeffs.items() if j < n_cutoff}
        return P, L

    P, L = split(odd)
    P_dot, L_dot = split(odd_dot)
    return PerturbationState(n_cutoff, P, P_dot, L, L_dot, even, even_dot,
                             r, r_dot)


def reconstruct_perturbation(state: PerturbationState, n_tan: int, n_ver: int,
                             t: float = 0.0):
    """Materialise (chi, chi_dot) grid fields from a decomposed state."""
    odd = dict(state.L)
    odd.update(state.P)
    odd_dot = dict(state.L_dot)
    odd_dot.update(state.P_dot)
    chi = _gradient_from_coefficients(odd, state.g, n_tan, n_ver, t)
    chi_dot = _gradient_from_coefficients(odd_dot, state.g_dot, n_tan, n_ver, t)
    if state.r is not None:
        chi = tuple(c + rc for c, rc in zip(chi, state.r))
    if state.r_dot is not None:
        chi_dot = tuple(c + rc for c, rc in zip(chi_dot, state.r_dot))
    return chi, chi_dot


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalReport:
    """Growth functional values of one state at one time."""

    t: float
    E_plus: dict
    E_minus: dict
    G: float
    F: float


def _pair(coeffs, dots):
    for j in sorted(set(coeffs) | set(dots)):
        yield j, coeffs.get(j, 0.0 + 0.0j), dots.get(j, 0.0 + 0.0j)


def _E_mu(state: PerturbationState, mu: float):
    plus = minus = 0.0
    for j, c, d in _pair(state.P, state.P_dot):
        w = potential_gradient_norm_sq(j)
        jm = float(j) ** mu
        plus += abs(jm * d + jm * j * c) ** 2 * w
        minus += abs(jm * d - jm * j * c) ** 2 * w
    return plus, minus


def _quadratic_block(coeffs, dots):
    total = 0.0
    for j, c, d in _pair(coeffs, dots):
        w = potential_gradient_norm_sq(j)
        total += (abs(d) ** 2 + (j * abs(c)) ** 2) * w
    return total


def _r_energy(state: PerturbationState, a: float, b: float):
    total = 0.0
    if state.r_dot is not None:
        total += inner_product_vector(state.r_dot, state.r_dot)
    if state.r is not None:
        weighted = tuple(r_fourier_multiplier(comp, a, b, power=1)
                         for comp in state.r)
        total += inner_product_vector(weighted, weighted)
    return total


def compute_functionals(state: PerturbationState, mus, a: float, b: float,
                        t: float = 0.0) -> FunctionalReport:
    """Evaluate E_mu+/- for each mu, plus G and F, on one state.

    Coefficient norms use the closed-form basis weight
    ||grad of unit potential||^2 = 4*pi^2*j*coth(j); the r contributions
    are evaluated by grid quadrature with the per-phase field weights
    a (upper) and b (lower) on the half-power stiffness.
    """
    E_plus, E_minus = {}, {}
    for mu in mus:
        p, m = _E_mu(state, float(mu))
        E_plus[float(mu)] = p
        E_minus[float(mu)] = m
    G = _quadratic_block(state.L, state.L_dot)
    F = _quadratic_block(state.g, state.g_dot) + _r_energy(state, a, b)
    return FunctionalReport(t, E_plus, E_minus, G, F)


def h2_readout(state: PerturbationState) -> float:
    """Spectral high-order readout of the P part: || A grad P ||_L2.

    Mode j contributes j^4 * |c_j|^2 * (basis gradient weight); this is
    the A-multiplier-consistent stand-in for a second-order Sobolev norm
    of the growing component.
    """
    total = 0.0
    for j, c in state.P.items():
        total += (j ** 4) * abs(c) ** 2 * potential_gradient_norm_sq(j)
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# trajectory checks
# ---------------------------------------------------------------------------

@dataclass
class Proposition2Report:
    """Invariant-region audit of a trajectory.

    The region is {E1+ >= E1-, E1+ >= n^3 F, E1+ >= n^3 G}.  The report
    records the functional series, the first time any inequality fails
    (None if the region is invariant along the samples) and the two
    spectral side bounds: E_mu+/- >= n^(2(mu-nu)) E_nu+/- for
    (mu, nu) = (3/2, 1), and ||A L|| <= (n-1)^2 ||L|| (checked with a
    1e-12 relative roundoff guard).
    """

    n_cutoff: int
    times: list = field(default_factory=list)
    E1_plus: list = field(default_factory=list)
    E1_minus: list = field(default_factory=list)
    F: list = field(default_factory=list)
    G: list = field(default_factory=list)
    invariant: bool = True
    first_violation_time: float = None
    aux_order_bound_ok: bool = True
    aux_low_frequency_bound_ok: bool = True

    def to_dict(self):
        return {
            "n_cutoff": self.n_cutoff,
            "times": list(self.times),
            "E1_plus": list(self.E1_plus),
            "E1_minus": list(self.E1_minus),
            "F": list(self.F),
            "G": list(self.G),
            "invariant": bool(self.invariant),
            "first_violation_time": self.first_violation_time,
            "aux_order_bound_ok": bool(self.aux_order_bound_ok),
            "aux_low_frequency_bound_ok": bool(self.aux_low_frequency_bound_ok),
        }


def _aux_bounds_ok(state: PerturbationState, n: int, rel=1e-12):
    E32p, E32m = _E_mu(state, 1.5)
    E1p, E1m = _E_mu(state, 1.0)
    plus_ok = E32p >= n * E1p * (1 - rel)
    # once the decaying branch falls below the cancellation floor of the
    # growing one (|d - j c| ~ eps * |d + j c|), its energies are pure
    # roundoff and the minus-side bound is vacuous
    floor = 1e-24 * (E1p + E1m)
    minus_ok = (E1m <= floor) or (E32m >= n * E1m * (1 - rel))
    order_ok = plus_ok and minus_ok
    lhs = sum((j ** 4) * abs(c) ** 2 * potential_gradient_norm_sq(j)
              for j, c in state.L.items())
    rhs = (max(n - 1, 1) ** 4) * sum(abs(c) ** 2 * potential_gradient_norm_sq(j)
                                     for j, c in state.L.items())
    low_ok = lhs <= rhs * (1 + rel)
    return order_ok, low_ok


def check_proposition2(trajectory, n_cutoff: int, a: float, b: float) -> Proposition2Report:
    """Check the invariant region along a time-ordered trajectory.

    trajectory is a sequence of (t, PerturbationState) sharing n_cutoff.
    Raises on an empty trajectory; states with mismatched cutoffs are
    rejected.  a and b enter only through the r part of F.
    """
    trajectory = list(trajectory)
    if not trajectory:
        raise ValueError("trajectory must contain at least one sample")
    times = [t for t, _ in trajectory]
    if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
        raise ValueError("trajectory must be time-ordered")
    report = Proposition2Report(n_cutoff=n_cutoff)
    n3 = float(n_cutoff) ** 3
    for t, state in trajectory:
        if state.n_cutoff != n_cutoff:
            raise ValueError("states must share the trajectory n_cutoff")
        rep = compute_functionals(state, [1.0], a, b, t=t)
        E1p = rep.E_plus[1.0]
        E1m = rep.E_minus[1.0]
        report.times.append(t)
        report.E1_plus.append(E1p)
        report.E1_minus.append(E1m)
        report.F.append(rep.F)
        report.G.append(rep.G)
        inside = (E1p >= E1m) and (E1p >= n3 * rep.F) and (E1p >= n3 * rep.G)
        if not inside and report.invariant:
            report.invariant = False
            report.first_violation_time = t
        order_ok, low_ok = _aux_bounds_ok(state, n_cutoff)
        report.aux_order_bound_ok &= order_ok
        report.aux_low_frequency_bound_ok &= low_ok
    return report


@dataclass
class GrowthReport:
    """Exponential-growth audit: E1+(t) against E1+(0) * e^(n t)."""

    n_cutoff: int
    passed: bool
    times: list
    margins: list   # E1+(t) / (E1+(0) e^{n t})

    def to_dict(self):
        return {"n_cutoff": self.n_cutoff, "passed": self.passed,
                "times": list(self.times), "margins": list(self.margins)}


def check_growth_corollary(trajectory, n_cutoff: int,
                           tol: float = 1e-8) -> GrowthReport:
    """True iff E1+(t) >= E1+(0) * e^(n_cutoff * t) * (1 - tol) at all samples."""
    trajectory = list(trajectory)
    if not trajectory:
        raise ValueError("trajectory must contain at least one sample")
    t0, s0 = trajectory[0]
    E0 = compute_functionals(s0, [1.0], 0.0, 0.0).E_plus[1.0]
    if E0 == 0.0:
        raise ValueError("E1+(0) = 0: growth ratio undefined")
    times, margins = [], []
    passed = True
    for t, state in trajectory:
        E = compute_functionals(state, [1.0], 0.0, 0.0).E_plus[1.0]
        target = E0 * math.exp(n_cutoff * (t - t0))
        margins.append(E / target)
        times.append(t)
        if E < target * (1.0 - tol):
            passed = False
    return GrowthReport(n_cutoff, passed, times, margins)


# ---------------------------------------------------------------------------
# vanishing initial data with growing output
# ---------------------------------------------------------------------------

def perturbed_initial_data(n: int, scale: float = 1.0,
                           n_tan: int = 64, n_ver: int = 64):
    """Initial pair (chi, chi_dot) that is tiny yet seeds e^{n t} growth.

    chi is identically zero; chi_dot is scale * e^{-sqrt(n)} times the
    wall-bounded velocity mode (V, 0, W) at streamwise frequency n.
    Its sup norm shrinks as n grows while the evolved high-order readout
    explodes, which is the ill-posedness signature this package checks.
    """
    if n < 1:
        raise ValueError("mode frequency n must be >= 1")
    k = WaveVector(n, 0)
    W, V = build_wall_bounded_profiles(k)
    amp = scale * math.exp(-math.sqrt(n))
    x1 = 2.0 * math.pi * np.arange(n_tan) / n_tan
    zu = np.linspace(0.0, 1.0, n_ver + 1)
    zl = np.linspace(-1.0, 0.0, n_ver + 1)
    row = amp * np.exp(1j * n * x1)

    def materialise(profile):
        up = np.real(row[:, None, None] * profile.eval_upper(zu)[None, None, :])
        lo = np.real(row[:, None, None] * profile.eval_lower(zl)[None, None, :])
        shape = (n_tan, n_tan, n_ver + 1)
        return TwoPhaseGridField(n_tan, n_ver,
                                 np.broadcast_to(up, shape).copy(),
                                 np.broadcast_to(lo, shape).copy())

    chi = vector_field_zeros(n_tan, n_ver)
    chi_dot = (materialise(V), TwoPhaseGridField.zeros(n_tan, n_ver),
               materialise(W))
    return chi, chi_dot
