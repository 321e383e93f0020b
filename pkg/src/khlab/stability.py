"""Growth rate of the planar current-vortex sheet and stability criteria.

The classical normal-mode analysis of a tangential discontinuity between
two incompressible MHD streams gives a closed-form growth rate: velocity
shear along the wave vector drives the instability while magnetic tension
from the field components parallel to the wave vector opposes it.  The
Syrovatskij inequalities mark the regime where tension wins for every
wave vector; the strong variant tightens them.  With purely transverse
fields and streamwise wave vectors the tension terms vanish identically,
so the sheet stays as unstable as the unmagnetized one.
"""

import math
from dataclasses import dataclass

import numpy as np

from khlab.core import ShearParams, WaveVector

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class StabilityVerdict:
    """Pointwise stability assessment of one configuration.

    gamma_squared is the squared normal-mode growth rate (NaN when only
    the criteria were evaluated), growing its sign, and the three flags
    report the non-strict stability inequalities: equality counts as
    stable-side.
    """

    gamma_squared: float
    growing: bool
    syrovatskij_first: bool
    syrovatskij_second: bool
    strong_condition: bool


def _as_vec3(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector")
    return arr


def sen_gamma_squared(params: ShearParams, k, B1, B2) -> float:
    """Squared growth rate of the sheet for wave vector k.

    k may be a WaveVector (embedded as (k1, k2, 0)) or any real
    3-vector; B1 and B2 are the magnetic fields on the two sides.
    The Gaussian 1/(4*pi) factor is kept verbatim; m_i can absorb
    alternative unit choices.
    """
    if isinstance(k, WaveVector):
        k = k.require_nonzero().as_array3()
    k = _as_vec3(k, "k")
    if not np.any(k):
        raise ValueError("wave vector must be nonzero")
    B1 = _as_vec3(B1, "B1")
    B2 = _as_vec3(B2, "B2")
    n1, n2, m_i = params.n1, params.n2, params.m_i
    du = params.velocity_jump()
    drive = n1 * n2 / (n1 + n2) ** 2 * float(np.dot(k, du)) ** 2
    tension = (float(np.dot(k, B1)) ** 2 + float(np.dot(k, B2)) ** 2) \
        / (FOUR_PI * (n1 + n2) * m_i)
    return drive - tension


def check_syrovatskij(jump_u, h_plus, h_minus) -> StabilityVerdict:
    """Evaluate the stability inequalities for a velocity jump and fields.

    Returns a verdict carrying the condition flags only
    (gamma_squared is NaN, growing False).  Conditions:

        first   |[u]|^2 <= 2 (|h+|^2 + |h-|^2)
        second  |[u] x h+|^2 + |[u] x h-|^2 <= 2 |h+ x h-|^2
        strong  max(|[u] x h+|, |[u] x h-|) <= |h+ x h-|
    """
    du = _as_vec3(jump_u, "jump_u")
    hp = _as_vec3(h_plus, "h_plus")
    hm = _as_vec3(h_minus, "h_minus")
    cross_p = float(np.linalg.norm(np.cross(du, hp)))
    cross_m = float(np.linalg.norm(np.cross(du, hm)))
    cross_pm = float(np.linalg.norm(np.cross(hp, hm)))
    first = float(np.dot(du, du)) <= 2.0 * (float(np.dot(hp, hp)) + float(np.dot(hm, hm)))
    second = cross_p ** 2 + cross_m ** 2 <= 2.0 * cross_pm ** 2
    strong = max(cross_p, cross_m) <= cross_pm
    return StabilityVerdict(float("nan"), False, bool(first), bool(second), bool(strong))


def evaluate_point(params: ShearParams, k: WaveVector, a: float, b: float) -> StabilityVerdict:
    """Full verdict for one (a, b) cell: growth rate plus criteria flags."""
    B1 = np.array([0.0, a, 0.0])
    B2 = np.array([0.0, b, 0.0])
    g2 = sen_gamma_squared(params, k, B1, B2)
    flags = check_syrovatskij(params.velocity_jump(), B1, B2)
    return StabilityVerdict(g2, g2 > 0.0,
                            flags.syrovatskij_first,
                            flags.syrovatskij_second,
                            flags.strong_condition)


def stability_map(params: ShearParams, a_range, b_range, k: WaveVector):
    """Sweep transverse field strengths into a table of verdicts.

    a_range and b_range must be nonempty monotone 1-D grids.  The result
    is a row-major list of rows, one row per a value, each cell equal to
    the pointwise evaluation at (a, b).
    """
    a_range = np.atleast_1d(np.asarray(a_range, dtype=float))
    b_range = np.atleast_1d(np.asarray(b_range, dtype=float))
    for name, rng in (("a_range", a_range), ("b_range", b_range)):
        if rng.size == 0:
            raise ValueError(f"{name} must be nonempty")
        d = np.diff(rng)
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError(f"{name} must be monotone")
    k.require_nonzero()
    return [[evaluate_point(params, k, a, b) for b in b_range] for a in a_range]
