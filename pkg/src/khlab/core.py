"""
Shared domain types, quadrature and tangential Fourier analysis.

Geometry and conventions (used by every module in the package):

* The slab is T^2 x (-1, 1): periodic tangential coordinates
  x1, x2 in [0, 2*pi) and a wall-bounded vertical coordinate x3.
  Tangential wave vectors are integer pairs (k1, k2).
* The interface sits at x3 = 0 and splits the slab into an upper
  phase (0, 1) and a lower phase (-1, 0).  Discrete fields keep a
  separate interface row per phase so that jumps are representable.
* Vertical structure is hyperbolic: every analytic profile in the
  package is c_cosh*cosh(kappa*x3) + c_sinh*sinh(kappa*x3) per phase.
  Evaluation goes through the exponential split
  a_plus*exp(kappa*x3) + a_minus*exp(-kappa*x3) so that wall-bounded
  combinations like cosh(kappa*x3) - coth(kappa)*sinh(kappa*x3) stay
  accurate for large kappa instead of cancelling catastrophically.
* All quantities are dimensionless; default densities and ion mass
  are one.

Everything here is a plain value object: construct, then treat as
immutable.  Operations are pure functions, safe to run concurrently.
"""

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class GridMismatchError(ValueError):
    """Two grid fields with incompatible extents were combined."""


def inv_expm1(y: float) -> float:
    """1 / (e^y - 1) without overflow for large positive y."""
    if y > 700.0:
        return 0.0
    return 1.0 / math.expm1(y)


def coth(x: float) -> float:
    """Hyperbolic cotangent, stable for large argument (no overflow)."""
    if x == 0.0:
        raise ValueError("coth is singular at 0")
    if x > 0:
        return 1.0 + 2.0 * inv_expm1(2.0 * x)
    return -coth(-x)


# ---------------------------------------------------------------------------
# physical configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShearParams:
    """Background configuration of the two streaming fluids.

    u_plus / u_minus are the constant velocities of the upper and lower
    fluid, a and b the transverse magnetic field strengths (fields
    (0, a, 0) above, (0, b, 0) below), n1/n2 the number densities and
    m_i the ion mass.  The canonical shear is u_plus=(1,0,0),
    u_minus=(-1,0,0); general vectors are accepted for the stability
    criteria.
    """

    u_plus: tuple = (1.0, 0.0, 0.0)
    u_minus: tuple = (-1.0, 0.0, 0.0)
    a: float = 0.0
    b: float = 0.0
    n1: float = 1.0
    n2: float = 1.0
    m_i: float = 1.0

    def __post_init__(self):
        if len(self.u_plus) != 3 or len(self.u_minus) != 3:
            raise ValueError("velocities must be 3-vectors")
        object.__setattr__(self, "u_plus", tuple(float(c) for c in self.u_plus))
        object.__setattr__(self, "u_minus", tuple(float(c) for c in self.u_minus))
        if self.a < 0 or self.b < 0:
            raise ValueError("field strengths a, b must be >= 0")
        if self.n1 <= 0 or self.n2 <= 0 or self.m_i <= 0:
            raise ValueError("densities and ion mass must be positive")

    def velocity_jump(self) -> np.ndarray:
        return np.asarray(self.u_plus) - np.asarray(self.u_minus)

    def field_upper(self) -> np.ndarray:
        return np.array([0.0, self.a, 0.0])

    def field_lower(self) -> np.ndarray:
        return np.array([0.0, self.b, 0.0])


@dataclass(frozen=True, order=True)
class WaveVector:
    """Integer tangential frequency pair on the torus."""

    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 != int(self.k1) or self.k2 != int(self.k2):
            raise ValueError("wave vector components must be integers")
        object.__setattr__(self, "k1", int(self.k1))
        object.__setattr__(self, "k2", int(self.k2))

    @property
    def kappa(self) -> float:
        return math.hypot(self.k1, self.k2)

    def is_zero(self) -> bool:
        return self.k1 == 0 and self.k2 == 0

    def as_array3(self) -> np.ndarray:
        """The wave vector embedded in R^3 (no vertical component)."""
        return np.array([float(self.k1), float(self.k2), 0.0])

    def require_nonzero(self):
        if self.is_zero():
            raise ValueError("operation requires a nonzero wave vector")
        return self


# ---------------------------------------------------------------------------
# closed-form vertical profiles
# ---------------------------------------------------------------------------

def _exp_from_hyperbolic(c_cosh, c_sinh):
    return 0.5 * (c_cosh + c_sinh), 0.5 * (c_cosh - c_sinh)


@dataclass(frozen=True)
class VerticalProfile:
    """Per-phase hyperbolic profile on x3 in [-1, 1].

    Each phase carries coefficients (c_cosh, c_sinh) of
    c_cosh*cosh(kappa*x3) + c_sinh*sinh(kappa*x3).  Coefficients may be
    complex (profiles paired with tangential phases often are).
    Evaluation uses the exponential coefficients a_plus, a_minus of
    a_plus*e^{kappa*x3} + a_minus*e^{-kappa*x3}; constructors that know
    those exactly (wall-adapted profiles) should use from_exponential
    to avoid the cosh/sinh cancellation at large kappa.

    x3 >= 0 evaluates the upper phase, x3 < 0 the lower one; the two
    interface limits at x3 = 0 are exposed separately.
    """

    kappa: float
    upper: tuple   # (c_cosh, c_sinh)
    lower: tuple
    upper_exp: tuple = field(default=None, repr=False)
    lower_exp: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.upper_exp is None:
            object.__setattr__(self, "upper_exp", _exp_from_hyperbolic(*self.upper))
        if self.lower_exp is None:
            object.__setattr__(self, "lower_exp", _exp_from_hyperbolic(*self.lower))

    @classmethod
    def from_exponential(cls, kappa, upper_exp, lower_exp):
        up = (upper_exp[0] + upper_exp[1], upper_exp[0] - upper_exp[1])
        lo = (lower_exp[0] + lower_exp[1], lower_exp[0] - lower_exp[1])
        return cls(kappa, up, lo, upper_exp=tuple(upper_exp), lower_exp=tuple(lower_exp))

    @classmethod
    def zero(cls, kappa):
        return cls(kappa, (0.0, 0.0), (0.0, 0.0))

    def _eval_exp(self, coeffs, x3):
        a_plus, a_minus = coeffs
        x3 = np.asarray(x3, dtype=float)
        return a_plus * np.exp(self.kappa * x3) + a_minus * np.exp(-self.kappa * x3)

    def eval_upper(self, x3):
        return self._eval_exp(self.upper_exp, x3)

    def eval_lower(self, x3):
        return self._eval_exp(self.lower_exp, x3)

    def eval(self, x3):
        """Evaluate pointwise; x3 >= 0 selects the upper phase."""
        x3 = np.asarray(x3, dtype=float)
        up = self.eval_upper(np.maximum(x3, 0.0))
        lo = self.eval_lower(np.minimum(x3, 0.0))
        out = np.where(x3 >= 0.0, up, lo)
        return out if out.ndim else out[()]

    def derivative(self) -> "VerticalProfile":
        """d/dx3, closed under the representation (swap and scale)."""
        k = self.kappa
        dup = (k * self.upper_exp[0], -k * self.upper_exp[1])
        dlo = (k * self.lower_exp[0], -k * self.lower_exp[1])
        return VerticalProfile.from_exponential(k, dup, dlo)

    def scaled(self, factor) -> "VerticalProfile":
        up = (factor * self.upper_exp[0], factor * self.upper_exp[1])
        lo = (factor * self.lower_exp[0], factor * self.lower_exp[1])
        return VerticalProfile.from_exponential(self.kappa, up, lo)

    def mirrored(self) -> "VerticalProfile":
        """Reflection x3 -> -x3 (upper and lower swap roles)."""
        up = (self.lower_exp[1], self.lower_exp[0])
        lo = (self.upper_exp[1], self.upper_exp[0])
        return VerticalProfile.from_exponential(self.kappa, up, lo)


@dataclass(frozen=True)
class SpectralMode:
    """One normal mode: wave vector, velocity profiles and growth exponent.

    profiles holds the VerticalProfile of each velocity component
    (v1, v2, v3).  The tangential factor is
    exp(lambda*t) * exp(i*(k1*(x1 +/- phase_shift*t) + k2*x2)) with
    drift +t in the upper phase and -t in the lower one.
    """

    k: WaveVector
    profiles: tuple   # (VerticalProfile, VerticalProfile, VerticalProfile)
    lam: complex
    phase_shift: float = 1.0

    def component(self, i: int) -> VerticalProfile:
        return self.profiles[i]

    def velocity(self, x1, x2, x3, t=0.0):
        """Velocity components at points (complex mode values)."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        x3 = np.asarray(x3, dtype=float)
        drift = np.where(x3 >= 0.0, self.phase_shift * t, -self.phase_shift * t)
        phase = np.exp(self.lam * t) * np.exp(
            1j * (self.k.k1 * (x1 + drift) + self.k.k2 * x2))
        return tuple(phase * p.eval(x3) for p in self.profiles)


# ---------------------------------------------------------------------------
# discrete two-phase fields
# ---------------------------------------------------------------------------

class TwoPhaseGridField:
    """Scalar field sampled on the two-phase slab grid.

    n_tan points per tangential direction (spacing 2*pi/n_tan), n_ver
    intervals per phase in the vertical.  Each phase stores n_ver + 1
    levels including its own interface row and wall row:

        upper levels  x3 = 0, h, ..., 1      (index 0 is the interface)
        lower levels  x3 = -1, ..., -h, 0    (index -1 is the interface)

    Values are float arrays of shape (n_tan, n_tan, n_ver + 1) with
    axes (x1, x2, x3).
    """

    __slots__ = ("n_tan", "n_ver", "values_upper", "values_lower")

    def __init__(self, n_tan, n_ver, values_upper, values_lower):
        shape = (n_tan, n_tan, n_ver + 1)
        values_upper = np.asarray(values_upper, dtype=float)
        values_lower = np.asarray(values_lower, dtype=float)
        if values_upper.shape != shape or values_lower.shape != shape:
            raise GridMismatchError(
                f"value arrays must have shape {shape}, got "
                f"{values_upper.shape} and {values_lower.shape}")
        self.n_tan = int(n_tan)
        self.n_ver = int(n_ver)
        self.values_upper = values_upper
        self.values_lower = values_lower

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, n_tan, n_ver):
        shape = (n_tan, n_tan, n_ver + 1)
        return cls(n_tan, n_ver, np.zeros(shape), np.zeros(shape))

    @classmethod
    def from_function(cls, fn, n_tan, n_ver):
        """Sample fn(x1, x2, x3) on both phases (broadcasting arrays)."""
        x1, x2 = tangential_grid(n_tan)
        zu, zl = vertical_levels(n_ver)
        up = fn(x1[:, None, None], x2[None, :, None], zu[None, None, :])
        lo = fn(x1[:, None, None], x2[None, :, None], zl[None, None, :])
        shape = (n_tan, n_tan, n_ver + 1)
        return cls(n_tan, n_ver,
                   np.broadcast_to(up, shape).copy(),
                   np.broadcast_to(lo, shape).copy())

    # -- geometry ------------------------------------------------------

    @property
    def h_tan(self) -> float:
        return TWO_PI / self.n_tan

    @property
    def h_ver(self) -> float:
        return 1.0 / self.n_ver

    @property
    def spacings(self) -> tuple:
        return (self.h_tan, self.h_ver)

    def same_grid(self, other) -> bool:
        return self.n_tan == other.n_tan and self.n_ver == other.n_ver

    # -- traces ---------------------------------------------------------

    def upper_interface_trace(self):
        return self.values_upper[:, :, 0]

    def lower_interface_trace(self):
        return self.values_lower[:, :, -1]

    def upper_wall_trace(self):
        return self.values_upper[:, :, -1]

    def lower_wall_trace(self):
        return self.values_lower[:, :, 0]

    # -- arithmetic ------------------------------------------------------

    def copy(self):
        return TwoPhaseGridField(self.n_tan, self.n_ver,
                                 self.values_upper.copy(),
                                 self.values_lower.copy())

    def _binary(self, other, op):
        if not self.same_grid(other):
            raise GridMismatchError("fields live on different grids")
        return TwoPhaseGridField(self.n_tan, self.n_ver,
                                 op(self.values_upper, other.values_upper),
                                 op(self.values_lower, other.values_lower))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        s = float(scalar)
        return TwoPhaseGridField(self.n_tan, self.n_ver,
                                 s * self.values_upper, s * self.values_lower)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.values_upper))),
                   float(np.max(np.abs(self.values_lower))))


def tangential_grid(n_tan):
    x = TWO_PI * np.arange(n_tan) / n_tan
    return x, x.copy()


def vertical_levels(n_ver):
    """Level coordinates per phase, interface and wall rows included."""
    upper = np.linspace(0.0, 1.0, n_ver + 1)
    lower = np.linspace(-1.0, 0.0, n_ver + 1)
    return upper, lower


def vector_field_zeros(n_tan, n_ver):
    return tuple(TwoPhaseGridField.zeros(n_tan, n_ver) for _ in range(3))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _vertical_weights(n_ver, h_ver):
    w = np.full(n_ver + 1, h_ver)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def inner_product_L2(f: TwoPhaseGridField, g: TwoPhaseGridField) -> float:
    """L2 inner product over both phases of the slab.

    Tangential directions use the rectangle rule (exact for trigonometric
    polynomials below the Nyquist frequency); the vertical uses the
    trapezoidal rule per phase.  Symmetric and bilinear by construction.
    """
    if not f.same_grid(g):
        raise GridMismatchError("inner product requires identical grids")
    w = _vertical_weights(f.n_ver, f.h_ver)
    s = np.sum(f.values_upper * g.values_upper * w)
    s += np.sum(f.values_lower * g.values_lower * w)
    return float(s * f.h_tan ** 2)


def norm_L2(f: TwoPhaseGridField) -> float:
    return math.sqrt(max(inner_product_L2(f, f), 0.0))


def inner_product_vector(fs, gs) -> float:
    """Sum of component-wise L2 inner products of two 3-vector fields."""
    return sum(inner_product_L2(f, g) for f, g in zip(fs, gs))


# ---------------------------------------------------------------------------
# tangential Fourier analysis
# ---------------------------------------------------------------------------

def _integer_frequencies(n_tan):
    return np.rint(np.fft.fftfreq(n_tan) * n_tan).astype(int)


def tangential_transform(f: TwoPhaseGridField) -> dict:
    """Discrete Fourier coefficients in (x1, x2) per vertical level.

    Returns a map WaveVector -> (upper_coeffs, lower_coeffs) where each
    entry is a complex array over the vertical levels of that phase.
    Normalisation is 1/n_tan^2, so a single harmonic cos(3*x1) yields
    coefficients 1/2 at k = (3, 0) and (-3, 0).
    """
    n = f.n_tan
    up = np.fft.fft2(f.values_upper, axes=(0, 1)) / n ** 2
    lo = np.fft.fft2(f.values_lower, axes=(0, 1)) / n ** 2
    freqs = _integer_frequencies(n)
    out = {}
    for i1, k1 in enumerate(freqs):
        for i2, k2 in enumerate(freqs):
            out[WaveVector(k1, k2)] = (up[i1, i2, :].copy(), lo[i1, i2, :].copy())
    return out


def inverse_tangential_transform(modes: dict, n_tan: int, n_ver: int) -> TwoPhaseGridField:
    """Rebuild a real grid field from tangential-mode columns."""
    freqs = _integer_frequencies(n_tan)
    index = {int(k): i for i, k in enumerate(freqs)}
    up = np.zeros((n_tan, n_tan, n_ver + 1), dtype=complex)
    lo = np.zeros_like(up)
    for k, (cu, cl) in modes.items():
        i1, i2 = index[k.k1], index[k.k2]
        up[i1, i2, :] = cu
        lo[i1, i2, :] = cl
    vu = np.fft.ifft2(up * n_tan ** 2, axes=(0, 1))
    vl = np.fft.ifft2(lo * n_tan ** 2, axes=(0, 1))
    return TwoPhaseGridField(n_tan, n_ver, vu.real, vl.real)


def trace_spectrum(trace: np.ndarray) -> np.ndarray:
    """2-D DFT of an interface trace with the 1/n^2 normalisation."""
    n = trace.shape[0]
    return np.fft.fft2(trace) / n ** 2


def apply_x2_multiplier(f: TwoPhaseGridField, multiplier) -> TwoPhaseGridField:
    """Apply a Fourier multiplier in x2: multiplier(k2) acts per mode.

    multiplier is a callable on the integer frequency array; it must be
    real and even in k2 for the result to stay real.
    """
    n = f.n_tan
    k2 = _integer_frequencies(n)
    m = np.asarray(multiplier(k2), dtype=float)[None, :, None]
    up = np.fft.ifft(np.fft.fft(f.values_upper, axis=1) * m, axis=1).real
    lo = np.fft.ifft(np.fft.fft(f.values_lower, axis=1) * m, axis=1).real
    return TwoPhaseGridField(f.n_tan, f.n_ver, up, lo)


# ---------------------------------------------------------------------------
# perturbation state
# ---------------------------------------------------------------------------

@dataclass
class PerturbationState:
    """Four-part decomposition of an interface perturbation.

    Coefficient maps are indexed by the streamwise integer frequency j
    of the odd/even harmonic potential families: P carries j >= n_cutoff,
    L carries 1 <= j < n_cutoff, g carries every j >= 1.  r and r_dot are
    optional 3-vector grid fields whose third component vanishes on the
    interface and the walls.  The *_dot partners hold the coefficient
    velocities used by the second-order evolution.

    Coefficients live in the co-moving tangential frame: materialising
    a field at time t multiplies mode j by exp(+i*j*t) in the upper
    phase and exp(-i*j*t) in the lower one.
    """

    n_cutoff: int
    P: dict = field(default_factory=dict)
    P_dot: dict = field(default_factory=dict)
    L: dict = field(default_factory=dict)
    L_dot: dict = field(default_factory=dict)
    g: dict = field(default_factory=dict)
    g_dot: dict = field(default_factory=dict)
    r: tuple = None
    r_dot: tuple = None

    def __post_init__(self):
        if self.n_cutoff < 1:
            raise ValueError("n_cutoff must be >= 1")
        for j in list(self.P) + list(self.P_dot):
            if j < self.n_cutoff:
                raise ValueError(f"P coefficient {j} below cutoff {self.n_cutoff}")
        for j in list(self.L) + list(self.L_dot):
            if not 1 <= j < self.n_cutoff:
                raise ValueError(f"L coefficient {j} outside [1, {self.n_cutoff})")
        for j in list(self.g) + list(self.g_dot):
            if j < 1:
                raise ValueError("g coefficients are indexed by j >= 1")
        for vec in (self.r, self.r_dot):
            if vec is not None:
                _check_r_field(vec)

    def copy(self) -> "PerturbationState":
        return PerturbationState(
            self.n_cutoff,
            dict(self.P), dict(self.P_dot),
            dict(self.L), dict(self.L_dot),
            dict(self.g), dict(self.g_dot),
            tuple(c.copy() for c in self.r) if self.r is not None else None,
            tuple(c.copy() for c in self.r_dot) if self.r_dot is not None else None,
        )

    def support(self) -> dict:
        return {"P": sorted(set(self.P) | set(self.P_dot)),
                "L": sorted(set(self.L) | set(self.L_dot)),
                "g": sorted(set(self.g) | set(self.g_dot))}


def _check_r_field(vec):
    if len(vec) != 3:
        raise ValueError("r must be a 3-vector of grid fields")
    r3 = vec[2]
    for row in (r3.upper_interface_trace(), r3.upper_wall_trace(),
                r3.lower_interface_trace(), r3.lower_wall_trace()):
        if np.any(row != 0.0):
            raise ValueError("third component of r must vanish exactly on "
                             "the interface and the walls")
