"""Covariance-matrix level quantities for two-mode Gaussian states.

All covariance matrices use the convention in which the vacuum has variance
1/2, quadratures ordered as ``(x1, p1, x2, p2)``. Entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

VACUUM = 0.5
_SLACK = 1e-12

STS = "sts"
MTS = "mts"
FAMILIES = (STS, MTS)


@dataclass(frozen=True)
class TwoModeState:
    """A two-mode thermal state processed by a squeezer (STS) or a mixer (MTS).

    ``strength`` is the two-mode squeezing ``lambda`` for STS and the mixing
    angle ``phi`` for MTS.
    """

    family: str
    n1: float
    n2: float
    strength: float

    def __post_init__(self):
        family = self.family.lower()
        if family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected 'sts' or 'mts'")
        object.__setattr__(self, "family", family)
        if not (self.n1 >= 0 and self.n2 >= 0):
            raise ValueError(f"thermal photon numbers must be >= 0, got {self.n1}, {self.n2}")
        if family == STS and not self.strength >= 0:
            raise ValueError(f"squeezing must be >= 0, got {self.strength}")
        if family == MTS and not (0 <= self.strength <= math.pi / 2 + 1e-15):
            raise ValueError(f"mixing angle must lie in [0, pi/2], got {self.strength}")

    @classmethod
    def sts(cls, n1: float, n2: float, lam: float) -> "TwoModeState":
        return cls(STS, float(n1), float(n2), float(lam))

    @classmethod
    def mts(cls, n1: float, n2: float, phi: float) -> "TwoModeState":
        return cls(MTS, float(n1), float(n2), float(phi))

    @property
    def is_product(self) -> bool:
        if self.family == STS:
            return self.strength == 0
        return self.n1 == self.n2 or self.strength in (0.0, math.pi / 2)


@dataclass(frozen=True)
class StandardFormCM:
    """Two-mode covariance matrix in standard form.

    ``sigma = [[A, C], [C^T, B]]`` with ``A = a*I``, ``B = b*I`` and
    ``C = diag(c1, c2)``.
    """

    a: float
    b: float
    c1: float
    c2: float

    def __post_init__(self):
        if self.a < VACUUM - _SLACK or self.b < VACUUM - _SLACK:
            raise ValueError(f"local variances below vacuum: a={self.a}, b={self.b}")
        det = (self.a * self.b - self.c1**2) * (self.a * self.b - self.c2**2)
        if det < -_SLACK:
            raise ValueError(f"negative determinant {det}")
        d_minus = symplectic_data(self).d_minus
        if d_minus < VACUUM - _SLACK:
            raise ValueError(f"unphysical covariance matrix: smallest symplectic eigenvalue {d_minus}")

    @property
    def A(self) -> np.ndarray:
        return np.diag([self.a, self.a])

    @property
    def B(self) -> np.ndarray:
        return np.diag([self.b, self.b])

    @property
    def C(self) -> np.ndarray:
        return np.diag([self.c1, self.c2])

    def matrix(self) -> np.ndarray:
        """Full 4x4 covariance matrix in ``(x1, p1, x2, p2)`` ordering."""
        return np.block([[self.A, self.C], [self.C.T, self.B]])

    @property
    def is_symmetric_class(self) -> bool:
        """True when ``c2 = +-c1`` (the class containing STS and MTS)."""
        scale = max(abs(self.c1), abs(self.c2), 1.0)
        return abs(abs(self.c1) - abs(self.c2)) <= 1e-12 * scale


@dataclass(frozen=True)
class SymplecticData:
    I1: float
    I2: float
    I3: float
    I4: float
    delta: float
    d_plus: float
    d_minus: float


@dataclass(frozen=True)
class MeasurementCM:
    """Covariance matrix ``[[mx, mxp], [mxp, mp]]`` of a single-mode Gaussian measurement seed."""

    mx: float
    mp: float
    mxp: float = 0.0

    def __post_init__(self):
        if self.mx * self.mp - self.mxp**2 < 0.25 - 1e-12:
            raise ValueError("measurement covariance violates the uncertainty relation")

    def matrix(self) -> np.ndarray:
        return np.array([[self.mx, self.mxp], [self.mxp, self.mp]])

    @classmethod
    def heterodyne(cls) -> "MeasurementCM":
        return cls(VACUUM, VACUUM, 0.0)


def h_entropy(x: float) -> float:
    """Entropy (nats) of a single-mode Gaussian state with symplectic eigenvalue ``x``."""
    if x < VACUUM - _SLACK:
        raise ValueError(f"symplectic eigenvalue {x} below the vacuum value 1/2")
    if x <= VACUUM:
        return 0.0
    return float(xlogy(x + 0.5, x + 0.5) - xlogy(x - 0.5, x - 0.5))


def standard_form(state: TwoModeState) -> StandardFormCM:
    """Covariance matrix of an STS or MTS, already in standard form."""
    v1 = state.n1 + 0.5
    v2 = state.n2 + 0.5
    if state.family == STS:
        ch, sh = math.cosh(state.strength), math.sinh(state.strength)
        a = v1 * ch**2 + v2 * sh**2
        b = v1 * sh**2 + v2 * ch**2
        c = (v1 + v2) * ch * sh
        return StandardFormCM(a, b, c, -c)
    co, si = math.cos(state.strength), math.sin(state.strength)
    a = v1 * co**2 + v2 * si**2
    b = v1 * si**2 + v2 * co**2
    c = (state.n2 - state.n1) * co * si
    return StandardFormCM(a, b, c, c)


def _eigenvalues(delta: float, det: float) -> tuple[float, float]:
    disc = delta**2 - 4 * det
    if disc < -1e-10:
        raise ValueError(f"unphysical invariants: delta^2 - 4 I4 = {disc}")
    root = math.sqrt(max(disc, 0.0))
    d_plus = math.sqrt(0.5 * (delta + root))
    # the minus branch loses precision by subtraction; use d+ d- = sqrt(I4)
    d_minus = math.sqrt(max(det, 0.0)) / d_plus if d_plus > 0 else 0.0
    return d_plus, d_minus


def _symmetric_eigenvalues(a: float, b: float, c: float, opposite: bool) -> tuple[float, float]:
    """``d+, d-`` for ``c2 = -c1`` (``opposite``) or ``c2 = c1`` without the ``Delta^2 - 4 I4`` cancellation.

    Near-pure states make that discriminant vanish, and taking its square
    root turns rounding at 1e-16 into errors of order 1e-8.
    """
    c = abs(c)
    if opposite:
        root = math.sqrt(max((a + b - 2 * c) * (a + b + 2 * c), 0.0))
        return 0.5 * (root + abs(a - b)), 0.5 * (root - abs(a - b))
    d_plus = 0.5 * (a + b + math.hypot(a - b, 2 * c))
    return d_plus, (a * b - c * c) / d_plus


def symplectic_data(cm: StandardFormCM) -> SymplecticData:
    I1 = cm.a**2
    I2 = cm.b**2
    I3 = cm.c1 * cm.c2
    I4 = (cm.a * cm.b - cm.c1**2) * (cm.a * cm.b - cm.c2**2)
    delta = I1 + I2 + 2 * I3
    if cm.is_symmetric_class:
        d_plus, d_minus = _symmetric_eigenvalues(cm.a, cm.b, cm.c1, opposite=I3 <= 0)
    else:
        d_plus, d_minus = _eigenvalues(delta, I4)
    return SymplecticData(I1, I2, I3, I4, delta, d_plus, d_minus)


def pt_min_symplectic_eigenvalue(cm: StandardFormCM) -> float:
    """Smallest symplectic eigenvalue of the partially transposed state.

    The state is separable iff this is at least 1/2.
    """
    sd = symplectic_data(cm)
    if cm.is_symmetric_class:
        # transposition flips the sign of c2
        return _symmetric_eigenvalues(cm.a, cm.b, cm.c1, opposite=sd.I3 > 0)[1]
    return _eigenvalues(sd.I1 + sd.I2 - 2 * sd.I3, sd.I4)[1]


def is_separable(cm: StandardFormCM) -> bool:
    return pt_min_symplectic_eigenvalue(cm) >= VACUUM - _SLACK


def gaussian_purity(cm: StandardFormCM) -> float:
    """``Tr[rho^2] = 1 / (4 sqrt(det sigma))``."""
    return 1.0 / (4.0 * math.sqrt(symplectic_data(cm).I4))


def joint_entropy(cm: StandardFormCM) -> float:
    sd = symplectic_data(cm)
    return h_entropy(sd.d_plus) + h_entropy(sd.d_minus)


def mutual_information(cm: StandardFormCM) -> float:
    sd = symplectic_data(cm)
    mi = h_entropy(math.sqrt(sd.I1)) + h_entropy(math.sqrt(sd.I2)) - h_entropy(sd.d_plus) - h_entropy(sd.d_minus)
    return max(mi, 0.0) if mi > -1e-12 else mi


def heterodyne_conditional_cm(cm: StandardFormCM, m: MeasurementCM) -> np.ndarray:
    """Conditional covariance of mode A after a Gaussian measurement on B.

    Schur complement ``A - C (B + sigma_M)^-1 C^T``; it does not depend on the
    measurement outcome.
    """
    bm = cm.B + m.matrix()
    det = np.linalg.det(bm)
    assert det > 0, "B + sigma_M must be positive definite"
    return cm.A - cm.C @ np.linalg.solve(bm, cm.C.T)


def _pure_measurement(squeeze: float, angle: float) -> MeasurementCM:
    e2 = math.exp(2 * squeeze)
    co, si = math.cos(angle), math.sin(angle)
    mx = 0.5 * (e2 * co**2 + si**2 / e2)
    mp = 0.5 * (e2 * si**2 + co**2 / e2)
    mxp = 0.5 * (e2 - 1 / e2) * co * si
    # rounding can dip below the uncertainty bound by an ulp
    return _unchecked_measurement(mx, mp, mxp)


def _unchecked_measurement(mx: float, mp: float, mxp: float) -> MeasurementCM:
    m = object.__new__(MeasurementCM)
    object.__setattr__(m, "mx", mx)
    object.__setattr__(m, "mp", mp)
    object.__setattr__(m, "mxp", mxp)
    return m


def gaussian_conditional_entropy(cm: StandardFormCM, m: MeasurementCM | None = None) -> float:
    m = MeasurementCM.heterodyne() if m is None else m
    det = np.linalg.det(heterodyne_conditional_cm(cm, m))
    return h_entropy(math.sqrt(max(det, 0.25)))


def minimize_conditional_det(cm: StandardFormCM) -> tuple[float, MeasurementCM]:
    """Numerically minimise ``det sigma_P`` over pure Gaussian measurement seeds.

    The seeds are squeezed vacua parameterised by squeezing ``s`` and angle
    ``theta``. Returns the minimal determinant and the minimising seed.
    """

    def objective(v):
        return float(np.linalg.det(heterodyne_conditional_cm(cm, _pure_measurement(v[0], v[1]))))

    candidates = [(s, th) for s in np.linspace(-3.0, 3.0, 25) for th in np.linspace(0, math.pi, 9)[:-1]]
    best = min(candidates, key=objective)
    res = minimize(objective, best, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
    value, arg = float(res.fun), res.x
    # homodyne limits
    for th in (0.0, math.pi / 2):
        hom = objective((18.0, th))
        if hom < value:
            value, arg = hom, (18.0, th)
    return value, _pure_measurement(arg[0], arg[1])


def gaussian_discord(cm: StandardFormCM, method: str = "closed") -> float:
    """Gaussian quantum discord (nats), measuring mode B.

    ``method="closed"`` uses the heterodyne optimum valid when ``c2 = +-c1``;
    ``method="numeric"`` minimises over pure Gaussian measurements and works
    for any standard-form matrix.
    """
    sd = symplectic_data(cm)
    base = h_entropy(math.sqrt(sd.I2)) - h_entropy(sd.d_minus) - h_entropy(sd.d_plus)
    if method == "closed":
        if not cm.is_symmetric_class:
            raise ValueError("closed form requires c2 = +-c1; use method='numeric'")
        cond = gaussian_conditional_entropy(cm)
    elif method == "numeric":
        det, _ = minimize_conditional_det(cm)
        cond = h_entropy(math.sqrt(max(det, 0.25)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return base + cond


def geometric_objective(cm: StandardFormCM, m: MeasurementCM) -> float:
    """``Tr[(rho_AB - rho_P (x) rho_M)^2]`` from Gaussian overlaps.

    Uses ``Tr[rho1 rho2] = 1/sqrt(det(sigma1 + sigma2))`` for zero-mean
    two-mode states.
    """
    sigma = cm.matrix()
    sp = heterodyne_conditional_cm(cm, m)
    prod = np.zeros((4, 4))
    prod[:2, :2] = sp
    prod[2:, 2:] = m.matrix()
    purity_ab = 1.0 / math.sqrt(np.linalg.det(2 * sigma))
    purity_prod = 1.0 / math.sqrt(np.linalg.det(2 * prod))
    overlap = 1.0 / math.sqrt(np.linalg.det(sigma + prod))
    return purity_ab + purity_prod - 2 * overlap


def optimal_geometric_measurement(cm: StandardFormCM) -> MeasurementCM:
    if not cm.is_symmetric_class:
        raise ValueError("closed-form minimiser requires c2 = +-c1")
    ab = cm.a * cm.b
    c2 = cm.c1**2
    disc = 4 * ab - 3 * c2
    if disc < 0:
        raise ValueError(f"4ab - 3c^2 = {disc} < 0")
    m = math.sqrt(ab) * (math.sqrt(disc) + math.sqrt(ab)) / (3 * cm.a)
    return MeasurementCM(m, m, 0.0)


def gaussian_geometric_discord(cm: StandardFormCM, method: str = "closed") -> float:
    """Gaussian geometric discord (squared Hilbert-Schmidt distance)."""
    if method == "closed":
        value = geometric_objective(cm, optimal_geometric_measurement(cm))
    elif method == "numeric":

        def objective(v):
            mx, mp, mxp = math.exp(v[0]), math.exp(v[1]), v[2]
            if mx * mp - mxp**2 < 0.25:
                return 1e3
            return geometric_objective(cm, _unchecked_measurement(mx, mp, mxp))

        start = optimal_geometric_measurement(cm) if cm.is_symmetric_class else MeasurementCM(cm.b, cm.b)
        x0 = [math.log(start.mx), math.log(start.mp), 0.0]
        res = minimize(objective, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 20000})
        value = float(res.fun)
    else:
        raise ValueError(f"unknown method {method!r}")
    return max(value, 0.0)
