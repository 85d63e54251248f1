"""Truncated Fock-space kernels.

Scalar ``*_element`` functions evaluate closed-form matrix elements with
arbitrary-precision arithmetic (mpmath) so that the alternating factorial
sums are exact to double precision. The ``*_table`` / ``*_matrix`` builders
are vectorised equivalents in extended precision used by the measurement
pipeline; the two routes are cross-checked in the test-suite.

Operator conventions::

    S(lam)  = exp(lam (a1^+ a2^+ - a1 a2))        two-mode squeezer
    U(phi)  = exp(phi (a1^+ a2 - a1 a2^+))        two-mode mixer
    S(r)    = exp((r a^2 - r a^+^2) / 2)          single-mode squeezer, r real
    D(al)   = exp(al a^+ - al^* a)                displacement

A measurement basis ``Pi_n = D(al) S(r) |n><n| S(r)^+ D(al)^+`` on mode B is
handled as a number-basis measurement of the state transformed by
``V^+ = S(-r) D(-al)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import eval_genlaguerre

from .covariance import STS, TwoModeState, standard_form

HARD_CAP = 4096


class IndexCapError(OverflowError):
    """A Fock index or truncation exceeded :data:`HARD_CAP`."""


@dataclass(frozen=True)
class FockCutoff:
    """Truncation used for one state/basis pair.

    ``dim`` is the number of measured outcomes on mode B (states
    ``|0>..|dim-1>`` of the locally transformed mode), ``trace_error`` the
    missing trace ``1 - Tr rho`` of the truncated, locally transformed state.
    Mode A and the thermal inputs are truncated separately at a much
    tighter inner tolerance: ``dim_a`` levels for mode A and ``n_thermal``
    input levels per mode. ``dim_a`` defaults to ``dim``.
    """

    dim: int
    trace_error: float
    n_thermal: int
    dim_a: int = 0

    def __post_init__(self):
        if self.dim_a == 0:
            object.__setattr__(self, "dim_a", self.dim)
        if self.dim < 1 or self.n_thermal < 1 or self.dim_a < 1:
            raise ValueError("cutoff dimensions must be >= 1")
        if not (-1e-12 <= self.trace_error <= 1.0):
            raise ValueError(f"trace error {self.trace_error} outside [0, 1]")


@dataclass
class FockMatrix:
    entries: np.ndarray
    cutoff: FockCutoff | None = None
    hermitian: bool = True

    def __post_init__(self):
        if self.hermitian:
            m = self.entries
            scale = max(np.max(np.abs(m)), 1e-300)
            if np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
                raise ValueError("matrix flagged hermitian is not")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))


@dataclass(frozen=True)
class MeasurementBasis:
    """Displaced squeezed number basis ``D(alpha) S(r) |n>``."""

    alpha: complex = 0.0
    r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "r", float(self.r))

    @property
    def is_number(self) -> bool:
        return self.alpha == 0 and self.r == 0


def _check_cap(*indices: int) -> None:
    for i in indices:
        if i < 0:
            raise ValueError(f"negative Fock index {i}")
        if i > HARD_CAP:
            raise IndexCapError(f"Fock index {i} exceeds the hard cap {HARD_CAP}")


# thermal statistics


def thermal_pmf(N: float, s: int) -> float:
    """Photon-number distribution ``N^s / (1+N)^(s+1)`` of a thermal state."""
    if N < 0 or s < 0:
        raise ValueError("need N >= 0 and s >= 0")
    if N == 0:
        return 1.0 if s == 0 else 0.0
    return math.exp(s * math.log(N) - (s + 1) * math.log1p(N))


def thermal_distribution(N: float, size: int) -> np.ndarray:
    s = np.arange(size)
    if N == 0:
        return (s == 0).astype(float)
    return np.exp(s * math.log(N) - (s + 1) * math.log1p(N))


def thermal_tail(N: float, size: int) -> float:
    """Probability mass at occupations ``>= size``."""
    if N == 0:
        return 0.0 if size >= 1 else 1.0
    return math.exp(size * (math.log(N) - math.log1p(N)))


def thermal_levels(n1: float, n2: float, tol: float) -> int:
    """Smallest per-mode input truncation whose joint thermal tail is <= tol."""
    size = 1
    while thermal_tail(n1, size) + thermal_tail(n2, size) > tol:
        size += 1
        _check_cap(size)
    return size


# scalar closed forms (arbitrary precision)


def _lf(n: int) -> float:
    return math.lgamma(n + 1)


def _dps_for(log_max: float) -> int:
    # guard digits on top of the largest term's magnitude
    return 30 + max(0, int(math.ceil(log_max / math.log(10))))


def two_mode_squeezer_element(h: int, n: int, s: int, t: int, lam: float) -> float:
    """``<h n| S(lam) |s t>`` from the double alternating factorial sum.

    Zero unless ``t + h == s + n``. The sum runs over ``a <= min(s, t)`` and
    ``b <= min(h, n)`` with ``mu = e^lam`` and a ``sech(lam)`` power of
    ``t + h - a - b + 1``.
    """
    _check_cap(h, n, s, t)
    if t + h != s + n:
        return 0.0
    if lam == 0:
        return 1.0 if (h == s and n == t) else 0.0
    log_sech = -math.log(math.cosh(lam))
    root = 0.5 * (_lf(s) + _lf(t) + _lf(h) + _lf(n))
    terms = []
    log_max = 0.0
    for a in range(min(s, t) + 1):
        for b in range(min(h, n) + 1):
            lm = (
                (t + h - a - b + 1) * log_sech
                + (a - b + h - s) * lam
                + _lf(t + h - a - b)
                + root
                - _lf(a) - _lf(t - a) - _lf(s - a) - _lf(b) - _lf(n - b) - _lf(h - b)
            )
            log_max = max(log_max, lm)
            terms.append((a, b))
    with mpmath.workdps(_dps_for(log_max)):
        lam_m = mpmath.mpf(lam)
        sech = 1 / mpmath.cosh(lam_m)
        mu = mpmath.exp(lam_m)
        f = mpmath.factorial
        pref = mpmath.sqrt(f(s) * f(t) * f(h) * f(n))
        total = mpmath.mpf(0)
        for a, b in terms:
            num = f(t + h - a - b) * sech ** (t + h - a - b + 1) * mu ** (a - b + h - s)
            den = f(a) * f(t - a) * f(s - a) * f(b) * f(n - b) * f(h - b)
            total += (-1) ** (a + b) * num / den
        return float(pref * total)


def two_mode_mixer_element(h: int, n: int, s: int, t: int, phi: float) -> float:
    """``<h n| U(phi) |s t>`` from the binomial sum; zero unless ``h + n == s + t``."""
    _check_cap(h, n, s, t)
    if h + n != s + t:
        return 0.0
    lo, hi = max(0, h - t), min(h, s)
    if lo > hi:
        return 0.0
    with mpmath.workdps(30 + (s + t) // 3):
        p = mpmath.mpf(phi)
        si, co = mpmath.sin(p), mpmath.cos(p)
        f = mpmath.factorial
        pref = mpmath.sqrt(f(h) * f(s + t - h) / (f(s) * f(t)))
        total = mpmath.mpf(0)
        for a in range(lo, hi + 1):
            total += (
                (-1) ** (s - a)
                * mpmath.binomial(s, a)
                * mpmath.binomial(t, h - a)
                * si ** (s + h - 2 * a)
                * co ** (t + 2 * a - h)
            )
        return float(pref * total)


def single_mode_squeezer_element(k: int, q: int, r: float) -> float:
    """``<k| S(r) |q>`` for real ``r``; zero when ``k - q`` is odd."""
    _check_cap(k, q)
    if (k - q) % 2:
        return 0.0
    if r == 0:
        return 1.0 if k == q else 0.0
    with mpmath.workdps(30 + (k + q) // 2):
        rm = mpmath.mpf(r)
        th = mpmath.tanh(rm)
        ch = mpmath.cosh(rm)
        f = mpmath.factorial
        total = mpmath.mpf(0)
        for j in range(k % 2, min(k, q) + 1, 2):
            p, l = (k - j) // 2, (q - j) // 2
            total += (-th / 2) ** p * (th / 2) ** l / (f(p) * f(l) * f(j)) / ch**j
        return float(mpmath.sqrt(f(k) * f(q)) * total / mpmath.sqrt(ch))


def _laguerre(n: int, a: int, x) -> "mpmath.mpf":
    """Associated Laguerre polynomial as its finite alternating sum.

    ``mpmath.laguerre`` fails to converge at exact zeros such as
    ``L_1(1)``; the explicit sum has no such problem at working precision.
    """
    term = mpmath.binomial(n + a, n)
    total = term
    for j in range(1, n + 1):
        term *= -x * (n - j + 1) / (j * (a + j))
        total += term
    return total


def displacement_element(k: int, q: int, alpha: complex) -> complex:
    """``<k| D(alpha) |q>`` via the associated Laguerre closed form."""
    _check_cap(k, q)
    alpha = complex(alpha)
    if alpha == 0:
        return complex(k == q)
    x = abs(alpha) ** 2
    with mpmath.workdps(30 + int(x / math.log(10)) + min(k, q) // 2):
        al = mpmath.mpc(alpha.real, alpha.imag)
        xm = mpmath.mpf(x)
        f = mpmath.factorial
        if k >= q:
            val = mpmath.sqrt(f(q) / f(k)) * al ** (k - q) * _laguerre(q, k - q, xm)
        else:
            val = mpmath.sqrt(f(k) / f(q)) * (-mpmath.conj(al)) ** (q - k) * _laguerre(k, q - k, xm)
        val *= mpmath.exp(-xm / 2)
        return complex(val)


# vectorised builders (extended precision)


@lru_cache(maxsize=8)
def _log_factorials(size: int) -> np.ndarray:
    out = np.zeros(size, dtype=np.longdouble)
    out[1:] = np.cumsum(np.log(np.arange(1, size, dtype=np.longdouble)))
    return out


@lru_cache(maxsize=64)
def squeezer_table(lam: float, n_in: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Elements ``<h q| S(lam) |s t>`` for ``s, t < n_in`` and ``h < dim``.

    The selection rule fixes ``q = h - s + t``; returns ``(values, q)`` with
    shape ``(n_in, n_in, dim)``. Entries with ``q < 0`` are zero. Evaluated by
    the single alternating sum obtained from the normal-ordered factorisation
    ``S = exp(tau a1^+ a2^+) sech^(n1+n2+1) exp(-tau a1 a2)``.
    """
    _check_cap(n_in, dim)
    s = np.arange(n_in)[:, None, None]
    t = np.arange(n_in)[None, :, None]
    h = np.arange(dim)[None, None, :]
    q = h - s + t
    shape = np.broadcast_shapes(s.shape, t.shape, h.shape)
    q = np.broadcast_to(q, shape).copy()
    valid = q >= 0
    if lam == 0:
        values = ((h == s) & valid).astype(float)
        return values, q
    lf = _log_factorials(dim + 2 * n_in + 2)
    ld = np.longdouble
    log_tau = np.log(ld(math.tanh(lam)))
    log_sech = -np.log(np.cosh(ld(lam)))
    qc = np.where(valid, q, 0)
    root = 0.5 * (lf[s] + lf[t] + lf[h] + lf[qc])
    total = np.zeros(shape, dtype=ld)
    for a in range(n_in):
        b = h - s + a
        ok = valid & (a <= s) & (a <= t) & (b >= 0)
        if not ok.any():
            continue
        bc = np.where(ok, b, 0)
        sa = np.where(ok, s - a, 0)
        ta = np.where(ok, t - a, 0)
        lm = (a + bc) * log_tau - lf[a] - lf[bc] + root - lf[sa] - lf[ta] + (s + t - 2 * a + 1) * log_sech
        term = np.where(ok, np.exp(np.where(ok, lm, 0)), 0)
        total += term if a % 2 == 0 else -term
    return np.asarray(total, dtype=float), q


@lru_cache(maxsize=64)
def mixer_table(phi: float, n_in: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Elements ``<h q| U(phi) |s t>`` with ``q = s + t - h``; shape ``(n_in, n_in, dim)``."""
    _check_cap(n_in, dim)
    s = np.arange(n_in)[:, None, None]
    t = np.arange(n_in)[None, :, None]
    h = np.arange(dim)[None, None, :]
    shape = np.broadcast_shapes(s.shape, t.shape, h.shape)
    q = np.broadcast_to(s + t - h, shape).copy()
    valid = q >= 0
    lf = _log_factorials(2 * n_in + dim + 2)
    ld = np.longdouble
    si = np.sin(ld(phi))
    co = np.cos(ld(phi))
    qc = np.where(valid, q, 0)
    root = 0.5 * (lf[h] + lf[qc] - lf[s] - lf[t])
    total = np.zeros(shape, dtype=ld)
    for a in range(n_in):
        ha = h - a
        ok = valid & (a <= s) & (ha >= 0) & (ha <= t)
        if not ok.any():
            continue
        hc = np.where(ok, ha, 0)
        sa = np.where(ok, s - a, 0)
        th = np.where(ok, t - ha, 0)
        log_binom = lf[s] - lf[a] - lf[sa] + lf[t] - lf[hc] - lf[th]
        p_sin = np.where(ok, s + h - 2 * a, 0)
        p_cos = np.where(ok, t + 2 * a - h, 0)
        mag = np.exp(np.where(ok, log_binom + root, 0)) * si**p_sin * co**p_cos
        sign = np.where((s - a) % 2 == 0, 1, -1)
        total += np.where(ok, sign * mag, 0)
    return np.asarray(total, dtype=float), q


def two_mode_table(state: TwoModeState, n_in: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    if state.family == STS:
        return squeezer_table(state.strength, n_in, dim)
    return mixer_table(state.strength, n_in, dim)


def single_mode_squeezer_matrix(r: float, rows: int, cols: int) -> np.ndarray:
    """Block ``<k| S(r) |q>`` for ``k < rows``, ``q < cols``."""
    _check_cap(rows, cols)
    if r == 0:
        return np.eye(rows, cols)
    m = np.arange(rows)[:, None]
    n = np.arange(cols)[None, :]
    lf = _log_factorials(max(rows, cols) + 1)
    ld = np.longdouble
    th = np.tanh(ld(r))
    log_half_t = np.log(abs(th) / 2)
    log_cosh = np.log(np.cosh(ld(r)))
    sgn_t = 1 if th > 0 else -1
    root = 0.5 * (lf[m] + lf[n]) - 0.5 * log_cosh
    total = np.zeros((rows, cols), dtype=ld)
    parity_ok = (m - n) % 2 == 0
    for j in range(min(rows, cols)):
        ok = parity_ok & (m >= j) & (n >= j) & ((m - j) % 2 == 0)
        if not ok.any():
            continue
        p = np.where(ok, (m - j) // 2, 0)
        l = np.where(ok, (n - j) // 2, 0)
        lm = root + (p + l) * log_half_t - lf[p] - lf[l] - lf[j] - j * log_cosh
        sign = np.where(p % 2 == 0, 1, -1) * np.where((p + l) % 2 == 0, 1, sgn_t)
        total += np.where(ok, sign * np.exp(np.where(ok, lm, 0)), 0)
    return np.asarray(total, dtype=float)


def displacement_matrix(alpha: complex, rows: int, cols: int) -> np.ndarray:
    """Block ``<k| D(alpha) |q>`` for ``k < rows``, ``q < cols``."""
    _check_cap(rows, cols)
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(rows, cols, dtype=complex)
    k = np.arange(rows)[:, None]
    q = np.arange(cols)[None, :]
    lo = np.minimum(k, q)
    diff = np.abs(k - q)
    x = abs(alpha) ** 2
    lf = _log_factorials(max(rows, cols) + 1).astype(float)
    log_mag = 0.5 * (lf[lo] - lf[np.maximum(k, q)]) + diff * math.log(abs(alpha)) - x / 2
    phase_up = alpha / abs(alpha)
    phase_down = -np.conj(alpha) / abs(alpha)
    phase = np.where(k >= q, phase_up ** (k - q).clip(0), phase_down ** (q - k).clip(0))
    lag = eval_genlaguerre(lo, diff, x)
    return np.exp(log_mag) * lag * phase


def local_transform(basis: MeasurementBasis, rows: int, cols: int) -> tuple[np.ndarray, bool]:
    """Block of ``W = V^+ = S(-r) D(-alpha)`` with ``k < rows`` and ``q < cols``.

    Returns ``(W, truncated)``. ``truncated`` is set when the inner sum of the
    composite ``S D`` product could not be converged below ``1e-8`` relative
    before hitting the hard cap.
    """
    if basis.is_number:
        return np.eye(rows, cols, dtype=complex), False
    if basis.r == 0:
        return displacement_matrix(-basis.alpha, rows, cols), False
    if basis.alpha == 0:
        return single_mode_squeezer_matrix(-basis.r, rows, cols).astype(complex), False
    inner = max(rows, cols) + 40 + int(4 * abs(basis.alpha) ** 2)
    while True:
        inner = min(inner, HARD_CAP)
        sq = single_mode_squeezer_matrix(-basis.r, rows, inner)
        dp = displacement_matrix(-basis.alpha, inner, cols)
        w = sq @ dp
        tail_start = int(0.9 * inner)
        tail = np.abs(sq[:, tail_start:]) @ np.abs(dp[tail_start:, :])
        scale = max(np.max(np.abs(w)), 1e-300)
        if np.max(tail) <= 1e-8 * scale:
            return w, False
        if inner >= HARD_CAP:
            return w, True
        inner *= 2


def composed_element(family: str, strength: float, basis: MeasurementBasis, h: int, k: int, s: int, t: int) -> complex:
    """``<h k| (1 (x) V^+) O |s t>`` with ``O`` the STS squeezer or MTS mixer.

    The sum over the intermediate mode-B index ``q`` has a single non-zero
    term fixed by the selection rule of ``O``.
    """
    _check_cap(h, k, s, t)
    q = h - s + t if family == STS else s + t - h
    if q < 0:
        return 0j
    if family == STS:
        o = two_mode_squeezer_element(h, q, s, t, strength)
    else:
        o = two_mode_mixer_element(h, q, s, t, strength)
    if basis.is_number:
        w = complex(k == q)
    elif basis.r == 0:
        w = displacement_element(k, q, -basis.alpha)
    elif basis.alpha == 0:
        w = single_mode_squeezer_element(k, q, -basis.r)
    else:
        w = local_transform(basis, k + 1, q + 1)[0][k, q]
    return o * w




# sector-factorised conditional states

INNER_TOLERANCE = 1e-12


def inner_tolerance(eps: float) -> float:
    """Truncation tolerance for the thermal inputs and for mode A.

    Fixed at :data:`INNER_TOLERANCE` unless ``eps`` asks for more, so the
    outcome cutoff alone carries the dependence on ``eps``.
    """
    return max(min(INNER_TOLERANCE, 1e-2 * eps), 1e-15)


@dataclass(frozen=True)
class SectorTable:
    """Thermal-weighted two-mode amplitudes grouped by selection-rule sector.

    The operator ``O`` maps ``|s t>`` to states ``|h q>`` with ``q`` fixed
    by ``h`` and a conserved label (``t - s`` for the squeezer, ``s + t``
    for the mixer). Within one sector ``q`` is a function of ``h`` alone, so
    every sector contributes ``gram[i] * w w^+`` to the unnormalised
    conditional state, with ``w[h] = W[k, q[i, h]]``.

    ``q`` holds ``-1`` where the amplitude vanishes identically; ``kept`` is
    the thermal input mass represented, ``sum p_s p_t``.
    """

    q: np.ndarray
    gram: np.ndarray
    kept: float

    @property
    def dim_a(self) -> int:
        return self.q.shape[1]

    @property
    def q_max(self) -> int:
        return int(self.q.max(initial=0))

    def marginal_a(self) -> np.ndarray:
        """Photon-number distribution of mode A (independent of the basis on B)."""
        return np.einsum("shh->h", self.gram)

    def restrict(self, dim_a: int) -> "SectorTable":
        return SectorTable(self.q[:, :dim_a], self.gram[:, :dim_a, :dim_a], self.kept)


@lru_cache(maxsize=32)
def sector_table(state: TwoModeState, n_in: int, dim_a: int) -> SectorTable:
    values, q = two_mode_table(state, n_in, dim_a)
    p1 = thermal_distribution(state.n1, n_in)
    p2 = thermal_distribution(state.n2, n_in)
    amp = values * np.sqrt(np.outer(p1, p2))[:, :, None]
    s, t = np.meshgrid(np.arange(n_in), np.arange(n_in), indexing="ij")
    label = t - s if state.family == STS else s + t
    qs, grams = [], []
    for key in np.unique(label):
        si, ti = np.nonzero(label == key)
        block = amp[si, ti, :]
        row = q[si[0], ti[0], :]
        qs.append(np.where(row >= 0, row, -1))
        grams.append(block.T @ block)
    return SectorTable(np.array(qs), np.array(grams), float(p1.sum() * p2.sum()))


def _gathered(table: SectorTable, w: np.ndarray) -> np.ndarray:
    """``X[k, sector, h] = W[k, q[sector, h]]`` with zero where ``q = -1``."""
    padded = np.concatenate([w, np.zeros((w.shape[0], 1), dtype=w.dtype)], axis=1)
    return padded[:, table.q]


def joint_distribution(table: SectorTable, w: np.ndarray) -> np.ndarray:
    """``P[h, k]``: probability of ``h`` photons in A and outcome ``k`` on B."""
    x = _gathered(table, w)
    diag = np.einsum("shh->sh", table.gram)
    return np.einsum("sh,ksh->hk", diag, np.abs(x) ** 2)


def unnormalized_conditionals(table: SectorTable, w: np.ndarray) -> np.ndarray:
    """``p_k rho_A,k`` for every row ``k`` of ``w``; shape ``(rows, dim_a, dim_a)``.

    Summation runs over sectors in a fixed order, so results are
    bit-reproducible.
    """
    x = _gathered(table, w)
    out = np.zeros((w.shape[0], table.dim_a, table.dim_a), dtype=complex)
    for i in range(table.q.shape[0]):
        xi = x[:, i, :]
        out += table.gram[i][None] * (xi[:, :, None] * xi[:, None, :].conj())
    return out


@dataclass(frozen=True)
class Truncation:
    """Everything needed to assemble the conditional states for one state/basis pair."""

    cutoff: FockCutoff
    table: SectorTable
    transform: np.ndarray
    truncated: bool


def _initial_dim(state: TwoModeState, basis: MeasurementBasis) -> int:
    cm = standard_form(state)
    energy = max(cm.a, cm.b) + abs(basis.alpha) ** 2 + 0.5 * math.sinh(abs(basis.r)) ** 2 * (2 * cm.b)
    return int(8 + 6 * energy)


def _truncation_for(state: TwoModeState, basis: MeasurementBasis, n_in: int, dim_a: int, rows: int) -> Truncation:
    table = sector_table(state, n_in, dim_a)
    w, truncated = local_transform(basis, rows, table.q_max + 1)
    mass = joint_distribution(table, w)
    err = float(min(max(1.0 - math.fsum(mass.ravel()), 0.0), 1.0))
    return Truncation(FockCutoff(rows, err, n_in, dim_a), table, w, truncated)


def truncate(state: TwoModeState, basis: MeasurementBasis | None = None, eps: float = 1e-3) -> Truncation:
    """Smallest outcome cutoff whose truncated state has ``1 - Tr rho <= eps``.

    The thermal inputs and mode A are cut where their tails fall below
    :func:`inner_tolerance`; the number of outcomes on mode B is then the
    smallest ``dim`` such that the measured mass reaches ``1 - eps``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    basis = MeasurementBasis() if basis is None else basis
    inner = inner_tolerance(eps)
    n_in = thermal_levels(state.n1, state.n2, inner)
    dim_a = max(_initial_dim(state, MeasurementBasis()), 2)
    while True:
        _check_cap(dim_a)
        table = sector_table(state, n_in, dim_a)
        cum = np.cumsum(table.marginal_a())
        reached = np.nonzero(table.kept - cum <= inner)[0]
        if reached.size:
            table = table.restrict(int(reached[0]) + 1)
            break
        if dim_a >= HARD_CAP:
            raise IndexCapError(f"mode-A cutoff for {state} exceeds the hard cap {HARD_CAP}")
        dim_a = min(2 * dim_a, HARD_CAP)
    rows = _initial_dim(state, basis)
    while True:
        _check_cap(rows)
        w, truncated = local_transform(basis, rows, table.q_max + 1)
        cum = np.cumsum(joint_distribution(table, w).sum(axis=0))
        reached = np.nonzero(1.0 - cum <= eps)[0]
        if reached.size:
            dim = int(reached[0]) + 1
            err = float(min(max(1.0 - cum[dim - 1], 0.0), 1.0))
            cutoff = FockCutoff(dim, err, n_in, table.dim_a)
            return Truncation(cutoff, table, w[:dim], truncated)
        if rows >= HARD_CAP:
            raise IndexCapError(f"outcome cutoff for {state} exceeds the hard cap {HARD_CAP}")
        rows = min(2 * rows, HARD_CAP)


def truncation_at(state: TwoModeState, basis: MeasurementBasis, cutoff: FockCutoff) -> Truncation:
    """Rebuild the truncation for an explicitly given cutoff."""
    return _truncation_for(state, basis, cutoff.n_thermal, cutoff.dim_a, cutoff.dim)


def choose_cutoff(state: TwoModeState, basis: MeasurementBasis | None = None, eps: float = 1e-3) -> FockCutoff:
    return truncate(state, basis, eps).cutoff
