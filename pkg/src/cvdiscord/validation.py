"""Validation suites run by ``cvdiscord validate``.

Each suite reduces a family of checks to its worst discrepancy and compares
it with a fixed tolerance. The oracle-based suites rebuild every quantity
from exponentiated generators; the remaining suites check invariants of the
closed forms directly.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import fock, oracle
from .covariance import (
    TwoModeState,
    gaussian_discord,
    gaussian_geometric_discord,
    gaussian_purity,
    heterodyne_conditional_cm,
    is_separable,
    optimal_geometric_measurement,
    standard_form,
)
from .fock import MeasurementBasis
from .measurement import (
    alpha_convergence_check,
    conditional_entropy,
    conditional_states,
    non_gaussian_discord,
    non_gaussian_geometric_discord,
    number_basis_conditional_entropy,
    phase_invariance_check,
)

LEVELS = ("fast", "full")
ORACLE_DIM = 60
LAMBDAS = (0.1, 0.2, 0.3, 0.4, 0.5)
PHIS = tuple(k * math.pi / 20 for k in range(1, 10))


@dataclass(frozen=True)
class SuiteResult:
    name: str
    worst: float
    tolerance: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.worst) and self.worst <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst {self.worst:.3e} (tolerance {self.tolerance:.1e}, {self.seconds:.1f}s)"


@lru_cache(maxsize=4)
def oracle_density(state: TwoModeState, dim: int = ORACLE_DIM) -> fock.FockMatrix:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return oracle.build_density_matrix(state, dim)


def diagonality_grid() -> list[TwoModeState]:
    grid = [TwoModeState.sts(n, n, lam) for n in (1e-5, 0.01, 0.1, 1.0) for lam in LAMBDAS]
    grid += [TwoModeState.mts(n1, q * n1, phi) for n1 in (1e-5, 0.01, 0.1, 1.0) for q in (0.0, 0.1, 0.4, 0.5) for phi in PHIS[::2]]
    return grid


def gaussian_grid() -> list[TwoModeState]:
    grid = [TwoModeState.sts(n, n, lam) for n in (1e-5, 0.01, 0.1, 1.0, 2.0) for lam in (0.0,) + LAMBDAS + (0.6,)]
    grid += [TwoModeState.sts(n, 2 * n, lam) for n in (0.1, 1.0) for lam in LAMBDAS]
    grid += [TwoModeState.mts(n1, q * n1, phi) for n1 in (0.1, 1.0) for q in (0.0, 0.1, 0.4, 0.5) for phi in PHIS]
    return grid


# individual suites; each returns the worst discrepancy


def kernel_discrepancy(level: str = "fast") -> float:
    """Closed-form operator elements against exponentiated generators."""
    half = 8 if level == "fast" else 12
    # outputs reach q = 2 * half - 1; the oracle keeps twice that
    dim2 = 4 * half
    worst = 0.0
    for kind, value, scalar, table in (
        ("two_mode_squeeze", 0.5, fock.two_mode_squeezer_element, fock.squeezer_table),
        ("two_mode_mix", 0.7, fock.two_mode_mixer_element, fock.mixer_table),
    ):
        u = oracle.operator_matrix(oracle.GeneratorSpec(kind, value, dim2)).entries.reshape(dim2, dim2, dim2, dim2)
        values, q = table(value, half, half)
        for s in range(half):
            for t in range(half):
                for h in range(half):
                    qq = int(q[s, t, h])
                    ref = u[h, qq, s, t] if 0 <= qq < dim2 else 0.0
                    worst = max(worst, abs(values[s, t, h] - ref))
                    n = h - s + t if kind == "two_mode_squeeze" else s + t - h
                    if 0 <= n < half and (s + t + h) % 3 == 0:
                        worst = max(worst, abs(scalar(h, n, s, t, value) - u[h, n, s, t]))
    inner = 30
    sq = oracle.operator_matrix(oracle.GeneratorSpec("single_squeeze", 0.5, 160)).entries
    worst = max(worst, float(np.max(np.abs(fock.single_mode_squeezer_matrix(0.5, inner, inner) - sq[:inner, :inner]))))
    dp = oracle.operator_matrix(oracle.GeneratorSpec("displace", 2.5, 160)).entries
    worst = max(worst, float(np.max(np.abs(fock.displacement_matrix(2.5, inner, inner) - dp[:inner, :inner]))))
    for k, qq in ((0, 0), (4, 2), (11, 7)):
        worst = max(worst, abs(fock.single_mode_squeezer_element(k, qq, 0.5) - sq[k, qq]))
        worst = max(worst, abs(fock.displacement_element(k, qq, 2.5) - dp[k, qq]))
    return worst


def moment_discrepancy(states: tuple[TwoModeState, ...]) -> float:
    """Closed-form covariance matrices against second moments of the oracle state."""
    worst = 0.0
    for st in states:
        sigma = oracle.second_moments(oracle_density(st))
        worst = max(worst, float(np.max(np.abs(sigma - standard_form(st).matrix()))))
    return worst


def ensemble_discrepancy(cases) -> float:
    """Closed-form conditional states against the explicit projector sandwich."""
    worst = 0.0
    for st, basis in cases:
        ens = conditional_states(st, basis, eps=1e-8)
        rho = oracle_density(st)
        keep = min(ens.cutoff.dim, ORACLE_DIM // 2)
        ref = oracle.measure_and_reduce(rho, basis, outcomes=keep)
        m = min(ens.cutoff.dim_a, ORACLE_DIM // 2)
        ours = np.zeros((keep, m, m), dtype=complex)
        theirs = np.zeros_like(ours)
        sel = ens.indices < keep
        ours[ens.indices[sel]] = ens.unnormalized()[sel][:, :m, :m]
        theirs[ref.indices] = ref.unnormalized()[:, :m, :m]
        worst = max(worst, float(np.max(np.abs(ours - theirs))))
    return worst


def max_off_diagonal(states) -> float:
    worst = 0.0
    for st in states:
        ens = conditional_states(st, MeasurementBasis(), eps=1e-3)
        off = ens.states - np.einsum("nii->ni", ens.states)[:, :, None] * np.eye(ens.states.shape[1])
        worst = max(worst, float(np.max(np.abs(off))))
    return worst


def phase_discrepancy() -> float:
    st = TwoModeState.sts(1.0, 1.0, 0.5)
    thetas = (math.pi / 4, math.pi / 2, math.pi)
    return max(
        phase_invariance_check(st, 1.0, thetas, range(4)),
        phase_invariance_check(st, 2.0, (math.pi,), range(4)),
        phase_invariance_check(TwoModeState.mts(1.0, 0.0, math.pi / 4), 1.0, thetas, range(4)),
    )


def gaussian_numeric_discrepancy(states) -> float:
    worst = 0.0
    for st in states:
        cm = standard_form(st)
        worst = max(worst, abs(gaussian_discord(cm) - gaussian_discord(cm, method="numeric")))
    return worst


def separable_excess(states) -> float:
    """Largest ``D^G - 1`` over PPT-separable states (should be <= 0)."""
    values = [gaussian_discord(standard_form(st)) - 1.0 for st in states if is_separable(standard_form(st))]
    return max(values, default=-1.0)


def purity_discrepancy(states) -> float:
    return max(abs(oracle.purity(oracle_density(st)) - gaussian_purity(standard_form(st))) for st in states)


def geometric_gaussian_discrepancy(states) -> float:
    """Closed-form Gaussian geometric discord against an explicit Hilbert-Schmidt distance."""
    worst = 0.0
    for st in states:
        cm = standard_form(st)
        m = optimal_geometric_measurement(cm)
        sigma_p = heterodyne_conditional_cm(cm, m)
        brute = oracle.gaussian_geometric_brute(oracle_density(st), float(sigma_p[0, 0]), m.mx)
        worst = max(worst, abs(brute - gaussian_geometric_discord(cm)))
    return worst


def geometric_ng_discrepancy(cases) -> float:
    worst = 0.0
    for st, basis in cases:
        brute = oracle.brute_quantities(oracle_density(st), basis).geometric_discord
        worst = max(worst, abs(brute - non_gaussian_geometric_discord(st, basis, eps=1e-9)))
    return worst


def shortcut_discrepancy(states) -> float:
    worst = 0.0
    for st in states:
        generic = conditional_entropy(conditional_states(st, MeasurementBasis(), eps=1e-6))
        worst = max(worst, abs(number_basis_conditional_entropy(st, eps=1e-6) - generic))
    return worst


def ordering_violation(states, bases=(MeasurementBasis(),), eps: float = 1e-3) -> float:
    """Largest ``D^G - D^NG`` (positive values violate the ordering)."""
    worst = -math.inf
    for st in states:
        for basis in bases:
            r = non_gaussian_discord(st, basis, eps)
            worst = max(worst, r.gaussian_discord - r.non_gaussian_discord)
    return worst


def fig9_state() -> TwoModeState:
    return TwoModeState.sts(0.5, 0.5, 0.5)


def convergence_distance() -> float:
    """Trace distance of the ``n = 1, 2`` conditional states to ``n = 0`` at ``alpha = 5``."""
    return alpha_convergence_check(fig9_state(), [5.0], [1, 2], eps=1e-4)[0]


def convergence_gap() -> float:
    r = non_gaussian_discord(fig9_state(), MeasurementBasis(5.0, 0.0), eps=1e-4)
    return r.non_gaussian_discord - r.gaussian_discord


def _suites(level: str) -> list[tuple[str, float, Callable[[], float]]]:
    sts = TwoModeState.sts(1.0, 1.0, 0.5)
    mts = TwoModeState.mts(1.0, 0.0, math.pi / 4)
    ens_cases = [(sts, MeasurementBasis()), (sts, MeasurementBasis(1.0, 0.0)), (mts, MeasurementBasis(1.0, 0.0))]
    geo_cases = [(sts, MeasurementBasis())]
    ordering_grid = [TwoModeState.sts(n, n, lam) for n in (0.01, 1.0) for lam in (0.0,) + LAMBDAS]
    ordering_grid += [TwoModeState.mts(n1, q * n1, phi) for n1 in (0.1, 1.0) for q in (0.0, 0.5) for phi in PHIS[::2]]
    ggrid = gaussian_grid()
    numeric_grid = ggrid if level == "full" else ggrid[::4]
    if level == "full":
        ens_cases += [(sts, MeasurementBasis(0.0, 0.3)), (mts, MeasurementBasis(0.7, 0.2))]
        geo_cases += [(mts, MeasurementBasis())]
    suites = [
        ("operator kernels vs exponentiated generators", 1e-8, lambda: kernel_discrepancy(level)),
        ("covariance matrix vs oracle second moments", 1e-6, lambda: moment_discrepancy((sts, mts))),
        ("conditional states vs oracle sandwich", 1e-7, lambda: ensemble_discrepancy(ens_cases)),
        ("number-basis diagonality", 1e-10, lambda: max_off_diagonal(diagonality_grid())),
        ("number-basis entropy shortcut", 1e-10, lambda: shortcut_discrepancy((sts, mts, TwoModeState.sts(0.01, 0.01, 0.3)))),
        ("phase invariance of conditional spectra", 1e-9, phase_discrepancy),
        ("Gaussian discord closed form vs minimisation", 1e-6, lambda: gaussian_numeric_discrepancy(numeric_grid)),
        ("Gaussian discord <= 1 on separable states", 1e-9, lambda: separable_excess(ggrid)),
        ("purity vs oracle", 1e-5, lambda: purity_discrepancy((sts, mts))),
        ("Gaussian geometric discord vs oracle", 1e-4, lambda: geometric_gaussian_discrepancy((sts, mts))),
        ("non-Gaussian geometric discord vs oracle", 1e-6, lambda: geometric_ng_discrepancy(geo_cases)),
        ("D^NG >= D^G - 1e-6 (number basis)", 1e-6, lambda: ordering_violation(ordering_grid)),
    ]
    if level == "full":
        suites += [
            ("alpha = 5 conditional-state convergence", 1e-2, convergence_distance),
            ("alpha = 5 gap to the Gaussian discord", 5e-2, convergence_gap),
        ]
    return suites


def run(level: str = "fast", report: Callable[[str], None] | None = None) -> list[SuiteResult]:
    """Run every suite of ``level``; ``report`` receives one line per suite as it finishes."""
    if level not in LEVELS:
        raise ValueError(f"unknown validation level {level!r}")
    results = []
    for name, tol, fn in _suites(level):
        start = time.perf_counter()
        try:
            worst = float(fn())
        except Exception as exc:  # a crashing suite counts as a failure
            worst = math.nan
            name = f"{name} (error: {exc})"
        res = SuiteResult(name, worst, tol, time.perf_counter() - start)
        results.append(res)
        if report is not None:
            report(res.line())
    return results
