"""Non-Gaussian measurements on mode B: conditional states and discords.

Measurements are projective, ``Pi_n = D(alpha) S(r) |n><n| S(r)^+ D(alpha)^+``.
Conditional states of mode A are assembled from the closed-form operator
elements in :mod:`cvdiscord.fock`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .covariance import (
    TwoModeState,
    gaussian_discord,
    gaussian_purity,
    h_entropy,
    mutual_information,
    standard_form,
    symplectic_data,
)
from .fock import (
    FockCutoff,
    FockMatrix,
    MeasurementBasis,
    Truncation,
    inner_tolerance,
    joint_distribution,
    truncate,
    truncation_at,
    unnormalized_conditionals,
)

MIN_PROBABILITY = 1e-14
EIGEN_CLAMP = 1e-8
ENTROPY_FLAG = 1e-3


@dataclass
class ConditionalEnsemble:
    """Outcome probabilities and normalised conditional states of mode A.

    ``states[i]`` is the state for outcome ``indices[i]`` with probability
    ``probabilities[i]``. Outcomes with probability below 1e-14 are dropped;
    ``residual`` is the probability mass not represented, including the
    truncation deficit of the cutoff. ``tail`` is the unnormalised mode-A
    state carried by that missing mass when it is known.
    """

    indices: np.ndarray
    probabilities: np.ndarray
    states: np.ndarray
    residual: float
    cutoff: FockCutoff | None = None
    truncation_dominated: bool = False
    tail: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def outcomes(self) -> list[tuple[int, float, FockMatrix]]:
        return [
            (int(n), float(p), FockMatrix(rho, self.cutoff, hermitian=False))
            for n, p, rho in zip(self.indices, self.probabilities, self.states)
        ]

    def unnormalized(self) -> np.ndarray:
        """``p_n rho_n`` stacked along the first axis."""
        return self.probabilities[:, None, None] * self.states

    def state(self, n: int) -> np.ndarray:
        pos = np.nonzero(self.indices == n)[0]
        if not pos.size:
            raise KeyError(f"outcome {n} not in ensemble")
        return self.states[pos[0]]


@dataclass(frozen=True)
class DiscordResult:
    mutual_information: float
    gaussian_discord: float
    non_gaussian_discord: float
    conditional_entropy: float
    basis: MeasurementBasis
    cutoff: FockCutoff
    entropy_error_bound: float
    truncation_dominated: bool = False


def _ensemble(tr: Truncation, eps: float) -> ConditionalEnsemble:
    unnorm = unnormalized_conditionals(tr.table, tr.transform)
    probs = np.real(np.einsum("kii->k", unnorm))
    keep = probs >= MIN_PROBABILITY
    p = probs[keep]
    residual = float(max(1.0 - math.fsum(p), 0.0))
    tail = np.diag(tr.table.marginal_a()).astype(complex) - unnorm.sum(axis=0)
    return ConditionalEnsemble(
        indices=np.nonzero(keep)[0],
        probabilities=p,
        states=unnorm[keep] / p[:, None, None],
        residual=residual,
        cutoff=tr.cutoff,
        truncation_dominated=bool(tr.truncated or residual > eps),
        tail=tail,
    )


def _truncation(state, basis, cutoff, eps) -> Truncation:
    if cutoff is None:
        return truncate(state, basis, eps)
    return truncation_at(state, basis, cutoff)


def conditional_states(
    state: TwoModeState,
    basis: MeasurementBasis | None = None,
    cutoff: FockCutoff | None = None,
    eps: float = 1e-3,
) -> ConditionalEnsemble:
    """Conditional states of mode A for every outcome ``n < cutoff.dim`` on B.

    ``rho_A,n[h, k] = sum_{s,t} p_s(N1) p_t(N2) O'_{hn}(st) O'^*_{kn}(st)``
    divided by its trace ``p_n``. When ``cutoff`` is omitted the smallest
    cutoff with trace error ``<= eps`` is used.
    """
    basis = MeasurementBasis() if basis is None else basis
    return _ensemble(_truncation(state, basis, cutoff, eps), eps)


def _shannon(p: np.ndarray) -> float:
    return -math.fsum(xlogy(p, p).ravel())


def number_basis_conditional_entropy(state: TwoModeState, cutoff: FockCutoff | None = None, eps: float = 1e-3) -> float:
    """Conditional entropy for photon counting from the joint photon statistics.

    ``S(A|B) = [H(p(A, B)) - H(p(B))] / sum p(A, B)``, using only the
    diagonal of the two-mode density matrix. The division spreads the
    truncated outcome mass in proportion to the retained outcomes, exactly
    as :func:`conditional_entropy` does.
    """
    tr = _truncation(state, MeasurementBasis(), cutoff, eps)
    joint = joint_distribution(tr.table, tr.transform)
    return (_shannon(joint) - _shannon(joint.sum(axis=0))) / math.fsum(joint.ravel())


def von_neumann_entropy(m: FockMatrix | np.ndarray) -> float:
    """Spectral entropy ``-sum xi ln xi`` of a density matrix (nats)."""
    rho = m.entries if isinstance(m, FockMatrix) else np.asarray(m)
    herm_err = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm_err > 1e-10:
        raise ValueError(f"matrix is not hermitian (deviation {herm_err:.3g})")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"density matrix trace {tr} differs from 1")
    xi = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if xi.min() < -EIGEN_CLAMP:
        raise ValueError(f"negative eigenvalue {xi.min():.3g}")
    xi = np.clip(xi, 0.0, 1.0)
    return -math.fsum(xlogy(xi, xi))


def _binary_entropy(x: float) -> float:
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log(x) - (1 - x) * math.log(1 - x)


def _tail_entropy(tail: np.ndarray | None, dim: int) -> float:
    """Entropy of the normalised tail state, or ``ln dim`` when it is unknown."""
    if tail is None:
        return math.log(max(dim, 1))
    xi = np.clip(np.linalg.eigvalsh(0.5 * (tail + tail.conj().T)), 0.0, None)
    total = xi.sum()
    if total <= 0:
        return 0.0
    xi = xi / total
    return -math.fsum(xlogy(xi, xi))


def entropy_error_bound(residual: float, estimate: float, tail_entropy: float, inner: float, dim_a: int) -> float:
    """Bound on ``|S(A|B) - estimate|`` caused by truncation.

    The missing outcomes carry mass ``residual`` and conditional entropies
    between 0 and the entropy of their average state (concavity), which
    brackets the true value in ``[(1-r) est, (1-r) est + r S_tail]``. The
    mode-A truncation at ``inner`` adds at most ``inner ln dim_a + H2(inner)``.
    """
    outcome = residual * max(estimate, tail_entropy - estimate, 0.0)
    return outcome + inner * math.log(max(dim_a, 1)) + _binary_entropy(inner)


def conditional_entropy(ensemble: ConditionalEnsemble) -> float:
    """``sum_n p_n S(rho_A,n) / sum_n p_n``, summed in outcome order."""
    total = math.fsum(ensemble.probabilities)
    return math.fsum(p * von_neumann_entropy(rho) for p, rho in zip(ensemble.probabilities, ensemble.states)) / total


def _gaussian_part(state: TwoModeState):
    cm = standard_form(state)
    sd = symplectic_data(cm)
    base = h_entropy(math.sqrt(sd.I2)) - h_entropy(sd.d_minus) - h_entropy(sd.d_plus)
    return cm, base


def non_gaussian_discord(state: TwoModeState, basis: MeasurementBasis | None = None, eps: float = 1e-3) -> DiscordResult:
    """Discord obtained with the projective measurement ``basis`` on mode B.

    Conditional entropies are averaged over the retained outcomes with
    weights ``p_n / sum p_n``; ``entropy_error_bound`` encloses the effect of
    the outcomes beyond the cutoff. Requires ``eps <= 1e-3``.
    """
    if not 0 < eps <= 1e-3:
        raise ValueError(f"eps must lie in (0, 1e-3], got {eps}")
    basis = MeasurementBasis() if basis is None else basis
    cm, base = _gaussian_part(state)
    tr = truncate(state, basis, eps)
    if basis.is_number:
        joint = joint_distribution(tr.table, tr.transform)
        kept = math.fsum(joint.ravel())
        cond = (_shannon(joint) - _shannon(joint.sum(axis=0))) / kept
        residual = float(max(1.0 - kept, 0.0))
        tail = np.diag(np.clip(tr.table.marginal_a() - joint.sum(axis=1), 0.0, None))
        truncated = tr.truncated
    else:
        ens = _ensemble(tr, eps)
        cond = conditional_entropy(ens)
        residual, tail, truncated = ens.residual, ens.tail, tr.truncated
    bound = entropy_error_bound(residual, cond, _tail_entropy(tail, tr.cutoff.dim_a), inner_tolerance(eps), tr.cutoff.dim_a)
    return DiscordResult(
        mutual_information=mutual_information(cm),
        gaussian_discord=gaussian_discord(cm),
        non_gaussian_discord=base + cond,
        conditional_entropy=cond,
        basis=basis,
        cutoff=tr.cutoff,
        entropy_error_bound=bound,
        truncation_dominated=bool(truncated or bound > ENTROPY_FLAG),
    )


def non_gaussian_geometric_discord(state: TwoModeState, basis: MeasurementBasis | None = None, eps: float = 1e-3) -> float:
    """``Tr[(rho - rho^Pi)^2] = Tr[rho^2] - sum_n Tr[(p_n rho_A,n)^2]``.

    The purity comes from the covariance matrix; the projected term from the
    conditional states of the locally transformed state.
    """
    basis = MeasurementBasis() if basis is None else basis
    tr = truncate(state, basis, eps)
    unnorm = unnormalized_conditionals(tr.table, tr.transform)
    projected = math.fsum(np.sum(np.abs(unnorm) ** 2, axis=(1, 2)))
    return max(gaussian_purity(standard_form(state)) - projected, 0.0)


def _spectrum(rho: np.ndarray) -> np.ndarray:
    return np.sort(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))


def phase_invariance_check(
    state: TwoModeState,
    alpha_abs: float,
    thetas,
    ns,
    eps: float = 1e-6,
) -> float:
    """Largest sup-norm distance between sorted conditional spectra at ``alpha`` and ``alpha e^{i theta}``."""
    ref_basis = MeasurementBasis(alpha_abs, 0.0)
    # both sides share one cutoff and one code path, so theta = 0 gives exactly 0
    cutoff = truncate(state, ref_basis, eps).cutoff
    ref = conditional_states(state, ref_basis, cutoff=cutoff, eps=eps)
    worst = 0.0
    for theta in thetas:
        basis = MeasurementBasis(alpha_abs * complex(math.cos(theta), math.sin(theta)), 0.0)
        other = conditional_states(state, basis, cutoff=cutoff, eps=eps)
        for n in ns:
            d = np.max(np.abs(_spectrum(ref.state(n)) - _spectrum(other.state(n))))
            worst = max(worst, float(d))
    return worst


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = rho - sigma
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def alpha_convergence_check(state: TwoModeState, alphas, ns, eps: float = 1e-4) -> list[float]:
    """For each displacement, the largest trace distance of ``rho_A,n`` to ``rho_A,0``."""
    out = []
    for alpha in alphas:
        ens = conditional_states(state, MeasurementBasis(alpha, 0.0), eps=eps)
        ref = ens.state(0)
        out.append(max(trace_distance(ens.state(n), ref) for n in ns))
    return out
