"""Brute-force reference computations.

Everything here is built from truncated ladder operators and dense matrix
exponentials; none of the closed forms of :mod:`cvdiscord.fock` are used.
Slow by design and meant for validation only. Two-mode matrices are indexed
``h * dim + n`` with ``h`` the mode-A occupation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .covariance import STS, TwoModeState
from .fock import FockCutoff, FockMatrix, MeasurementBasis
from .measurement import ConditionalEnsemble

LEAKAGE_THRESHOLD = 1e-10

KINDS = ("two_mode_squeeze", "two_mode_mix", "single_squeeze", "displace")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    value: complex
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def generator(spec: GeneratorSpec) -> np.ndarray:
    """Anti-hermitian generator ``G`` with ``operator = exp(G)``."""
    a = annihilation(spec.dim).astype(complex)
    ad = a.conj().T
    v = spec.value
    if spec.kind == "single_squeeze":
        return 0.5 * (np.conj(v) * a @ a - v * ad @ ad)
    if spec.kind == "displace":
        return v * ad - np.conj(v) * a
    eye = np.eye(spec.dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    ad1, ad2 = a1.conj().T, a2.conj().T
    if spec.kind == "two_mode_squeeze":
        return v.real * (ad1 @ ad2 - a1 @ a2)
    return v.real * (ad1 @ a2 - a1 @ ad2)


def _inner_columns(spec: GeneratorSpec) -> np.ndarray:
    half = max(spec.dim // 2, 1)
    if spec.kind in ("single_squeeze", "displace"):
        return np.arange(half)
    h, n = np.divmod(np.arange(spec.dim**2), spec.dim)
    return np.nonzero((h < half) & (n < half))[0]


def unitarity_deficit(spec: GeneratorSpec, u: np.ndarray) -> float:
    """Largest deviation from unit norm over the inner-half columns of ``u``.

    The exact exponential of a truncated anti-hermitian generator is
    unitary, so this detects failures of the numerical exponential rather
    than truncation error. Truncation is controlled by keeping at least twice
    the compared levels; the kernel suites measure its effect directly.
    """
    norms = np.sum(np.abs(u[:, _inner_columns(spec)]) ** 2, axis=0)
    return float(np.max(np.abs(norms - 1.0), initial=0.0))


def operator_matrix(spec: GeneratorSpec) -> FockMatrix:
    """Matrix exponential (scaling and squaring) of the truncated generator."""
    u = expm(generator(spec))
    deficit = unitarity_deficit(spec, u)
    if deficit > LEAKAGE_THRESHOLD:
        warnings.warn(f"{spec.kind} truncated at {spec.dim}: unitarity deficit {deficit:.2e} on inner block", stacklevel=2)
    return FockMatrix(u, None, hermitian=False)


def two_mode_operator(state: TwoModeState, dim: int) -> np.ndarray:
    kind = "two_mode_squeeze" if state.family == STS else "two_mode_mix"
    return operator_matrix(GeneratorSpec(kind, state.strength, dim)).entries


def sparse_two_mode_generator(state: TwoModeState, dim: int) -> sp.csr_matrix:
    """Real sparse generator of the STS squeezer or MTS mixer on ``dim^2`` levels."""
    a = sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, format="csr")
    eye = sp.identity(dim, format="csr")
    a1, a2 = sp.kron(a, eye, format="csr"), sp.kron(eye, a, format="csr")
    if state.family == STS:
        g = a1.T @ a2.T - a1 @ a2
    else:
        g = a1.T @ a2 - a1 @ a2.T
    return (state.strength * g).tocsr()


def two_mode_columns(state: TwoModeState, dim: int, inputs: int) -> np.ndarray:
    """Columns ``O|s t>`` for ``s, t < inputs`` as a ``(dim^2, inputs^2)`` array.

    Uses the truncated-Taylor action of the matrix exponential on the sparse
    generator, which avoids forming the dense ``dim^2 x dim^2`` exponential.
    """
    cols = (np.arange(inputs)[:, None] * dim + np.arange(inputs)[None, :]).ravel()
    start = np.zeros((dim * dim, cols.size))
    start[cols, np.arange(cols.size)] = 1.0
    return expm_multiply(sparse_two_mode_generator(state, dim), start)


def local_unitary(basis: MeasurementBasis, dim: int) -> np.ndarray:
    """``V = D(alpha) S(r)`` on one mode."""
    d = operator_matrix(GeneratorSpec("displace", basis.alpha, dim)).entries
    s = operator_matrix(GeneratorSpec("single_squeeze", basis.r, dim)).entries
    return d @ s


def thermal_matrix(N: float, dim: int) -> np.ndarray:
    """Thermal state ``sum_k N^k/(1+N)^(k+1) |k><k|`` truncated to ``dim`` levels."""
    k = np.arange(dim)
    if N == 0:
        return np.diag((k == 0).astype(float))
    return np.diag((N / (1 + N)) ** k / (1 + N))


def build_density_matrix(state: TwoModeState, dim: int, eps: float = 1e-3) -> FockMatrix:
    """``rho = O (nu(N1) (x) nu(N2)) O^+`` as a dense ``dim^2`` matrix.

    Thermal inputs are kept up to ``dim // 2`` photons per mode so the
    transformed columns stay clear of the truncation edge.
    """
    inputs = max(dim // 2, 1)
    cols = two_mode_columns(state, dim, inputs)
    w = np.sqrt(np.outer(np.diag(thermal_matrix(state.n1, inputs)), np.diag(thermal_matrix(state.n2, inputs))).ravel())
    amp = cols * w[None, :]
    rho = (amp @ amp.T).astype(complex)
    err = float(max(1.0 - np.real(np.trace(rho)), 0.0))
    if err > eps:
        warnings.warn(f"oracle density matrix trace deficit {err:.2e} exceeds {eps:.1e}", stacklevel=2)
    return FockMatrix(rho, FockCutoff(dim, min(err, 1.0), inputs), hermitian=True)


def partial_trace(rho: np.ndarray, dim: int, keep: str) -> np.ndarray:
    r4 = rho.reshape(dim, dim, dim, dim)
    if keep == "A":
        return np.einsum("anbn->ab", r4)
    return np.einsum("hahb->ab", r4)


def _projectors(basis: MeasurementBasis, dim: int) -> np.ndarray:
    v = local_unitary(basis, dim)
    return np.einsum("an,bn->nab", v, v.conj())


def measure_and_reduce(rho: FockMatrix, basis: MeasurementBasis, outcomes: int | None = None) -> ConditionalEnsemble:
    """Sandwich ``rho`` with every ``1 (x) Pi_n`` and trace out mode B."""
    dim = int(round(math.sqrt(rho.dim)))
    outcomes = dim if outcomes is None else outcomes
    r4 = rho.entries.reshape(dim, dim, dim, dim)
    projectors = _projectors(basis, dim)
    unnorm = np.empty((outcomes, dim, dim), dtype=complex)
    for n in range(outcomes):
        p = projectors[n]
        # Tr_B[(1 x P) rho (1 x P)]
        unnorm[n] = np.einsum("ab,hbkc,ca->hk", p, r4, p, optimize=True)
    probs = np.real(np.einsum("nii->n", unnorm))
    keep = probs >= 1e-14
    return ConditionalEnsemble(
        indices=np.nonzero(keep)[0],
        probabilities=probs[keep],
        states=unnorm[keep] / probs[keep][:, None, None],
        residual=float(max(1.0 - probs.sum(), 0.0)),
        cutoff=rho.cutoff,
    )


def spectral_entropy(rho: np.ndarray) -> float:
    xi = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    xi = xi[xi > 0]
    return float(-np.sum(xi * np.log(xi)))


@dataclass(frozen=True)
class BruteQuantities:
    mutual_information: float
    conditional_entropy: float
    discord: float
    geometric_discord: float


def brute_quantities(rho: FockMatrix, basis: MeasurementBasis) -> BruteQuantities:
    """Entropic and geometric quantities for one measurement basis, no minimisation."""
    dim = int(round(math.sqrt(rho.dim)))
    m = rho.entries / np.real(np.trace(rho.entries))
    s_ab = spectral_entropy(m)
    s_a = spectral_entropy(partial_trace(m, dim, "A"))
    s_b = spectral_entropy(partial_trace(m, dim, "B"))
    ens = measure_and_reduce(FockMatrix(m, rho.cutoff), basis)
    cond = float(sum(p * spectral_entropy(r) for p, r in zip(ens.probabilities, ens.states)))
    projectors = _projectors(basis, dim)[ens.indices]
    # rho^Pi = sum_n (p_n rho_A,n) (x) Pi_n, assembled as a (h, b, k, c) tensor
    post = np.einsum("nhk,nbc->hbkc", ens.unnormalized(), projectors).reshape(dim * dim, dim * dim)
    diff = m - post
    geometric = float(np.real(np.vdot(diff, diff)))
    return BruteQuantities(
        mutual_information=s_a + s_b - s_ab,
        conditional_entropy=cond,
        discord=s_b - s_ab + cond,
        geometric_discord=geometric,
    )


def quadratures(dim: int) -> list[sp.csr_matrix]:
    """Sparse ``x1, p1, x2, p2`` on ``dim^2`` levels (vacuum variance 1/2)."""
    a = sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, format="csr")
    eye = sp.identity(dim, format="csr")
    x = (a + a.T) / math.sqrt(2)
    p = (a - a.T) / (1j * math.sqrt(2))
    return [sp.kron(x, eye, format="csr"), sp.kron(p, eye, format="csr"), sp.kron(eye, x, format="csr"), sp.kron(eye, p, format="csr")]


def _expect(m: np.ndarray, op: sp.csr_matrix) -> float:
    # Tr[m op] = sum_ij m_ji op_ij
    coo = op.tocoo()
    return float(np.real(np.sum(m[coo.col, coo.row] * coo.data)))


def second_moments(rho: FockMatrix) -> np.ndarray:
    """Covariance matrix (vacuum 1/2) from a truncated two-mode density matrix."""
    dim = int(round(math.sqrt(rho.dim)))
    m = rho.entries / np.real(np.trace(rho.entries))
    ops = quadratures(dim)
    means = [_expect(m, op) for op in ops]
    sigma = np.empty((4, 4))
    for i, oi in enumerate(ops):
        for j, oj in enumerate(ops):
            sym = 0.5 * _expect(m, (oi @ oj + oj @ oi).tocsr())
            sigma[i, j] = sym - means[i] * means[j]
    return sigma


def symplectic_spectrum(sigma: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues (ascending) as moduli of the spectrum of ``i Omega sigma``."""
    n = sigma.shape[0] // 2
    omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    ev = np.abs(np.linalg.eigvals(1j * omega @ sigma))
    return np.sort(ev)[::2]


def partial_transpose_cm(sigma: np.ndarray) -> np.ndarray:
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ sigma @ flip


def gaussian_geometric_brute(rho: FockMatrix, conditional_variance: float, measurement_variance: float) -> float:
    """``||rho - rho_P (x) rho_M||_2^2`` for isotropic (thermal) ``rho_P``, ``rho_M``."""
    dim = int(round(math.sqrt(rho.dim)))
    prod = np.kron(thermal_matrix(conditional_variance - 0.5, dim), thermal_matrix(measurement_variance - 0.5, dim))
    diff = rho.entries - prod
    return float(np.real(np.vdot(diff, diff)))


def purity(rho: FockMatrix) -> float:
    return float(np.real(np.vdot(rho.entries, rho.entries)))
