"""Symplectic normal form of complex symmetric matrices.

A complex symmetric ``L`` (2n x 2n) with diagonalizable ``J^-1 L`` is brought
to the form ``S^T L S = [[0, Lam], [Lam, 0]]`` by a symplectic transition
matrix ``S`` (``S^T J S = J``), where ``J`` is the standard symplectic form
and ``Lam = diag(lambda_1 .. lambda_n)``.  The generalized eigenvalues occur
in pairs ``+-lambda_i``; which member of a pair lands in ``Lam`` is pure
gauge at this level and is fixed downstream by the trace-preserving gauge.

All routines are pure functions of dense ndarrays; nothing here mutates
shared state.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg as sla

from .errors import (
    BranchCutFailure,
    DimensionMismatch,
    NonSymmetricInput,
    NotDiagonalizable,
    PairingFailure,
    ResidualFailure,
    SingularInput,
    UnsupportedJordanStructure,
)

__all__ = [
    "standard_symplectic_form",
    "generalized_eigs",
    "matrix_sqrt",
    "sympl_normal_form",
    "detect_jordan",
    "GeneralizedEigenSolution",
    "SymplecticNormalForm",
    "JordanReport",
    "CoalescedPair",
]

# defective-pair eigenvector collinearity scales like sqrt(machine eps) at an
# exact exceptional point, so the rank-loss threshold must sit well above 1e-8
_DEFECT_SV_RTOL = 1e-6
_CLUSTER_RTOL = 1e-6
_RANK_ATOL = 1e-6


#: entrywise max-abs, used for every residual in this module
def _maxabs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _as_square_complex(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return a


def _check_symmetric(L: np.ndarray, tol: float = 1e-12) -> None:
    scale = max(_maxabs(L), 1.0)
    r = _maxabs(L - L.T)
    if r > tol * scale:
        raise NonSymmetricInput(
            f"matrix is not symmetric: |L - L^T| = {r:.3e} > {tol:.1e} * scale",
            residual=r,
        )


def standard_symplectic_form(n: int) -> np.ndarray:
    """Return the 2n x 2n matrix ``J = [[0, I_n], [-I_n, 0]]``."""
    if n < 1:
        raise DimensionMismatch(f"n must be >= 1, got {n}")
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


@dataclasses.dataclass(frozen=True)
class GeneralizedEigenSolution:
    """Solution of ``L q = lambda J q`` with the +-lambda pairing resolved.

    Attributes
    ----------
    values : (2n,) complex eigenvalues.
    vectors : (2n, 2n) matrix with eigenvector columns (unit 2-norm).
    pairing : list of n index pairs (i, j) with values[j] ~= -values[i].
    residual : worst relative eigen-residual over all columns.
    """

    values: np.ndarray
    vectors: np.ndarray
    pairing: list
    residual: float


def _match_pairs(values: np.ndarray, tol: float) -> list:
    """Greedy nearest-match of eigenvalues into (i, j) pairs with v_j ~ -v_i.

    Large eigenvalues are matched first so that clustered small values cannot
    steal the partners of well-separated large ones.  Sorting by absolute
    value alone is deliberately avoided: it breaks whenever two distinct
    pairs share the same modulus (mirror spectra of gain/loss models).
    """
    n2 = len(values)
    if n2 % 2:
        raise PairingFailure("odd number of eigenvalues cannot pair")
    unused = set(range(n2))
    pairs = []
    for i in sorted(range(n2), key=lambda k: -abs(values[k])):
        if i not in unused:
            continue
        unused.remove(i)
        best, bestval = None, np.inf
        for j in unused:
            v = abs(values[i] + values[j])
            if v < bestval:
                best, bestval = j, v
        if best is None or bestval > tol:
            raise PairingFailure(
                f"no -lambda partner for eigenvalue {values[i]:.6g} "
                f"(best miss {bestval:.3e} > tol {tol:.1e})",
                value=values[i],
                miss=bestval,
            )
        unused.remove(best)
        pairs.append((i, best))
    return pairs


def generalized_eigs(L, J=None) -> GeneralizedEigenSolution:
    """Solve the pencil ``L q = lambda J q`` for symmetric L.

    Eigenvalues of such pencils come in ``+-lambda`` pairs; the returned
    ``pairing`` is a perfect matching built by nearest-match on
    ``lambda_i ~= -lambda_j``.
    """
    L = _as_square_complex(L, "L")
    n2 = L.shape[0]
    if n2 % 2:
        raise DimensionMismatch("L must have even dimension")
    n = n2 // 2
    if J is None:
        J = standard_symplectic_form(n)
    _check_symmetric(L)
    values, vectors = sla.eig(L, J)
    norms = np.linalg.norm(vectors, axis=0)
    vectors = vectors / norms
    scale = max(_maxabs(L), 1.0)
    res = _maxabs(L @ vectors - J @ vectors * values[None, :]) / scale
    pairs = _match_pairs(values, tol=1e-8 * scale)
    return GeneralizedEigenSolution(values=values, vectors=vectors, pairing=pairs, residual=res)


def matrix_sqrt(T, tol: float = 1e-10) -> np.ndarray:
    """Square root ``B`` of an invertible ``T`` with ``B @ B = T``.

    Uses the Schur-based principal square root.  When eigenvalues of ``T``
    approach the principal branch cut (the negative real axis) the cut is
    rotated into the widest angular gap of the spectrum, so a single-valued
    branch is always evaluated.  ``B`` is a matrix function of ``T`` and
    therefore commutes with it.
    """
    T = _as_square_complex(T, "T")
    ev = np.linalg.eigvals(T)
    amax = np.max(np.abs(ev))
    if amax == 0.0 or np.min(np.abs(ev)) <= 1e-12 * amax:
        raise SingularInput(
            "matrix has an eigenvalue at or near zero; no square root branch",
            min_abs_eigenvalue=float(np.min(np.abs(ev))),
        )
    angles = np.sort(np.angle(ev))  # in (-pi, pi]
    # angular distance of the spectrum to the cut at pi
    dist_to_cut = np.min(np.abs(np.abs(angles) - np.pi))
    phi = 0.0
    if dist_to_cut < 1e-6:
        # widest circular gap between consecutive eigenvalue angles
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
        k = int(np.argmax(gaps))
        if gaps[k] < 2e-6:
            raise BranchCutFailure(
                "spectrum leaves no angular gap for a consistent branch cut",
                widest_gap=float(gaps[k]),
            )
        centre = angles[k] + gaps[k] / 2.0  # place the cut mid-gap
        phi = centre - np.pi
    if phi == 0.0:
        B = sla.sqrtm(T)
    else:
        B = np.exp(0.5j * phi) * sla.sqrtm(np.exp(-1j * phi) * T)
    scale = _maxabs(T)
    r = _maxabs(B @ B - T)
    if r > tol * scale:
        raise ResidualFailure(
            f"square-root residual |B^2 - T| = {r:.3e} exceeds {tol:.1e} * |T|",
            residual=r,
        )
    return B


@dataclasses.dataclass(frozen=True)
class SymplecticNormalForm:
    """Result of :func:`sympl_normal_form`.

    ``S`` is symplectic (``S^T J S = J``) and ``S^T L S`` equals
    ``[[0, Lam], [Lam, Xi]]`` with ``Lam = diag(lambdas)``; ``Xi`` is zero
    unless ``jordan_coupling`` records resonant nilpotent couplings that no
    symplectic transformation can remove.  ``residual_J`` and ``residual_L``
    are entrywise max-abs defects of the two defining relations.
    """

    S: np.ndarray
    lambdas: np.ndarray
    jordan_coupling: list
    residual_J: float
    residual_L: float
    t_branch: int = +1  # sign applied to the transition-matrix candidate


def _normal_form_target(lambdas: np.ndarray, coupling=None) -> np.ndarray:
    n = len(lambdas)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = np.diag(lambdas)
    out[n:, :n] = np.diag(lambdas)
    if coupling:
        for (i, j, nu) in coupling:
            out[n + i, n + j] += nu
            if i != j:
                out[n + j, n + i] += nu
    return out


def _diagonalizability_check(L: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> None:
    """Two-sided defectiveness test: rank loss and eigenvalue clustering."""
    sv = np.linalg.svd(vectors, compute_uv=False)
    if sv[-1] >= _DEFECT_SV_RTOL * sv[0]:
        return
    scale = max(_maxabs(L), 1.0)
    vs = np.sort_complex(values)
    clustered = any(
        abs(vs[i] - vs[j]) <= _CLUSTER_RTOL * scale
        for i in range(len(vs))
        for j in range(i + 1, len(vs))
    )
    if clustered:
        raise NotDiagonalizable(
            "eigenvector matrix is numerically rank deficient at a degenerate "
            "eigenvalue; use detect_jordan",
            sv_ratio=float(sv[-1] / sv[0]),
        )


def sympl_normal_form(L, *, _ordered=None) -> SymplecticNormalForm:
    """Symplectic normal form of a complex symmetric matrix.

    Procedure: generalized eigensolve of ``(L, J)``, +-pairing, column
    ordering with partners n apart, transition matrix ``T = Q J^-1 Q^T J``,
    invariance checks ``T^T L T^-1 = L`` and ``T^T J T^-1 = J``, square root
    ``B`` of ``T``, and finally ``S = B^-1 Q``.

    ``_ordered`` lets callers that already fixed the column order (branch
    tracking, gauge fixing) inject ``(values, vectors)`` with the pair
    members n apart; columns i and n+i must carry eigenvalues -+lambda_i.
    """
    L = _as_square_complex(L, "L")
    n = L.shape[0] // 2
    J = standard_symplectic_form(n)
    scale = max(_maxabs(L), 1.0)

    if _ordered is None:
        sol = generalized_eigs(L, J)
        _diagonalizability_check(L, sol.values, sol.vectors)
        minus = [p[0] for p in sol.pairing]
        plus = [p[1] for p in sol.pairing]
        perm = minus + plus
        d = sol.values[perm]
        Q = sol.vectors[:, perm]
    else:
        d, Q = _ordered
        d = np.asarray(d, dtype=complex)
        Q = np.asarray(Q, dtype=complex)

    lambdas = d[n:]  # columns n+i carry +lambda_i, columns i carry -lambda_i

    Jinv = -J  # J^2 = -I
    T = Q @ Jinv @ Q.T @ J
    branch = +1
    tolT = 1e-8 * scale
    if _maxabs(T.T @ L - L @ T) > tolT or _maxabs(T.T @ J - J @ T) > 1e-8:
        T = -T
        branch = -1
        if _maxabs(T.T @ L - L @ T) > tolT or _maxabs(T.T @ J - J @ T) > 1e-8:
            raise ResidualFailure(
                "transition matrix does not leave L and J invariant; "
                "eigenvector pairing is inconsistent",
                residual_L=_maxabs(T.T @ L - L @ T),
                residual_J=_maxabs(T.T @ J - J @ T),
            )

    B = matrix_sqrt(T)
    S = sla.solve(B, Q)

    rJ = _maxabs(S.T @ J @ S - J)
    if rJ > 1.0:  # wrong sheet: the other sign of T flips S^T J S
        T = -T
        branch = -branch
        B = matrix_sqrt(T)
        S = sla.solve(B, Q)
        rJ = _maxabs(S.T @ J @ S - J)
    rL = _maxabs(S.T @ L @ S - _normal_form_target(lambdas))
    if rJ > 1e-8 or rL > 1e-8 * scale:
        raise ResidualFailure(
            f"normal form residuals too large: |S^T J S - J| = {rJ:.3e}, "
            f"|S^T L S - NF| = {rL:.3e}",
            residual_J=rJ,
            residual_L=rL,
        )
    return SymplecticNormalForm(
        S=S, lambdas=lambdas, jordan_coupling=[], residual_J=rJ, residual_L=rL, t_branch=branch
    )


# ------------------------------------------------------------ Jordan analysis

@dataclasses.dataclass(frozen=True)
class CoalescedPair:
    """One irreducible 2x2 Jordan coupling of the generator.

    ``mu`` is the coalesced (gauge-fixed) eigenvalue; ``nu`` the nilpotent
    coupling strength, or None when no canonical normalization exists for
    the structure at hand.  ``kind`` distinguishes a genuine eigenvalue
    coalescence ("mode", the exceptional-point case) from a resonance
    ``lambda_i + lambda_j = 0`` bridged by the noise block ("cross").
    ``modes`` lists the participating mode indices.
    """

    mu: complex
    nu: complex | None
    kind: str
    modes: tuple


@dataclasses.dataclass(frozen=True)
class JordanReport:
    """Outcome of :func:`detect_jordan`.

    ``classification`` is 'diagonalizable' or 'coalesced-pair';
    ``eigenvalues`` holds the gauge-fixed spectrum for Liouvillian-shaped
    input and the raw pencil spectrum otherwise.
    """

    classification: str
    pairs: list
    eigenvalues: np.ndarray
    sv_ratio: float

    @property
    def mu(self):
        return self.pairs[0].mu if self.pairs else None

    @property
    def nu(self):
        return self.pairs[0].nu if self.pairs else None


def _kernel_dim(M: np.ndarray, atol: float) -> int:
    """Dimension of the numerical kernel at an absolute singular-value cutoff."""
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv < atol))


def _cluster(values: np.ndarray, tol: float) -> list:
    groups: list[list[int]] = []
    for i in sorted(range(len(values)), key=lambda k: (values[k].real, values[k].imag)):
        for g in groups:
            if abs(values[g[0]] - values[i]) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _mode_pair_data(K: np.ndarray, scale: float):
    """(mu, nu, f, e) of a defective 2x2 head block.

    The nilpotent chain is seeded with the bare mode vector e_j that
    ``R = K - mu`` maps hardest (smallest index on ties); nu is read off the
    largest-magnitude component of ``R e_j`` (last such index on ties) and
    ``e = R f / nu``.  The freedom in nu is pure gauge; this seeding is the
    convention under which the detuned-parametric-oscillator family comes
    out as ``mu = -gamma/2``, ``nu = eps/2``.
    """
    ev = np.linalg.eigvals(K)
    mu = complex(ev.mean())
    R = K - mu * np.eye(2)
    norms = np.round([np.linalg.norm(R[:, j]) for j in range(2)], 12)
    f = np.zeros(2, dtype=complex)
    f[int(np.argmax(norms))] = 1.0
    Rf = R @ f
    mags = np.abs(Rf)
    k = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-9))[-1])
    nu = complex(Rf[k])
    e = Rf / nu
    return mu, nu, f, e


def resonant_couplings(K: np.ndarray, N: np.ndarray, scale: float):
    """Nilpotent couplings left behind by resonances ``lambda_i + lambda_j ~ 0``.

    Works in the eigenbasis of the head block K (unit, phase-canonical
    columns): the transformed noise block Ntilde cannot be removed on
    resonant index pairs, and its entries there are the couplings.
    Returns (lambdas, eigenbasis, couplings) with couplings as
    ``(i, j, Ntilde_ij)`` triples.
    """
    lam, S1 = np.linalg.eig(K)
    sv = np.linalg.svd(S1, compute_uv=False)
    if sv[-1] < _DEFECT_SV_RTOL * sv[0]:
        raise NotDiagonalizable("head block is defective; no eigenbasis")
    S1 = S1 / np.linalg.norm(S1, axis=0)
    for k in range(S1.shape[1]):
        j = int(np.argmax(np.abs(S1[:, k])))
        S1[:, k] = S1[:, k] / (S1[j, k] / abs(S1[j, k]))
    Nt = np.linalg.solve(S1, np.linalg.solve(S1, N.T).T)
    Nt = 0.5 * (Nt + Nt.T)
    out = []
    for i in range(len(lam)):
        for j in range(i, len(lam)):
            if abs(lam[i] + lam[j]) <= 1e-8 * scale and abs(Nt[i, j]) > 1e-10 * scale:
                out.append((i, j, complex(Nt[i, j])))
    return lam, S1, out


def _head_jordan_pairs(K: np.ndarray, scale: float):
    """Mode-kind Jordan pairs of the head block; raises beyond 2x2 blocks."""
    nm = K.shape[0]
    ev, vec = np.linalg.eig(K)
    sv = np.linalg.svd(vec, compute_uv=False)
    if sv[-1] >= _DEFECT_SV_RTOL * sv[0]:
        return ev, []
    pairs = []
    for g in _cluster(ev, tol=_CLUSTER_RTOL * scale):
        if len(g) == 1:
            continue
        theta = ev[g].mean()
        M = (K - theta * np.eye(nm)) / scale
        atol = _RANK_ATOL * max(1.0, float(np.linalg.norm(M, 2)))
        k1 = _kernel_dim(M, atol)
        if k1 >= len(g):
            continue
        k2 = _kernel_dim(M @ M, atol)
        k3 = _kernel_dim(M @ M @ M, atol)
        if k3 > k2:
            raise UnsupportedJordanStructure(
                f"Jordan block of size > 2 at eigenvalue {theta:.6g}",
                eigenvalue=theta,
            )
        mu, nu = complex(theta), None
        if nm == 2:
            mu, nu, _, _ = _mode_pair_data(K, scale)
        for _ in range(k2 - k1):  # one entry per size-2 block
            pairs.append(CoalescedPair(mu=mu, nu=nu, kind="mode", modes=tuple(sorted(g))))
    return ev, pairs


def detect_jordan(L, J=None) -> JordanReport:
    """Classify the pencil generator ``A = J^-1 L`` as diagonalizable or defective.

    Defectiveness is declared only when the eigenvector matrix loses rank
    AND eigenvalues cluster; the two-sided test avoids flagging
    near-degenerate but diagonalizable spectra.  Jordan blocks of size
    greater than two in the canonical analysis raise
    :class:`UnsupportedJordanStructure`.

    For Liouvillian-shaped input (vanishing upper-left quadrant) the
    analysis runs on the head block: eigenvalue coalescences there give
    "mode"-kind pairs (with ``(mu, nu)`` for a single bosonic mode), while
    resonances ``lambda_i + lambda_j = 0`` bridged by the noise block give
    "cross"-kind pairs.  Generic symmetric input falls back to a cluster
    and rank analysis of the full pencil.
    """
    L = _as_square_complex(L, "L")
    _check_symmetric(L)
    n = L.shape[0] // 2
    if J is None:
        J = standard_symplectic_form(n)
    scale = max(_maxabs(L), 1.0)
    A = -J @ L  # J^-1 = -J
    values, vectors = np.linalg.eig(A)
    sv = np.linalg.svd(vectors, compute_uv=False)
    sv_ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0

    if _maxabs(L[:n, :n]) <= 1e-10 * scale:
        K, N = L[n:, :n], L[n:, n:]
        lamK, pairs = _head_jordan_pairs(K, scale)
        if not pairs:  # head clean: check noise-bridged resonances
            lamK, _, crossings = resonant_couplings(K, N, scale)
            pairs = [
                CoalescedPair(mu=complex(lamK[i]), nu=nu, kind="cross", modes=(i, j))
                for (i, j, nu) in crossings
            ]
        cls = "coalesced-pair" if pairs else "diagonalizable"
        return JordanReport(classification=cls, pairs=pairs, eigenvalues=lamK, sv_ratio=sv_ratio)

    # generic symmetric input: analyze the full pencil
    pairs = []
    if sv_ratio < _DEFECT_SV_RTOL:
        consumed = []
        defective = []
        for g in _cluster(values, tol=_CLUSTER_RTOL * scale):
            if len(g) == 1:
                continue
            theta = values[g].mean()
            M = (A - theta * np.eye(2 * n)) / scale
            atol = _RANK_ATOL * max(1.0, float(np.linalg.norm(M, 2)))
            k1 = _kernel_dim(M, atol)
            if k1 >= len(g):
                continue
            k2 = _kernel_dim(M @ M, atol)
            k3 = _kernel_dim(M @ M @ M, atol)
            if k3 > k2:
                raise UnsupportedJordanStructure(
                    f"Jordan block of size > 2 at eigenvalue {theta:.6g}",
                    eigenvalue=theta,
                )
            defective.append((complex(theta), k2 - k1, tuple(sorted(g))))
        for idx, (theta, nblocks, g) in enumerate(defective):
            if idx in consumed:
                continue
            consumed.append(idx)
            for jdx in range(idx + 1, len(defective)):
                if jdx not in consumed and abs(defective[jdx][0] + theta) <= 1e-6 * scale:
                    consumed.append(jdx)
                    break
            mu = theta if theta.real <= 0 else -theta  # sign is gauge here
            for _ in range(nblocks):
                pairs.append(CoalescedPair(mu=mu, nu=None, kind="mode", modes=g))
    cls = "coalesced-pair" if pairs else "diagonalizable"
    return JordanReport(classification=cls, pairs=pairs, eigenvalues=values, sv_ratio=sv_ratio)
