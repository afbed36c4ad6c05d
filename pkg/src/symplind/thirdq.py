"""Trace-preserving normal form of a Liouvillian and its spectral structure.

:func:`third_quantize` brings the assembled quadratic form to ladder shape
``L_op = sum_i lambda_i v_i u_i (+ nilpotent couplings)`` by fixing the
gauge of the symplectic normal form: for every +-pair the column ending in
2m zeros is moved to the first half, which makes ``S`` block upper
triangular and pins the physical sign of each ``lambda_i``.  The spectrum
of the Liouvillian is then ``sum_i n_i lambda_i`` over occupations ``n_i``.

Degenerate structures are handled on two routes:

* a defective head block for a single bosonic mode (the exceptional point
  of the effective Hamiltonian) yields Jordan data ``(mu, nu)`` and an
  explicitly constructed chain basis;
* resonances ``lambda_i + lambda_j ~ 0`` leave an irreducible coupling from
  the noise block, recorded as ``(i, j, nu)`` triples, with the rest of the
  quadratic form cleaned up by a Lyapunov-type solve in the eigenbasis.
"""

from __future__ import annotations

import dataclasses
import heapq
import math

import numpy as np

from .errors import (
    DimensionMismatch,
    DriveAtCriticalMode,
    GaugeFixFailure,
    InputError,
    JordanFormRequiresGeneralizedTreatment,
    NotDiagonalizable,
    ResidualFailure,
    UnsupportedJordanStructure,
)
from .linalg import (
    CoalescedPair,
    _maxabs,
    _mode_pair_data,
    resonant_couplings,
    sympl_normal_form,
)
from .model import LiouvillianBlocks

__all__ = [
    "ThirdQuantizedForm",
    "StabilityReport",
    "third_quantize",
    "heff_eigencheck",
    "liouvillian_eigenvalue",
    "lowest_eigenvalues",
    "classify_stability",
    "classify_spectrum",
    "jordan_evolution_coefficients",
    "stationary_displacement",
]

_ZERO_TAIL_RTOL = 1e-8
_RESONANCE_RTOL = 1e-8


@dataclasses.dataclass(frozen=True)
class ThirdQuantizedForm:
    """Gauge-fixed normal form of a Liouvillian.

    ``S1``, ``S2``, ``S3`` are the blocks of the (block upper triangular)
    symplectic transition matrix; ``lambdas`` the n = 2m gauge-fixed
    eigenvalues; ``eta_prime = S3^T eta`` the transformed drive.  ``jordan``
    holds the per-pair Jordan data when the generator is defective, by kind:
    "mode" for a genuine eigenvalue coalescence, "cross" for a noise-bridged
    resonance ``lambda_i + lambda_j = 0``.  ``coupling_matrix`` is the
    leftover block Xi in ``S^T L S = [[0, Lam], [Lam, Xi]]`` (zero when no
    cross couplings exist).
    """

    blocks: LiouvillianBlocks
    lambdas: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray
    eta_prime: np.ndarray
    L0: complex
    jordan: list
    coupling_matrix: np.ndarray
    residual_J: float
    residual_L: float
    route: str

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def S(self) -> np.ndarray:
        n = self.n
        out = np.zeros((2 * n, 2 * n), dtype=complex)
        out[:n, :n] = self.S1
        out[:n, n:] = self.S2
        out[n:, n:] = self.S3
        return out

    def has_mode_jordan(self) -> bool:
        return any(p.kind == "mode" for p in self.jordan)


def _pack_form(blocks, lambdas, S, jordan, coupling, rJ, rL, route) -> ThirdQuantizedForm:
    n = len(lambdas)
    scale = max(_maxabs(blocks.L), 1.0)
    if rJ > 1e-8 or rL > 1e-8 * scale:
        raise ResidualFailure(
            f"gauge-fixed form off tolerance on route {route}: "
            f"|S^T J S - J| = {rJ:.3e}, |S^T L S - NF| = {rL:.3e}",
            residual_J=rJ,
            residual_L=rL,
        )
    if _maxabs(S[n:, :n]) > 1e-8 * max(_maxabs(S), 1.0):
        raise GaugeFixFailure("transition matrix is not block upper triangular")
    S1, S2, S3 = S[:n, :n], S[:n, n:], S[n:, n:]
    eta_prime = S3.T @ blocks.eta
    return ThirdQuantizedForm(
        blocks=blocks,
        lambdas=np.asarray(lambdas, dtype=complex),
        S1=S1,
        S2=S2,
        S3=S3,
        eta_prime=eta_prime,
        L0=blocks.L0,
        jordan=list(jordan),
        coupling_matrix=coupling,
        residual_J=rJ,
        residual_L=rL,
        route=route,
    )


# ------------------------------------------------------------- gauge fixing

def _fix_gauge(nf, n: int):
    """Move the zero-tail column of each pair into the first half.

    Exchanging ``s_i -> -s_{i+n}``, ``s_{i+n} -> s_i`` while flipping
    ``lambda_i -> -lambda_i`` leaves both normal-form relations intact, so
    this is a pure gauge move.
    """
    S = nf.S.copy()
    lam = nf.lambdas.copy()
    for i in range(n):
        col, par = S[:, i].copy(), S[:, n + i].copy()
        tail = np.max(np.abs(col[n:]))
        tail_p = np.max(np.abs(par[n:]))
        zt = tail <= _ZERO_TAIL_RTOL * np.max(np.abs(col))
        zt_p = tail_p <= _ZERO_TAIL_RTOL * np.max(np.abs(par))
        if zt and not zt_p:
            continue
        if zt_p and not zt:
            S[:, i], S[:, n + i] = -par, col
            lam[i] = -lam[i]
        elif zt and zt_p:
            raise GaugeFixFailure(
                f"both columns of pair {i} end in zeros; resonant structure "
                "should have been dispatched to the eigenbasis route",
                pair=i,
            )
        else:
            raise GaugeFixFailure(
                f"neither column of pair {i} ends in zeros; trace preservation "
                "is broken upstream",
                pair=i,
                tails=(float(tail), float(tail_p)),
            )
    return S, lam


# ----------------------------------------------- eigenbasis (resonant) route

def _resonant_form(blocks: LiouvillianBlocks, scale: float):
    """Gauge-fixed form built from the head-block eigenbasis.

    With ``S1`` an eigenbasis of ``K`` (the lower-left Liouvillian block),
    ``S3 = S1^-T`` and ``S2 = S1 X``, symplecticity needs ``X = X^T`` and
    the q-q block of ``S^T L S`` becomes ``Lam X + X Lam + Ntilde``.  The
    Lyapunov solve ``X_ij = -Ntilde_ij / (lambda_i + lambda_j)`` removes
    every nonresonant entry; resonant ones stay behind as nilpotent
    couplings ``(i, j, Ntilde_ij)``.
    """
    n = 2 * blocks.m
    lam, S1, coupling = resonant_couplings(blocks.K, blocks.N, scale)
    Ntilde = np.linalg.solve(S1, np.linalg.solve(S1, blocks.N.T).T)
    Ntilde = 0.5 * (Ntilde + Ntilde.T)
    X = np.zeros((n, n), dtype=complex)
    tol = _RESONANCE_RTOL * scale
    for i in range(n):
        for j in range(i, n):
            s = lam[i] + lam[j]
            if abs(s) > tol:
                X[i, j] = X[j, i] = -Ntilde[i, j] / s
    S3 = np.linalg.inv(S1).T
    S2 = S1 @ X
    S = np.block([[S1, S2], [np.zeros((n, n)), S3]])
    Xi = np.zeros((n, n), dtype=complex)
    for (i, j, nu) in coupling:
        Xi[i, j] += nu
        if i != j:
            Xi[j, i] += nu
    target = np.zeros((2 * n, 2 * n), dtype=complex)
    target[:n, n:] = np.diag(lam)
    target[n:, :n] = np.diag(lam)
    target[n:, n:] = Xi
    J = blocks.J
    rJ = _maxabs(S.T @ J @ S - J)
    rL = _maxabs(S.T @ blocks.L @ S - target)
    jordan = [
        CoalescedPair(mu=complex(lam[i]), nu=nu, kind="cross", modes=(i, j))
        for (i, j, nu) in coupling
    ]
    return lam, S, jordan, Xi, rJ, rL


# ----------------------------------------------------- defective-head route

def _jordan_chain_form(blocks: LiouvillianBlocks, scale: float):
    """Explicit symplectic chain basis for one mode at an exceptional point.

    Heads: ``K f = mu f + nu e``, ``K e = mu e`` with the coupling
    normalization of :func:`symplind.linalg._mode_pair_data`.  Tails solve
    the transposed chain; the v-column heads follow from inverting
    ``K + mu`` against the noise block, which requires ``mu != 0``.
    """
    if blocks.m != 1:
        raise UnsupportedJordanStructure(
            "defective effective Hamiltonian with more than one mode; "
            "use detect_jordan for classification",
            modes=blocks.m,
        )
    K, N = blocks.K, blocks.N
    mu, nu, f, e = _mode_pair_data(K, scale)
    if abs(mu) <= 1e-9 * scale:
        raise UnsupportedJordanStructure(
            "exceptional point at eigenvalue zero admits no chain basis here",
            mu=mu,
        )
    I2 = np.eye(2)
    # tails: t3 spans the kernel of (K^T - mu), i.e. bilinear-orthogonal to e
    t3 = np.array([-e[1], e[0]], dtype=complex)
    t3 = t3 / (f @ t3)
    t4p, *_ = np.linalg.lstsq(K.T - mu * I2, nu * t3, rcond=None)
    t4 = t4p - ((f @ t4p) / (f @ t3)) * t3
    c3 = np.linalg.solve(K + mu * I2, -N @ t3)
    c4 = np.linalg.solve(K + mu * I2, -N @ t4 - nu * c3)
    S = np.zeros((4, 4), dtype=complex)
    S[:2, 0], S[:2, 1], S[:2, 2], S[:2, 3] = f, e, c3, c4
    S[2:, 2], S[2:, 3] = t3, t4
    lam = np.array([mu, mu], dtype=complex)
    Lambda = np.array([[mu, 0.0], [nu, mu]], dtype=complex)
    target = np.zeros((4, 4), dtype=complex)
    target[:2, 2:] = Lambda.T
    target[2:, :2] = Lambda
    J = blocks.J
    rJ = _maxabs(S.T @ J @ S - J)
    rL = _maxabs(S.T @ blocks.L @ S - target)
    jordan = [CoalescedPair(mu=complex(mu), nu=complex(nu), kind="mode", modes=(0, 1))]
    return lam, S, jordan, rJ, rL


# -------------------------------------------------------------- main entry

def third_quantize(blocks: LiouvillianBlocks) -> ThirdQuantizedForm:
    """Normal form of a Liouvillian with the trace-preserving gauge fixed.

    Dispatch: the generic (nonresonant, diagonalizable) case runs the full
    symplectic normal form of ``L`` followed by the column-exchange gauge
    fix; resonances ``lambda_i + lambda_j ~ 0`` go through the eigenbasis
    route; a defective head block for a single mode yields the Jordan chain
    construction with ``(mu, nu)`` data.
    """
    n = 2 * blocks.m
    scale = max(_maxabs(blocks.L), 1.0)
    K = blocks.K
    lamK, vecK = np.linalg.eig(K)
    svK = np.linalg.svd(vecK, compute_uv=False)
    head_defective = svK[-1] < 1e-6 * svK[0] and any(
        abs(lamK[i] - lamK[j]) <= 1e-6 * scale
        for i in range(n)
        for j in range(i + 1, n)
    )
    if head_defective:
        lam, S, jordan, rJ, rL = _jordan_chain_form(blocks, scale)
        return _pack_form(blocks, lam, S, jordan, _xi_of(jordan, len(lam)), rJ, rL,
                          route="jordan-chain")

    resonant = any(
        abs(lamK[i] + lamK[j]) <= _RESONANCE_RTOL * scale
        for i in range(n)
        for j in range(i, n)
    )
    if resonant:
        lam, S, jordan, Xi, rJ, rL = _resonant_form(blocks, scale)
        return _pack_form(blocks, lam, S, jordan, Xi, rJ, rL, route="eigenbasis")

    nf = sympl_normal_form(blocks.L)
    S, lam = _fix_gauge(nf, n)
    J = blocks.J
    target = np.zeros((2 * n, 2 * n), dtype=complex)
    target[:n, n:] = np.diag(lam)
    target[n:, :n] = np.diag(lam)
    rJ = _maxabs(S.T @ J @ S - J)
    rL = _maxabs(S.T @ blocks.L @ S - target)
    return _pack_form(blocks, lam, S, [], np.zeros((n, n), dtype=complex), rJ, rL,
                      route="normal-form")


def _xi_of(jordan, n):
    Xi = np.zeros((n, n), dtype=complex)
    for p in jordan:
        if p.kind == "cross":
            i, j = p.modes
            Xi[i, j] += p.nu
            if i != j:
                Xi[j, i] += p.nu
    return Xi


# ----------------------------------------------------------------- queries

def heff_eigencheck(form: ThirdQuantizedForm) -> float:
    """Worst residual of ``Heff s_i = i lambda_i Z s_i`` over the retained heads.

    The relation is homogeneous in each head, so the residual is normalized
    per column; rescaling an eigenvector cannot change it.  Heads belonging
    to a mode-kind Jordan pair are generalized eigenvectors and are skipped.
    """
    He, Z = form.blocks.Heff, form.blocks.Z
    skip = set()
    for p in form.jordan:
        if p.kind == "mode":
            skip.add(p.modes[0])  # the chain seed is not a genuine eigenvector
    worst = 0.0
    scale = max(_maxabs(He), 1.0)
    for i in range(form.n):
        if i in skip:
            continue
        s = form.S1[:, i]
        r = np.max(np.abs(He @ s - 1j * form.lambdas[i] * (Z @ s)))
        worst = max(worst, r / (scale * np.max(np.abs(s))))
    return float(worst)


def liouvillian_eigenvalue(form: ThirdQuantizedForm, occupation) -> complex:
    """Spectrum point ``sum_i n_i lambda_i`` for an occupation multi-index."""
    if form.jordan:
        raise JordanFormRequiresGeneralizedTreatment(
            "generator is defective; occupation sums label generalized "
            "eigenstates only",
            jordan=[(p.kind, p.modes) for p in form.jordan],
        )
    occ = np.asarray(occupation)
    if occ.shape != (form.n,) or not np.issubdtype(occ.dtype, np.integer) or np.any(occ < 0):
        raise DimensionMismatch(
            f"occupation must be {form.n} non-negative integers, got {occupation!r}"
        )
    return complex(np.sum(occ * form.lambdas))


def lowest_eigenvalues(form: ThirdQuantizedForm, count: int, max_total: int = 60) -> list:
    """The ``count`` occupation-sum eigenvalues of smallest ``|Re|``.

    Only valid for stable or critical spectra (all ``Re lambda_i <= 0``),
    where growing occupations move eigenvalues monotonically away from the
    imaginary axis and a best-first search is exhaustive.
    """
    if form.jordan and form.has_mode_jordan():
        raise JordanFormRequiresGeneralizedTreatment(
            "generator is defective at an exceptional point")
    lam = form.lambdas
    if np.any(lam.real > 1e-9):
        raise InputError("lowest_eigenvalues requires a non-growing spectrum")
    start = (0,) * form.n
    heap = [(0.0, 0.0, start)]
    seen = {start}
    out = []
    while heap and len(out) < count:
        _, _, occ = heapq.heappop(heap)
        val = complex(np.sum(np.array(occ) * lam))
        out.append((occ, val))
        if sum(occ) >= max_total:
            continue
        for i in range(form.n):
            nxt = tuple(o + (1 if k == i else 0) for k, o in enumerate(occ))
            if nxt not in seen:
                seen.add(nxt)
                v = complex(np.sum(np.array(nxt) * lam))
                heapq.heappush(heap, (abs(v.real), abs(v.imag), nxt))
    return out


@dataclasses.dataclass(frozen=True)
class StabilityReport:
    """Stability class plus the leading real part and spectral gap."""

    stability: str
    max_real_part: float
    spectral_gap: float | None
    tol: float


def classify_spectrum(lambdas, jordan, scale: float = 1.0) -> StabilityReport:
    """Stability classification shared by the normal-form and fallback paths.

    exponentially-unstable: some ``Re lambda > tol``;
    polynomially-unstable: spectrum confined to ``Re <= tol`` but a nilpotent
    coupling acts on an imaginary-axis mode, so ``exp(L t)`` grows like a
    power of t; critical: imaginary-axis modes without coupling; stable
    otherwise.
    """
    lam = np.asarray(lambdas, dtype=complex)
    tol = 1e-9 * max(scale, 1.0)
    max_re = float(np.max(lam.real))
    if max_re > tol:
        return StabilityReport("exponentially-unstable", max_re, None, tol)
    axis_coupled = any(
        (p.nu is None or abs(p.nu) > tol) and abs(p.mu.real) <= tol for p in jordan
    )
    if axis_coupled:
        return StabilityReport("polynomially-unstable", max_re, None, tol)
    if np.any(np.abs(lam.real) <= tol):
        return StabilityReport("critical", max_re, None, tol)
    gap = float(-np.max(lam.real))
    return StabilityReport("stable", max_re, gap, tol)


def classify_stability(form: ThirdQuantizedForm) -> StabilityReport:
    scale = max(_maxabs(form.blocks.Heff), 1.0)
    return classify_spectrum(form.lambdas, form.jordan, scale)


def stationary_displacement(form: ThirdQuantizedForm) -> np.ndarray:
    """Stationary c-sector first moments ``<b_c> = -S1 Lam^-1 eta'``.

    The first m entries are the stationary ``<a_i>``.  Refuses critical
    driven modes (a zero eigenvalue with a drive component has no stationary
    displacement) and defective generators (the shifted vacuum is not
    defined by this construction there).
    """
    if form.jordan:
        raise DriveAtCriticalMode(
            "shifted vacuum is not defined for a defective or resonantly "
            "coupled generator")
    lam = form.lambdas
    tol = 1e-9 * max(1.0, float(np.max(np.abs(lam))))
    small = np.abs(lam) <= tol
    if np.any(small & (np.abs(form.eta_prime) > tol)):
        raise DriveAtCriticalMode(
            "drive couples to a critical mode; no stationary state exists",
            modes=list(np.flatnonzero(small)),
        )
    shift = np.where(small, 0.0, form.eta_prime / np.where(small, 1.0, lam))
    return -form.S1 @ shift


# ------------------------------------------------------ Jordan time evolution

def jordan_evolution_coefficients(mu: complex, nu: complex, t: float, n1: int, n2: int):
    """Expansion of ``exp(L t)|n1, n2>`` for ``L = mu (v1u1 + v2u2) + nu v2u1``.

    Returns ``[(m, coeff)]`` where the image state is ``|n1-m, n2+m>`` and::

        coeff = sqrt(C(n1, m) C(n2+m, m)) (nu t)^m exp(mu (n1+n2) t)

    Binomials go through log-gamma once ``n1+n2`` exceeds 60 to avoid
    overflow; the two evaluations agree to rounding on the crossover.
    """
    if t < 0 or not np.isfinite(t):
        raise InputError("t must be finite and non-negative")
    if n1 < 0 or n2 < 0:
        raise InputError("occupations must be non-negative")
    mu, nu = complex(mu), complex(nu)
    base = np.exp(mu * (n1 + n2) * t)
    out = []
    z = nu * t
    for k in range(n1 + 1):
        if k == 0:
            out.append((0, complex(base)))
            continue
        if z == 0:
            out.append((k, 0.0 + 0.0j))
            continue
        if n1 + n2 > 60:
            logc = 0.5 * (
                math.lgamma(n1 + 1) - math.lgamma(k + 1) - math.lgamma(n1 - k + 1)
                + math.lgamma(n2 + k + 1) - math.lgamma(k + 1) - math.lgamma(n2 + 1)
            )
            val = np.exp(logc + k * np.log(z) + mu * (n1 + n2) * t)
        else:
            c = math.comb(n1, k) * math.comb(n2 + k, k)
            val = math.sqrt(c) * z**k * base
        out.append((k, complex(val)))
    return out
