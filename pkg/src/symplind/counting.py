"""Counting fields: tilted Liouvillians, branch tracking, cumulants.

A quadratic observable added as a source term, ``L_op(s) = L_op + s O``,
breaks trace preservation: the tilted quadratic form acquires an upper-left
(c-c) block and the zero-tail gauge is gone.  The eigenvalue branches
``lambda_i(s)`` are therefore selected by analytic continuation from the
gauge-fixed ``s = 0`` set, matching eigenvectors step by step along the
path with adaptive step halving.

The long-time factorial cumulant generating function is assembled per grid
point as::

    G(s) = (1/2) sum_i [lambda_i(s) - lambda_i(0)] + s c_obs
           - sum_i pu_i(s) pv_i(s) / lambda_i(s)

where ``c_obs`` is the observable's operator-ordering constant and
``(pu, pv)`` are the linear (drive) coefficients rotated into the tilted
ladder basis.  Both correction terms vanish at ``s = 0`` and for undriven
models; they are pinned against the brute-force oracle by tests.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg as sla
import scipy.optimize

from .errors import (
    BranchCollision,
    DimensionMismatch,
    DriveAtCriticalMode,
    IndexOutOfRange,
    InsufficientGrid,
    NonDiagonalizableOnPath,
    OffGrid,
    ResidualFailure,
)
from .linalg import _maxabs, standard_symplectic_form, sympl_normal_form
from .model import LiouvillianBlocks
from .thirdq import third_quantize

__all__ = [
    "QuadraticObservable",
    "TiltedBranchSet",
    "photon_current_observable",
    "tilt",
    "track_branches",
    "generating_function",
    "factorial_cumulants",
    "ordinary_cumulants",
]

_MIN_OVERLAP = 0.7
_MAX_REFINE = 10


@dataclasses.dataclass(frozen=True)
class QuadraticObservable:
    """Observable at most quadratic in the mode operators, in the frozen b basis.

    ``quad`` is the symmetrized 4m x 4m coefficient matrix, ``lin`` the
    linear coefficients against b, and ``constant`` the operator-ordering
    constant collected while symmetrizing.  ``source`` records how the
    observable was built so independent backends (the Fock oracle) can
    realize it without sharing this matrix representation.
    """

    quad: np.ndarray
    lin: np.ndarray
    constant: complex
    source: tuple | None = None

    def __post_init__(self):
        q = np.asarray(self.quad, dtype=complex)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] % 4:
            raise DimensionMismatch(f"quad must be 4m x 4m, got {q.shape}")
        if _maxabs(q - q.T) > 1e-12 * max(_maxabs(q), 1.0):
            raise DimensionMismatch("quad must be symmetric")
        object.__setattr__(self, "quad", 0.5 * (q + q.T))
        object.__setattr__(self, "lin", np.asarray(self.lin, dtype=complex).reshape(-1))
        object.__setattr__(self, "constant", complex(self.constant))
        if self.lin.shape[0] != q.shape[0]:
            raise DimensionMismatch("lin must have the same length as quad's side")


def photon_current_observable(blocks: LiouvillianBlocks, mode: int, gamma: float) -> QuadraticObservable:
    """Photon current of one mode: emission superoperator ``gamma a_+ a_-^dag``.

    Expanding with ``a_+ = a_c + a_q/2`` and ``a_-^dag = a_c^dag - a_q^dag/2``
    and symmetrizing in the b ordering gives a c-c entry ``gamma`` (the
    trace-breaking block), c-q cross entries ``-gamma/2`` and a q-q entry
    ``gamma/4``; the ordering constants of the two cross terms cancel, so
    ``constant = 0``.
    """
    m = blocks.m
    if not (0 <= mode < m):
        raise IndexOutOfRange(f"mode {mode} out of range for m={m}")
    q = np.zeros((4 * m, 4 * m), dtype=complex)
    i_ac, i_acd, i_aqd, i_maq = mode, m + mode, 2 * m + mode, 3 * m + mode
    q[i_ac, i_acd] = q[i_acd, i_ac] = gamma
    q[i_ac, i_aqd] = q[i_aqd, i_ac] = -gamma / 2.0
    q[i_acd, i_maq] = q[i_maq, i_acd] = -gamma / 2.0
    q[i_aqd, i_maq] = q[i_maq, i_aqd] = gamma / 4.0
    return QuadraticObservable(
        quad=q,
        lin=np.zeros(4 * m, dtype=complex),
        constant=0.0,
        source=("photon-current", mode, float(gamma)),
    )


def tilt(blocks: LiouvillianBlocks, obs: QuadraticObservable, s: complex) -> LiouvillianBlocks:
    """Tilted blocks ``L(s) = L + s quad`` with linear part and constant shifted.

    The zero upper-left block invariant holds only at ``s = 0``; tilted
    copies carry ``tilt_s`` so downstream validation knows it is waived.
    """
    n = 2 * blocks.m
    if obs.quad.shape[0] != 2 * n:
        raise DimensionMismatch(
            f"observable is {obs.quad.shape[0] // 4}-mode, blocks are {blocks.m}-mode"
        )
    s = complex(s)
    lin_full = blocks.linear_full() + s * obs.lin
    return LiouvillianBlocks(
        m=blocks.m,
        L=blocks.L + s * obs.quad,
        eta=lin_full[n:],
        L0=blocks.L0 + s * obs.constant,
        J=blocks.J,
        Heff=blocks.Heff,
        N=blocks.N,
        Z=blocks.Z,
        tilt_s=blocks.tilt_s + s,
        lin_c=lin_full[:n] if _maxabs(lin_full[:n]) > 0 else None,
    )


@dataclasses.dataclass(frozen=True)
class TiltedBranchSet:
    """Eigenvalue branches continued in the counting field.

    ``s_grid`` is sorted and contains 0; ``branches[i, k]`` is
    ``lambda_i(s_grid[k])`` continued from the gauge-fixed start values
    ``lambdas0 = branches[:, s_grid == 0]``.  ``g_values[k]`` is the
    long-time factorial cumulant generating function at the grid point
    (drive corrections included).  ``overlap_log`` is the minimum
    eigenvector overlap accepted during matching.
    """

    blocks: LiouvillianBlocks
    observable: QuadraticObservable
    s_grid: np.ndarray
    branches: np.ndarray
    g_values: np.ndarray
    lambdas0: np.ndarray
    overlap_log: float
    max_step_jump: float

    def grid_index(self, s) -> int:
        k = int(np.argmin(np.abs(self.s_grid - s)))
        if abs(self.s_grid[k] - s) > 1e-12 * max(1.0, abs(s)):
            raise OffGrid(f"s={s} is not on the tracked grid", s=s)
        return k


def _eigensolve(L: np.ndarray, J: np.ndarray):
    values, vectors = sla.eig(L, J)
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    return values, vectors


def _match(prev_vecs: np.ndarray, prev_lams: np.ndarray, vectors: np.ndarray):
    """Globally assign previous branch vectors to new eigenvectors.

    The acceptance overlap is measured against the span of each degenerate
    branch cluster, not the individual vectors: departing a degenerate point
    the true eigenbasis is an arbitrary rotation of the stored one, which
    caps per-vector overlaps near 1/sqrt(2) no matter how small the step.
    Within a cluster the branch labels are exchangeable, so any assignment
    continues a valid analytic family.
    """
    ov = np.abs(prev_vecs.conj().T @ vectors)
    rows, cols = scipy.optimize.linear_sum_assignment(-ov)
    sel = np.empty(prev_vecs.shape[1], dtype=int)
    sel[rows] = cols
    tol = 1e-8 * max(1.0, float(np.max(np.abs(prev_lams))))
    clusters: list[list[int]] = []
    for b in range(len(prev_lams)):
        for c in clusters:
            if abs(prev_lams[c[0]] - prev_lams[b]) <= tol:
                c.append(b)
                break
        else:
            clusters.append([b])
    min_ov = 1.0
    for c in clusters:
        basis = np.linalg.qr(prev_vecs[:, c])[0]
        proj = np.linalg.norm(basis.conj().T @ vectors[:, sel[c]], axis=0)
        min_ov = min(min_ov, float(np.min(proj)))
    return sel, min_ov


def _linear_correction(blocks, obs, s, values, vectors, sel, lam_s, scale):
    """Drive term ``sum_i pu_i pv_i / lambda_i`` at one tilted grid point.

    Needs the full symplectic transformation at s: partners are matched to
    the tracked branches, the normal form is rebuilt from that ordering,
    and the linear coefficients are rotated with ``S^T``.
    """
    n = len(lam_s)
    rest = [j for j in range(2 * n) if j not in set(sel)]
    partners = []
    for i in range(n):
        j = min(rest, key=lambda jj: abs(values[jj] + lam_s[i]))
        rest.remove(j)
        partners.append(j)
    order = list(partners) + list(sel)
    Ls = blocks.L + s * obs.quad
    try:
        nf = sympl_normal_form(Ls, _ordered=(values[order], vectors[:, order]))
    except ResidualFailure as exc:
        raise NonDiagonalizableOnPath(
            f"no clean symplectic form at s={s}: {exc.message}", s=s
        ) from exc
    ell = blocks.linear_full() + s * obs.lin
    p = nf.S.T @ ell
    pu, pv = p[:n], p[n:]
    if np.any(np.abs(lam_s) <= 1e-9 * scale):
        raise DriveAtCriticalMode(
            "a tracked eigenvalue vanishes on the path; the driven generating "
            "function is undefined there",
            s=s,
        )
    return complex(np.sum(pu * pv / lam_s))


def track_branches(
    blocks: LiouvillianBlocks,
    obs: QuadraticObservable,
    s_max: complex,
    steps: int = 8,
    two_sided: bool = True,
) -> TiltedBranchSet:
    """Continue the gauge-fixed eigenvalues along the straight path to s_max.

    The grid has ``steps`` intervals from 0 to ``s_max`` (mirrored to
    ``-s_max`` when ``two_sided``, the default, so cumulant stencils can
    straddle 0).  Matching is by maximal eigenvector overlap; when the
    minimum overlap drops below 0.7 the step is halved, up to 10 times,
    before a :class:`BranchCollision` is reported.
    """
    if steps < 1:
        raise InsufficientGrid("need at least one step")
    form = third_quantize(blocks)
    if form.jordan:
        raise NonDiagonalizableOnPath(
            "untilted generator is not diagonalizable; branches are not defined"
        )
    n = form.n
    J = blocks.J
    lam0 = form.lambdas.copy()
    scale = max(_maxabs(blocks.L), 1.0)
    start_vecs = form.S[:, n:] / np.linalg.norm(form.S[:, n:], axis=0)

    has_linear = _maxabs(blocks.linear_full()) > 0 or _maxabs(obs.lin) > 0

    def node_data(s, values, vectors, sel, lam_s):
        corr = 0.0 + 0.0j
        if has_linear and s != 0:
            corr = _linear_correction(blocks, obs, s, values, vectors, sel, lam_s, scale)
        g = 0.5 * np.sum(lam_s - lam0) + s * obs.constant - corr
        return complex(g)

    def march(direction):
        """Walk outward from 0; returns per-node (s, lambdas, G) and diagnostics."""
        diag = {"ov": 1.0, "jump": 0.0}

        def advance(s_from, vecs, lam_prev, s_to, depth):
            values, vectors = _eigensolve(blocks.L + s_to * obs.quad, J)
            sel, ov = _match(vecs, lam_prev, vectors)
            if ov < _MIN_OVERLAP:
                if depth >= _MAX_REFINE:
                    raise BranchCollision(
                        f"branches unresolvable near s={s_to} "
                        f"(overlap {ov:.3f} after {_MAX_REFINE} refinements)",
                        s=s_to,
                        overlap=ov,
                    )
                mid = s_from + 0.5 * (s_to - s_from)
                vecs, lam_prev, _ = advance(s_from, vecs, lam_prev, mid, depth + 1)
                return advance(mid, vecs, lam_prev, s_to, depth + 1)
            lam_s = values[sel]
            diag["ov"] = min(diag["ov"], ov)
            diag["jump"] = max(diag["jump"], float(np.max(np.abs(lam_s - lam_prev))))
            return vecs_out(vectors, sel), lam_s, (values, vectors, sel)

        def vecs_out(vectors, sel):
            return vectors[:, sel]

        out = []
        vecs, lam_prev, s_prev = start_vecs.copy(), lam0.copy(), 0.0
        for kstep in range(1, steps + 1):
            s_t = direction * s_max * kstep / steps
            vecs, lam_prev, (values, vectors, sel) = advance(s_prev, vecs, lam_prev, s_t, 0)
            s_prev = s_t
            out.append((s_t, lam_prev, node_data(s_t, values, vectors, sel, lam_prev)))
        return out, diag["ov"], diag["jump"]

    fwd, ov_f, jump_f = march(+1.0)
    nodes = [(0.0, lam0, 0.0 + 0.0j)] + fwd
    ov, jump = ov_f, jump_f
    if two_sided:
        bwd, ov_b, jump_b = march(-1.0)
        nodes = list(reversed(bwd)) + nodes
        ov, jump = min(ov, ov_b), max(jump, jump_b)

    s_grid = np.array([nd[0] for nd in nodes])
    branches = np.stack([nd[1] for nd in nodes], axis=1)
    g_values = np.array([nd[2] for nd in nodes])
    return TiltedBranchSet(
        blocks=blocks,
        observable=obs,
        s_grid=s_grid,
        branches=branches,
        g_values=g_values,
        lambdas0=lam0,
        overlap_log=ov,
        max_step_jump=jump,
    )


def generating_function(branch_set: TiltedBranchSet, s) -> complex:
    """Long-time factorial cumulant generating function at a tracked grid point."""
    return complex(branch_set.g_values[branch_set.grid_index(s)])


def _grid_value(branch_set, s):
    return complex(branch_set.g_values[branch_set.grid_index(s)])


def factorial_cumulants(branch_set: TiltedBranchSet, k: int):
    """First k factorial cumulants: derivatives of G at 0.

    Central differences on the tracked grid, Richardson-extrapolated once;
    orders up to 4 need grid points out to +-4h around 0.
    """
    if not 1 <= k <= 4:
        raise InsufficientGrid(f"order must be between 1 and 4, got {k}")
    sg = branch_set.s_grid
    zero = int(np.argmin(np.abs(sg)))
    if abs(sg[zero]) > 1e-14:
        raise InsufficientGrid("grid does not contain s = 0")
    need = 2 if k <= 2 else 4
    if zero < need or zero + need >= len(sg):
        raise InsufficientGrid(
            f"order {k} needs {need} grid points on both sides of 0",
            available=(zero, len(sg) - 1 - zero),
        )
    h = sg[zero + 1] - sg[zero]
    steps = sg[zero - need: zero + need + 1] - sg[zero]
    if _maxabs(steps - h * np.arange(-need, need + 1)) > 1e-10 * abs(h):
        raise InsufficientGrid("grid is not uniform around 0")

    def G(j):  # j in units of h
        return _grid_value(branch_set, sg[zero + j])

    def stencil(order, step):
        g = {j: G(j * step) for j in (-2, -1, 0, 1, 2)}
        hh = h * step
        if order == 1:
            return (g[1] - g[-1]) / (2 * hh)
        if order == 2:
            return (g[1] - 2 * g[0] + g[-1]) / hh**2
        if order == 3:
            return (g[2] - 2 * g[1] + 2 * g[-1] - g[-2]) / (2 * hh**3)
        return (g[2] - 4 * g[1] + 6 * g[0] - 4 * g[-1] + g[-2]) / hh**4

    out = []
    for order in range(1, k + 1):
        d1 = stencil(order, 1)
        d2 = stencil(order, 2)
        out.append(complex((4.0 * d1 - d2) / 3.0))  # one Richardson step, O(h^2) -> O(h^4)
    return out


# Stirling numbers of the second kind, S(n, j) for n <= 4
_STIRLING2 = {
    1: [1],
    2: [1, 1],
    3: [1, 3, 1],
    4: [1, 7, 6, 1],
}


def ordinary_cumulants(branch_set: TiltedBranchSet, k: int):
    """Ordinary cumulants via the substitution ``s -> exp(i chi) - 1``.

    Chain rule at chi = 0 reduces to the Stirling-number mix of factorial
    cumulants: ``c_n = sum_j S(n, j) f_j``.
    """
    fact = factorial_cumulants(branch_set, k)
    out = []
    for order in range(1, k + 1):
        coeffs = _STIRLING2[order]
        out.append(complex(sum(c * f for c, f in zip(coeffs, fact[:order]))))
    return out
