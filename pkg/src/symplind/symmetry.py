"""Symmetry machinery: hermiticity structure, unitary symmetries, PT checks.

Hermiticity of the density matrix acts on the frozen b basis as the
anti-linear ``A = diag(X, X) K`` (X swaps the mode halves, K conjugates)
and forces the spectrum to be closed under complex conjugation.  A unitary
mode-space symmetry ``P`` lifts to ``Omega = diag(P, P*)`` on the effective
Hamiltonian and block conditions on (h, delta, z, U, W, V).  A PT-type
symmetry is anti-unitary, built from a real orthogonal symmetric ``P``; it
exchanges gain and loss and mirrors the spectrum along the imaginary axis.

Checks are residual reports against user-supplied candidates; no symmetry
search is attempted.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import DimensionMismatch, InputError
from .linalg import _maxabs
from .model import (
    DissipationMatrices,
    LindbladModel,
    LiouvillianBlocks,
    build_drive,
    exchange_matrix,
    validate_hermiticity_structure,
)

__all__ = [
    "UnitarySymmetryCandidate",
    "PTSymmetryCandidate",
    "pt_candidate_from_unitary",
    "hermiticity_check",
    "conjugate_pairing_check",
    "mirror_pairing_check",
    "unitary_symmetry_check",
    "pt_symmetry_check",
    "pt_classification",
    "SymmetryVerdict",
]

_CAND_TOL = 1e-10


@dataclasses.dataclass(frozen=True)
class UnitarySymmetryCandidate:
    """Unitary m x m mode-space matrix P; lifts to ``Omega = diag(P, P*)``."""

    P: np.ndarray
    name: str = ""

    def __post_init__(self):
        P = np.asarray(self.P, dtype=complex)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise DimensionMismatch("P must be square")
        if _maxabs(P.conj().T @ P - np.eye(P.shape[0])) > _CAND_TOL:
            raise InputError("candidate P is not unitary within 1e-10")
        object.__setattr__(self, "P", P)


@dataclasses.dataclass(frozen=True)
class PTSymmetryCandidate:
    """Real orthogonal symmetric m x m matrix P for the anti-unitary lift."""

    P: np.ndarray
    name: str = ""

    def __post_init__(self):
        P = np.asarray(self.P)
        if np.iscomplexobj(P) and _maxabs(P.imag) > _CAND_TOL:
            raise InputError("PT candidate P must be real")
        P = np.asarray(P.real, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise DimensionMismatch("P must be square")
        if _maxabs(P @ P.T - np.eye(P.shape[0])) > _CAND_TOL:
            raise InputError("PT candidate P is not orthogonal within 1e-10")
        if _maxabs(P - P.T) > _CAND_TOL:
            raise InputError("PT candidate P is not symmetric within 1e-10")
        object.__setattr__(self, "P", P)


def pt_candidate_from_unitary(Q, name: str = "") -> PTSymmetryCandidate:
    """Convert a symmetric unitary (an anti-unitary built as Omega X K) to real-P form.

    A global phase is factored out; the remainder must be real to qualify.
    """
    Q = np.asarray(Q, dtype=complex)
    j = np.unravel_index(int(np.argmax(np.abs(Q))), Q.shape)
    phase = Q[j] / abs(Q[j])
    P = Q / phase
    if _maxabs(P.imag) > _CAND_TOL:
        raise InputError("unitary candidate is not a phase times a real matrix")
    return PTSymmetryCandidate(P=P.real, name=name)


def hermiticity_check(blocks: LiouvillianBlocks) -> dict:
    """Residuals of ``A L A = L``, ``X Heff* X = Heff`` and ``X N* X = N``."""
    return validate_hermiticity_structure(blocks)


def _closed_under(values, mapping, tol) -> bool:
    vals = list(np.asarray(values, dtype=complex))
    targets = [mapping(v) for v in vals]
    used = [False] * len(vals)
    for t in targets:
        best, bestd = None, np.inf
        for k, v in enumerate(vals):
            if not used[k] and abs(v - t) < bestd:
                best, bestd = k, abs(v - t)
        if best is None or bestd > tol:
            return False
        used[best] = True
    return True


def conjugate_pairing_check(lambdas, tol: float = 1e-8) -> bool:
    """True when the multiset of eigenvalues is closed under conjugation."""
    return _closed_under(lambdas, np.conj, tol)


def mirror_pairing_check(lambdas, tol: float = 1e-8) -> bool:
    """True when the multiset is closed under ``lambda -> -lambda*`` (imaginary-axis mirror)."""
    return _closed_under(lambdas, lambda v: -np.conj(v), tol)


@dataclasses.dataclass(frozen=True)
class SymmetryVerdict:
    """Outcome of a symmetry check: overall verdict plus per-condition residuals."""

    passed: bool
    residuals: dict
    scale: float
    tol: float

    def worst(self) -> float:
        return max(self.residuals.values())


def _sym_scale(model: LindbladModel, d: DissipationMatrices) -> float:
    return max(_maxabs(model.h), _maxabs(model.delta), _maxabs(d.V), _maxabs(d.W), 1.0)


def unitary_symmetry_check(
    model: LindbladModel, d: DissipationMatrices, cand: UnitarySymmetryCandidate
) -> SymmetryVerdict:
    """Check the six block conditions of a unitary Liouvillian symmetry.

    ``P^dag h P = h``, ``P^T delta P = delta``, ``P z = z``,
    ``P^T U P = U``, ``P^dag W P = W``, ``P^T V P* = V``; the lifted
    ``Omega_tilde^T L Omega_tilde = L`` is evaluated as a redundant
    end-to-end residual.
    """
    P = cand.P
    m = model.m
    if P.shape != (m, m):
        raise DimensionMismatch(f"P must be {m} x {m}")
    _, z = build_drive(model)
    res = {
        "h": _maxabs(P.conj().T @ model.h @ P - model.h),
        "delta": _maxabs(P.T @ model.delta @ P - model.delta),
        "z": _maxabs(P @ z - z),
        "U": _maxabs(P.T @ d.U @ P - d.U),
        "W": _maxabs(P.conj().T @ d.W @ P - d.W),
        "V": _maxabs(P.T @ d.V @ P.conj() - d.V),
    }
    # lifted check on the assembled quadratic form
    from .model import assemble_liouvillian

    blocks = assemble_liouvillian(model)
    Om = _blockdiag(P, P.conj())
    Omt = _blockdiag(Om, Om.conj())
    res["lifted"] = _maxabs(Omt.T @ blocks.L @ Omt - blocks.L)
    scale = _sym_scale(model, d)
    tol = 1e-9 * scale
    return SymmetryVerdict(
        passed=bool(max(res.values()) <= tol), residuals=res, scale=scale, tol=tol
    )


def pt_symmetry_check(
    model: LindbladModel, d: DissipationMatrices, cand: PTSymmetryCandidate
) -> SymmetryVerdict:
    """Check the block conditions of a PT-type (gain-loss exchange) symmetry.

    ``P h* P = h``, ``P delta* P = delta``, ``P z = -z*``, ``P U P = U^dag``,
    ``P W P = V``; the lifted anti-unitary check is
    ``Omega_tilde^T L* Omega_tilde = L`` with ``Omega_tilde = diag(Om, -Om)``
    and ``Om = diag(P, P)``.
    """
    P = cand.P.astype(complex)
    m = model.m
    if P.shape != (m, m):
        raise DimensionMismatch(f"P must be {m} x {m}")
    _, z = build_drive(model)
    res = {
        "h": _maxabs(P @ model.h.conj() @ P - model.h),
        "delta": _maxabs(P @ model.delta.conj() @ P - model.delta),
        "z": _maxabs(P @ z + z.conj()),
        "U": _maxabs(P @ d.U @ P - d.U.conj().T),
        "WV": _maxabs(P @ d.W @ P - d.V),
    }
    from .model import assemble_liouvillian

    blocks = assemble_liouvillian(model)
    Om = _blockdiag(P, P)
    Omt = _blockdiag(Om, -Om)
    res["lifted"] = _maxabs(Omt.T @ blocks.L.conj() @ Omt - blocks.L)
    scale = _sym_scale(model, d)
    tol = 1e-9 * scale
    return SymmetryVerdict(
        passed=bool(max(res.values()) <= tol), residuals=res, scale=scale, tol=tol
    )


def _blockdiag(a, b):
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def pt_classification(lambdas, jordan, scale: float = 1.0) -> str:
    """Classify a PT-symmetric spectrum: 'unbroken', 'broken' or 'exceptional'.

    Unbroken means the whole gauge-fixed spectrum sits on the imaginary
    axis; broken means mirror pairs acquired real parts; exceptional means
    eigenvalues (and eigenvectors) coalesced, i.e. a mode-kind Jordan pair
    is present.  Cross-kind couplings (noise-bridged resonances) do not
    make the point exceptional; they are generic on the unbroken side.
    """
    lam = np.asarray(lambdas, dtype=complex)
    tol = 1e-9 * max(scale, 1.0)
    if any(p.kind == "mode" for p in jordan):
        return "exceptional"
    if np.max(lam.real) > tol:
        return "broken"
    return "unbroken"
