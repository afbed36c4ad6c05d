"""Brute-force ground truth: the Lindblad generator on a truncated Fock space.

Everything here is built directly from the physical model (Hamiltonian,
jump operators, drives) by dense tensor construction; none of the
symplectic assembly code is imported.  Agreement between this generator
and the quadratic-form engine is therefore a genuine cross-check, not a
tautology.

Vectorization is column-major: ``vec(A rho B) = (B^T kron A) vec(rho)``,
so left multiplication is ``I kron A`` and right multiplication is
``B^T kron I``.  The convention is pinned by the damped-cavity fixture.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, ResourceLimit, TruncationWarning
from .model import LindbladModel

MAX_DIM = 2**14

__all__ = [
    "OracleGenerator",
    "build_oracle",
    "oracle_spectrum",
    "oracle_leading_tilted_eigenvalue",
    "stationary_state",
    "stationary_occupations",
    "stationary_mode_amplitudes",
    "ladder_operator",
    "mode_operators",
    "b_superoperators",
    "realize_quadratic_form",
]


def ladder_operator(cutoff: int) -> np.ndarray:
    """Single-mode annihilation operator truncated at ``cutoff`` levels."""
    a = np.zeros((cutoff, cutoff), dtype=complex)
    for n in range(1, cutoff):
        a[n - 1, n] = np.sqrt(n)
    return a


def mode_operators(m: int, cutoff: int) -> list:
    """Per-mode annihilation operators on the m-mode product space."""
    a1 = ladder_operator(cutoff)
    eye = np.eye(cutoff)
    ops = []
    for i in range(m):
        factors = [a1 if j == i else eye for j in range(m)]
        out = factors[0]
        for f in factors[1:]:
            out = np.kron(out, f)
        ops.append(out)
    return ops


def _lmul(A: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(A.shape[0]), A)


def _rmul(A: np.ndarray) -> np.ndarray:
    return np.kron(A.T, np.eye(A.shape[0]))


@dataclasses.dataclass(frozen=True)
class OracleGenerator:
    """Dense superoperator of the (optionally tilted) Lindblad generator."""

    model: LindbladModel
    cutoff: int
    s: complex
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def fock_dim(self) -> int:
        return self.cutoff ** self.model.m

    def trace_vector(self) -> np.ndarray:
        """Row vector implementing the trace functional on vectorized states."""
        D = self.fock_dim
        t = np.zeros(D * D)
        t[np.arange(D) * D + np.arange(D)] = 1.0
        return t


def _hamiltonian(model: LindbladModel, cutoff: int) -> np.ndarray:
    a = mode_operators(model.m, cutoff)
    D = cutoff**model.m
    H = np.zeros((D, D), dtype=complex)
    for i in range(model.m):
        for j in range(model.m):
            H += model.h[i, j] * (a[i].conj().T @ a[j])
            H += 0.5 * model.delta[i, j] * (a[i] @ a[j])
            H += 0.5 * np.conj(model.delta[j, i]) * (a[i].conj().T @ a[j].conj().T)
        H += np.conj(model.alpha[i]) * a[i] + model.alpha[i] * a[i].conj().T
    return H


def _tilt_matrix(model: LindbladModel, cutoff: int, obs) -> np.ndarray:
    """Superoperator of the counting observable, built independently.

    The photon current is realized directly as the emission superoperator
    ``gamma * (a rho a^dag)``.  Any other quadratic observable is realized
    from its b-basis coefficients through the superoperator ladder algebra,
    which involves only the vectorization rules above.
    """
    if obs is None:
        raise DimensionMismatch("tilted oracle requires an observable")
    if obs.source is not None and obs.source[0] == "photon-current":
        _, mode, gamma = obs.source
        a = mode_operators(model.m, cutoff)[mode]
        return gamma * (_lmul(a) @ _rmul(a.conj().T))
    return realize_quadratic_form(model.m, cutoff, obs.quad, obs.lin, obs.constant)


def build_oracle(model: LindbladModel, cutoff: int, s: complex = 0.0, obs=None) -> OracleGenerator:
    """Assemble the dense (tilted) generator ``-i[H, .] + dissipators + s O``.

    ``cutoff`` is the number of Fock levels per mode; the superoperator
    dimension ``cutoff^(2m)`` is capped at 2^14.  At ``s = 0`` the
    vectorized identity is a left null vector (trace preservation).
    """
    if cutoff < 2:
        raise DimensionMismatch(f"cutoff must be at least 2, got {cutoff}")
    dim = cutoff ** (2 * model.m)
    if dim > MAX_DIM:
        raise ResourceLimit(
            f"superoperator dimension {dim} exceeds the cap {MAX_DIM}",
            cutoff=cutoff,
            modes=model.m,
        )
    a = mode_operators(model.m, cutoff)
    D = cutoff**model.m
    H = _hamiltonian(model, cutoff)
    gen = -1j * (_lmul(H) - _rmul(H))
    for jump in model.jumps:
        Jop = jump.beta * np.eye(D, dtype=complex)
        for i in range(model.m):
            Jop += jump.v[i] * a[i] + jump.w[i] * a[i].conj().T
        JdJ = Jop.conj().T @ Jop
        gen += _lmul(Jop) @ _rmul(Jop.conj().T) - 0.5 * (_lmul(JdJ) + _rmul(JdJ))
    s = complex(s)
    if s != 0:
        gen = gen + s * _tilt_matrix(model, cutoff, obs)
    return OracleGenerator(model=model, cutoff=cutoff, s=s, matrix=gen)


def oracle_spectrum(gen: OracleGenerator, k: int) -> np.ndarray:
    """The k eigenvalues with the largest real parts, sorted descending."""
    ev = np.linalg.eigvals(gen.matrix)
    order = np.argsort(-ev.real)
    return ev[order[:k]]


def _inverse_iteration(M: np.ndarray, sigma: complex, maxiter: int = 200):
    lu = sla.lu_factor(M - sigma * np.eye(M.shape[0]))
    rng = np.random.default_rng(0)
    x = rng.normal(size=M.shape[0]) + 0j
    x /= np.linalg.norm(x)
    lam_old = None
    for _ in range(maxiter):
        x = sla.lu_solve(lu, x)
        x /= np.linalg.norm(x)
        lam = complex(x.conj() @ (M @ x))
        if lam_old is not None and abs(lam - lam_old) < 1e-13 * max(1.0, abs(lam)):
            return lam, x
        lam_old = lam
    return None, x


def oracle_leading_tilted_eigenvalue(gen: OracleGenerator, start: complex | None = None) -> complex:
    """Eigenvalue of the tilted generator continuously connected to 0 at s=0.

    For small tilts and a stable untilted model this is the eigenvalue with
    the largest real part.  Without a ``start`` hint the full dense spectrum
    is computed; with one (continuation along an s grid) a dense
    shift-inverted iteration around the hint is used, which is much faster
    for large cutoffs and agrees with the dense solve to rounding.
    """
    if start is None or gen.dim <= 400:
        ev = np.linalg.eigvals(gen.matrix)
        return complex(ev[np.argmax(ev.real)])
    lam, _ = _inverse_iteration(gen.matrix, complex(start))
    if lam is None:
        ev = np.linalg.eigvals(gen.matrix)
        return complex(ev[np.argmax(ev.real)])
    return lam


def stationary_state(gen: OracleGenerator) -> np.ndarray:
    """Stationary density matrix (trace-normalized) of an untilted generator.

    Found by inverse iteration at the origin; emits
    :class:`TruncationWarning` when the stationary occupation of any mode
    exceeds a third of the cutoff.
    """
    if gen.s != 0:
        raise DimensionMismatch("stationary state is defined for the untilted generator")
    scale = float(np.max(np.abs(gen.matrix)))
    lam, x = _inverse_iteration(gen.matrix, sigma=1e-8 * scale * (1 + 1j))
    if lam is None or abs(lam) > 1e-6 * max(scale, 1.0):
        raise ResourceLimit(
            "no stationary solve: inverse iteration did not converge to a "
            "null vector (unstable model?)",
            eigenvalue=lam,
        )
    D = gen.fock_dim
    rho = x.reshape((D, D), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho)
    occ = stationary_occupations(gen, rho)
    if np.any(occ > gen.cutoff / 3.0):
        warnings.warn(
            f"stationary occupation {occ} close to the cutoff {gen.cutoff}",
            TruncationWarning,
            stacklevel=2,
        )
    return rho


def stationary_occupations(gen: OracleGenerator, rho: np.ndarray) -> np.ndarray:
    """Per-mode ``<a_i^dag a_i>`` in a given state."""
    a = mode_operators(gen.model.m, gen.cutoff)
    return np.array([float(np.trace(ai.conj().T @ ai @ rho).real) for ai in a])


def stationary_mode_amplitudes(gen: OracleGenerator, rho: np.ndarray) -> np.ndarray:
    """Per-mode ``<a_i>`` in a given state."""
    a = mode_operators(gen.model.m, gen.cutoff)
    return np.array([complex(np.trace(ai @ rho)) for ai in a])


# ------------------------------------------------- b-basis superoperators

def b_superoperators(m: int, cutoff: int) -> list:
    """Dense matrices of the frozen basis ``b = (a_c, a_c^dag, a_q^dag, -a_q)``.

    Only the vectorization rules enter; useful for realizing arbitrary
    quadratic forms on the doubled Fock space and for equivalence tests
    against the matrix representation used by the engine.
    """
    a = mode_operators(m, cutoff)
    ac, acd, aqd, maq = [], [], [], []
    for i in range(m):
        ap, am = _lmul(a[i]), _rmul(a[i])
        adp, adm = _lmul(a[i].conj().T), _rmul(a[i].conj().T)
        ac.append(0.5 * (ap + am))
        acd.append(0.5 * (adp + adm))
        aqd.append(adp - adm)
        maq.append(-(ap - am))
    return ac + acd + aqd + maq


def realize_quadratic_form(m: int, cutoff: int, quad, lin, constant) -> np.ndarray:
    """Dense superoperator of ``(1/2) b^T quad b + lin . b + constant``.

    Products are taken in the written order; with a symmetric ``quad`` this
    realizes the symmetrized quadratic form.
    """
    dim = cutoff ** (2 * m)
    if dim > MAX_DIM:
        raise ResourceLimit(f"superoperator dimension {dim} exceeds the cap {MAX_DIM}")
    B = b_superoperators(m, cutoff)
    quad = np.asarray(quad, dtype=complex)
    lin = np.asarray(lin, dtype=complex)
    out = complex(constant) * np.eye(dim, dtype=complex)
    for i in range(4 * m):
        for j in range(4 * m):
            if quad[i, j] != 0:
                out = out + 0.5 * quad[i, j] * (B[i] @ B[j])
    for i in range(4 * m):
        if lin[i] != 0:
            out = out + lin[i] * B[i]
    return out
