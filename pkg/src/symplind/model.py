"""Physical model of a quadratic bosonic Lindblad equation and its matrix form.

The Hamiltonian is ``H = sum a_i^dag h_ij a_j + (1/2) a_i delta_ij a_j
+ h.c. pairing + linear drive``; jump operators are linear,
``J_mu = sum_i (v_i a_i + w_i a_i^dag) + beta``.  :func:`assemble_liouvillian`
turns a model into the complex symmetric matrix ``L`` (plus linear part,
constant, and symplectic form) that the normal-form machinery consumes.

Basis convention (frozen; every matrix index in this package refers to it)::

    b = (a_c, a_c^dag, a_q^dag, -a_q)

with m entries per group, so ``b`` has 4m components.  The classical /
quantum superoperators are ``O_c rho = (O rho + rho O)/2`` and
``O_q rho = O rho - rho O``.
"""

from __future__ import annotations

import dataclasses
import json
import warnings

import numpy as np

from .errors import DimensionMismatch, ModelParseError
from .linalg import standard_symplectic_form

__all__ = [
    "JumpOperator",
    "LindbladModel",
    "DissipationMatrices",
    "LiouvillianBlocks",
    "build_dissipation",
    "build_heff",
    "build_noise",
    "build_drive",
    "assemble_liouvillian",
    "validate_hermiticity_structure",
    "model_from_dict",
    "model_from_json",
    "exchange_matrix",
]

_SYM_WARN = 1e-10


def _maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclasses.dataclass(frozen=True)
class JumpOperator:
    """Linear jump operator: ``sum_i v_i a_i + w_i a_i^dag + beta``.

    ``v`` couples to emission, ``w`` to absorption; ``beta`` is a constant
    offset that only displaces the vacuum.
    """

    v: np.ndarray
    w: np.ndarray
    beta: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=complex).reshape(-1))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=complex).reshape(-1))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.v.shape != self.w.shape:
            raise DimensionMismatch(
                f"jump vectors disagree in length: {self.v.shape} vs {self.w.shape}"
            )


@dataclasses.dataclass(frozen=True)
class LindbladModel:
    """Validated physical model: m modes, Hamiltonian blocks, drives, jumps.

    ``h`` is Hermitized and ``delta`` symmetrized on construction; a warning
    is emitted when the correction exceeds 1e-10 relative to the block norm.
    Rates and frequencies are plain numbers in the user's unit system; the
    library never rescales them.
    """

    m: int
    h: np.ndarray
    delta: np.ndarray
    alpha: np.ndarray
    jumps: tuple

    def __post_init__(self):
        m = int(self.m)
        if m < 1:
            raise DimensionMismatch(f"need at least one mode, got m={m}")
        h = np.asarray(self.h, dtype=complex)
        delta = np.asarray(self.delta, dtype=complex)
        alpha = np.asarray(self.alpha, dtype=complex).reshape(-1)
        if h.shape != (m, m) or delta.shape != (m, m) or alpha.shape != (m,):
            raise DimensionMismatch(
                f"blocks must be ({m},{m}) matrices and alpha length {m}; "
                f"got h{h.shape}, delta{delta.shape}, alpha{alpha.shape}"
            )
        hs = 0.5 * (h + h.conj().T)
        ds = 0.5 * (delta + delta.T)
        if _maxabs(h - hs) > _SYM_WARN * max(_maxabs(h), 1.0):
            warnings.warn("h was not Hermitian; using (h + h^dag)/2", stacklevel=2)
        if _maxabs(delta - ds) > _SYM_WARN * max(_maxabs(delta), 1.0):
            warnings.warn("delta was not symmetric; using (delta + delta^T)/2", stacklevel=2)
        jumps = tuple(self.jumps)
        for k, j in enumerate(jumps):
            if j.v.shape != (m,):
                raise DimensionMismatch(
                    f"jump {k} has vectors of length {j.v.shape[0]}, expected {m}"
                )
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "h", hs)
        object.__setattr__(self, "delta", ds)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "jumps", jumps)


@dataclasses.dataclass(frozen=True)
class DissipationMatrices:
    """``V = sum v v^dag``, ``W = sum w w^dag``, ``U = -sum v w^dag``."""

    V: np.ndarray
    W: np.ndarray
    U: np.ndarray


@dataclasses.dataclass(frozen=True)
class LiouvillianBlocks:
    """Matrix form of the Liouvillian, ``L_op = (1/2) b^T L b + eta . b_q + L0``.

    ``L`` is 4m x 4m complex symmetric with vanishing upper-left 2m x 2m
    block (trace preservation); ``eta = (z, z*)`` holds the linear part in
    the q sector; ``J`` is the standard symplectic form.  ``Heff``, ``N``
    and ``Z`` are the dynamical, noise and signature blocks.  ``tilt_s``
    is nonzero on counting-field-tilted copies, for which the zero-block
    invariant is waived and ``lin_c`` may carry a c-sector linear part.
    """

    m: int
    L: np.ndarray
    eta: np.ndarray
    L0: complex
    J: np.ndarray
    Heff: np.ndarray
    N: np.ndarray
    Z: np.ndarray
    tilt_s: complex = 0.0
    lin_c: np.ndarray | None = None

    @property
    def K(self) -> np.ndarray:
        """Lower-left block ``-i Z Heff``; its eigenvalues are the gauge-fixed spectrum."""
        n = 2 * self.m
        return self.L[n:, :n]

    def linear_full(self) -> np.ndarray:
        """Linear coefficients against the full b vector (c sector first)."""
        n = 2 * self.m
        head = self.lin_c if self.lin_c is not None else np.zeros(n, dtype=complex)
        return np.concatenate([head, self.eta])


def build_dissipation(jumps) -> DissipationMatrices:
    """Dissipation matrices from the dyadic sums over all jump operators."""
    jumps = tuple(jumps)
    if not jumps:
        raise DimensionMismatch("cannot infer mode count from an empty jump list; "
                                "use build_dissipation_m(m, jumps)")
    return build_dissipation_m(jumps[0].v.shape[0], jumps)


def build_dissipation_m(m: int, jumps) -> DissipationMatrices:
    V = np.zeros((m, m), dtype=complex)
    W = np.zeros((m, m), dtype=complex)
    U = np.zeros((m, m), dtype=complex)
    for j in jumps:
        if j.v.shape != (m,):
            raise DimensionMismatch(f"jump vector length {j.v.shape[0]} != m={m}")
        V += np.outer(j.v, j.v.conj())
        W += np.outer(j.w, j.w.conj())
        U -= np.outer(j.v, j.w.conj())
    return DissipationMatrices(V=V, W=W, U=U)


def build_heff(model: LindbladModel, d: DissipationMatrices) -> np.ndarray:
    """Non-Hermitian 2m x 2m effective Hamiltonian block.

    Splits as ``H + (i/2) Gamma`` with both parts Hermitian; ``H`` is the
    closed-system Hamiltonian in the (a, a^dag) basis and ``Gamma`` collects
    the dissipative part.
    """
    h, delta = model.h, model.delta
    V, W, U = d.V, d.W, d.U
    top = np.hstack([h + 0.5j * (W - V.conj()),
                     delta.conj() - 0.5j * (U.conj().T - U.conj())])
    bot = np.hstack([delta + 0.5j * (U.T - U),
                     h.conj() - 0.5j * (W.conj() - V)])
    return np.vstack([top, bot])


def build_noise(d: DissipationMatrices) -> np.ndarray:
    """Symmetric noise block ``N`` of the q-q sector.

    ``N = (1/2) [[U^dag + U*, W + V*], [W* + V, U^T + U]]``.  The one-half
    prefactor is fixed by expanding the dissipators in the c/q algebra; the
    operator-level equivalence with a directly built Fock-space generator is
    pinned by tests.
    """
    V, W, U = d.V, d.W, d.U
    top = np.hstack([U.conj().T + U.conj(), W + V.conj()])
    bot = np.hstack([W.conj() + V, U.T + U])
    return 0.5 * np.vstack([top, bot])


def build_drive(model: LindbladModel):
    """Linear part: ``z = -i alpha + (1/2) sum (beta* w - beta v*)``, ``eta = (z, z*)``."""
    z = -1j * model.alpha.copy()
    for j in model.jumps:
        z += 0.5 * (np.conj(j.beta) * j.w - j.beta * j.v.conj())
    eta = np.concatenate([z, z.conj()])
    return eta, z


def assemble_liouvillian(model: LindbladModel) -> LiouvillianBlocks:
    """Assemble all Liouvillian blocks of a validated model.

    ``L = [[0, -i Heff^T Z], [-i Z Heff, N]]`` and ``L0 = tr(V - W)/2``.
    """
    m = model.m
    d = build_dissipation_m(m, model.jumps)
    Heff = build_heff(model, d)
    N = build_noise(d)
    Z = np.diag(np.concatenate([np.ones(m), -np.ones(m)])).astype(complex)
    K = -1j * Z @ Heff
    zero = np.zeros((2 * m, 2 * m), dtype=complex)
    L = np.block([[zero, K.T], [K, N]])
    L = 0.5 * (L + L.T)  # kill rounding asymmetry
    eta, _ = build_drive(model)
    L0 = complex(0.5 * np.trace(d.V - d.W))
    J = standard_symplectic_form(2 * m)
    return LiouvillianBlocks(m=m, L=L, eta=eta, L0=L0, J=J, Heff=Heff, N=N, Z=Z)


def exchange_matrix(m: int) -> np.ndarray:
    """The 2m x 2m block swap ``X = [[0, I_m], [I_m, 0]]``."""
    X = np.zeros((2 * m, 2 * m))
    X[:m, m:] = np.eye(m)
    X[m:, :m] = np.eye(m)
    return X


def validate_hermiticity_structure(blocks: LiouvillianBlocks) -> dict:
    """Residuals of the density-matrix-hermiticity constraints.

    Checks ``X Heff* X = Heff`` and ``X N* X = N`` (with X the mode swap)
    plus the lifted ``A L A = L`` with ``A = diag(X, X) K``.  Reports, never
    raises: builder output satisfies these by construction, hand-built or
    corrupted blocks may not.
    """
    X = exchange_matrix(blocks.m)
    r_heff = _maxabs(X @ blocks.Heff.conj() @ X - blocks.Heff)
    r_noise = _maxabs(X @ blocks.N.conj() @ X - blocks.N)
    A = np.block([[X, np.zeros_like(X)], [np.zeros_like(X), X]])
    r_full = _maxabs(A @ blocks.L.conj() @ A - blocks.L)
    scale = max(_maxabs(blocks.Heff), _maxabs(blocks.N), 1.0)
    worst = max(r_heff, r_noise, r_full)
    return {
        "heff": r_heff,
        "noise": r_noise,
        "full": r_full,
        "max": worst,
        "scale": scale,
        "passed": bool(worst <= 1e-10 * scale),
    }


# ----------------------------------------------------------------- JSON input

def _complex_from_json(node, path: str) -> complex:
    if isinstance(node, (int, float)):
        return complex(node)
    if (isinstance(node, (list, tuple)) and len(node) == 2
            and all(isinstance(x, (int, float)) for x in node)):
        return complex(node[0], node[1])
    raise ModelParseError(path, f"expected number or [re, im] pair, got {node!r}")


def _cvector(node, length: int, path: str) -> np.ndarray:
    if not isinstance(node, list):
        raise ModelParseError(path, f"expected array of length {length}")
    if len(node) != length:
        raise ModelParseError(path, f"expected length {length}, got {len(node)}")
    return np.array([_complex_from_json(x, f"{path}[{i}]") for i, x in enumerate(node)])


def _cmatrix(node, rows: int, cols: int, path: str) -> np.ndarray:
    if not isinstance(node, list) or len(node) != rows:
        raise ModelParseError(path, f"expected {rows} rows")
    return np.array([_cvector(r, cols, f"{path}[{i}]") for i, r in enumerate(node)])


def model_from_dict(data: dict) -> LindbladModel:
    """Build a model from the documented JSON schema (see README).

    Required: ``modes`` (int) and ``h``.  ``delta``, ``alpha`` and per-jump
    ``w``/``beta`` default to zero.  Errors name the offending JSON path.
    """
    if not isinstance(data, dict):
        raise ModelParseError("$", "top level must be an object")
    if "modes" not in data:
        raise ModelParseError("$.modes", "missing required field")
    m = data["modes"]
    if not isinstance(m, int) or m < 1:
        raise ModelParseError("$.modes", f"expected positive integer, got {m!r}")
    if "h" not in data:
        raise ModelParseError("$.h", "missing required field")
    h = _cmatrix(data["h"], m, m, "$.h")
    delta = (_cmatrix(data["delta"], m, m, "$.delta")
             if data.get("delta") is not None else np.zeros((m, m), dtype=complex))
    alpha = (_cvector(data["alpha"], m, "$.alpha")
             if data.get("alpha") is not None else np.zeros(m, dtype=complex))
    jumps = []
    raw_jumps = data.get("jumps", [])
    if not isinstance(raw_jumps, list):
        raise ModelParseError("$.jumps", "expected array")
    for k, rj in enumerate(raw_jumps):
        p = f"$.jumps[{k}]"
        if not isinstance(rj, dict):
            raise ModelParseError(p, "expected object with v/w/beta")
        v = _cvector(rj["v"], m, f"{p}.v") if rj.get("v") is not None else np.zeros(m, dtype=complex)
        w = _cvector(rj["w"], m, f"{p}.w") if rj.get("w") is not None else np.zeros(m, dtype=complex)
        beta = _complex_from_json(rj["beta"], f"{p}.beta") if rj.get("beta") is not None else 0.0
        jumps.append(JumpOperator(v=v, w=w, beta=beta))
    return LindbladModel(m=m, h=h, delta=delta, alpha=alpha, jumps=tuple(jumps))


def model_from_json(path) -> LindbladModel:
    """Parse a model file; see :func:`model_from_dict` for the schema."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelParseError("$", f"invalid JSON: {exc}") from exc
    return model_from_dict(data)
