"""Control input matrices and actuation analysis.

``F`` and ``M`` map the squared spin rates ``u_i = w_i**2`` to the body-frame
control force and moment. Their vertical stack ``W`` (6 x n) is the full
wrench map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .platform import PlatformModel, rotor_axis, rotor_position

RANK_TOL = 1e-9
HOVER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class AllocationMatrices:
    F: np.ndarray
    M: np.ndarray

    @property
    def n(self) -> int:
        return self.F.shape[1]

    @property
    def W(self) -> np.ndarray:
        return np.vstack([self.F, self.M])


def build_allocation(model: PlatformModel, tilt_angles=None) -> AllocationMatrices:
    """Assemble F and M from rotor poses.

    ``tilt_angles`` is an optional per-rotor sequence of ``(alpha, beta)``
    pairs (``None`` entries keep the stored angle); only tiltable angles of
    a tilting platform may be overridden.
    """
    n = model.n
    F = np.zeros((3, n))
    M = np.zeros((3, n))
    if tilt_angles is not None and len(tilt_angles) != n:
        raise ValueError(f"expected {n} tilt angle pairs, got {len(tilt_angles)}")
    for i, r in enumerate(model.rotors):
        cant = dih = None
        if tilt_angles is not None and tilt_angles[i] is not None:
            cant, dih = tilt_angles[i]
        z = rotor_axis(r, cant, dih, tiltable=model.tilt_mode.can_tilt(i))
        p = rotor_position(r, model.arm_length)
        F[:, i] = r.c_f * z
        M[:, i] = r.c_f * np.cross(p, z) + r.kappa * r.c_tau * z
    return AllocationMatrices(F, M)


def wrench_from_inputs(A: AllocationMatrices, u) -> tuple[np.ndarray, np.ndarray]:
    """Body-frame control force and moment for nonnegative inputs ``u``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (A.n,):
        raise ValueError(f"expected {A.n} inputs, got shape {u.shape}")
    if np.any(u < 0):
        raise ValueError("control inputs u_i = w_i^2 must be nonnegative")
    return A.F @ u, A.M @ u


def matrix_rank(X, rank_tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def hover_wrench(model: PlatformModel) -> np.ndarray:
    return np.array([0.0, 0.0, model.mass * model.gravity, 0.0, 0.0, 0.0])


def solve_hover(A: AllocationMatrices, model: PlatformModel) -> tuple[np.ndarray, float]:
    """Nonnegative least-squares hover inputs at level attitude and the residual norm."""
    W = A.W
    target = hover_wrench(model)
    # column scaling keeps NNLS well conditioned (entries are ~1e-5)
    scale = np.linalg.norm(W, axis=0)
    scale[scale == 0.0] = 1.0
    Ws = W / scale
    x, _ = nnls(Ws, target)
    # polish on the active columns with an exact least-squares solve
    active = x > 0
    if np.any(active):
        y, *_ = np.linalg.lstsq(Ws[:, active], target, rcond=None)
        if np.all(y >= 0):
            x = np.zeros_like(x)
            x[active] = y
    u = x / scale
    return u, float(np.linalg.norm(W @ u - target))


@dataclass
class ActuationReport:
    rank_F: int
    rank_M: int
    rank_W: int
    fully_actuated: bool
    hover_feasible: bool
    hover_input: np.ndarray | None
    hover_residual: float
    decoupling_note: str

    def to_dict(self) -> dict:
        return {
            "rank_F": self.rank_F,
            "rank_M": self.rank_M,
            "rank_W": self.rank_W,
            "fully_actuated": self.fully_actuated,
            "hover_feasible": self.hover_feasible,
            "hover_input": None if self.hover_input is None else self.hover_input.tolist(),
            "hover_residual": self.hover_residual,
            "decoupling_note": self.decoupling_note,
        }


def _decoupling_note(rF: int, rM: int, rW: int) -> str:
    if rW == rF + rM:
        kind = "force and moment subspaces are independent"
    else:
        kind = f"force and moment are coupled (rank_W {rW} < rank_F + rank_M = {rF + rM})"
    return f"rank_F={rF}, rank_M={rM}, rank_W={rW}: {kind}"


def analyze_actuation(
    A: AllocationMatrices, model: PlatformModel, rank_tol: float = RANK_TOL
) -> ActuationReport:
    """Rank diagnostics, full-actuation verdict and hover feasibility."""
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    rF = matrix_rank(A.F, rank_tol)
    rM = matrix_rank(A.M, rank_tol)
    rW = matrix_rank(A.W, rank_tol)
    u, res = solve_hover(A, model)
    feasible = res <= HOVER_TOL
    return ActuationReport(
        rank_F=rF,
        rank_M=rM,
        rank_W=rW,
        fully_actuated=rW == 6,
        hover_feasible=feasible,
        hover_input=u if feasible else None,
        hover_residual=res,
        decoupling_note=_decoupling_note(rF, rM, rW),
    )


@dataclass
class AllocationResult:
    u: np.ndarray  # clamped, >= 0
    u_raw: np.ndarray
    force_residual: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque_residual: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def clamped(self) -> bool:
        return bool(self.u_raw.min() < 0.0)


class Allocator:
    """Pseudoinverse allocation with the pseudoinverse computed once."""

    def __init__(self, A: AllocationMatrices, rank_tol: float = RANK_TOL):
        self.A = A
        self.W = A.W
        self.W_pinv = np.linalg.pinv(self.W, rcond=rank_tol)

    def __call__(self, f_c, tau_c) -> AllocationResult:
        w = np.concatenate([f_c, tau_c])
        u_raw = self.W_pinv @ w
        u = u_raw if u_raw.min() >= 0.0 else np.maximum(u_raw, 0.0)
        res = self.W @ u - w
        return AllocationResult(u, u_raw, res[:3], res[3:])


def allocate_inputs(A: AllocationMatrices, f_c, tau_c) -> AllocationResult:
    """Minimum-norm inputs for the wrench, clamped at zero, with the residual."""
    return Allocator(A)(np.asarray(f_c, dtype=float), np.asarray(tau_c, dtype=float))
