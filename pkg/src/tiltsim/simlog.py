"""Simulation logs, CSV serialization and tracking metrics."""

from __future__ import annotations

import io
import os
import tempfile
from dataclasses import dataclass

import numpy as np

CSV_FMT = "%.17g"


@dataclass(eq=False)
class SimLog:
    t: np.ndarray  # (N,)
    p: np.ndarray  # (N, 3)
    R: np.ndarray  # (N, 3, 3)
    v: np.ndarray  # (N, 3)
    omega: np.ndarray  # (N, 3)
    e_p: np.ndarray  # (N, 3)
    e_R: np.ndarray  # (N, 3)
    u: np.ndarray  # (N, n)
    omega_rotor: np.ndarray  # (N, n)
    omega_cmd: np.ndarray  # (N, n)
    clamp_active: np.ndarray  # (N,) bool

    @classmethod
    def empty(cls, rows: int, n: int) -> "SimLog":
        return cls(
            t=np.zeros(rows),
            p=np.zeros((rows, 3)),
            R=np.zeros((rows, 3, 3)),
            v=np.zeros((rows, 3)),
            omega=np.zeros((rows, 3)),
            e_p=np.zeros((rows, 3)),
            e_R=np.zeros((rows, 3)),
            u=np.zeros((rows, n)),
            omega_rotor=np.zeros((rows, n)),
            omega_cmd=np.zeros((rows, n)),
            clamp_active=np.zeros(rows, dtype=bool),
        )

    @property
    def rows(self) -> int:
        return self.t.shape[0]

    @property
    def n(self) -> int:
        return self.u.shape[1]

    def columns(self) -> list[str]:
        return csv_header(self.n)

    def to_matrix(self) -> np.ndarray:
        N = self.rows
        return np.hstack(
            [
                self.t[:, None],
                self.p,
                self.R.reshape(N, 9),
                self.v,
                self.omega,
                self.e_p,
                self.e_R,
                self.u,
                self.omega_rotor,
                self.omega_cmd,
                self.clamp_active[:, None].astype(float),
            ]
        )

    @classmethod
    def from_matrix(cls, X: np.ndarray, n: int) -> "SimLog":
        N = X.shape[0]
        if X.shape[1] != 1 + 3 + 9 + 3 * 4 + 3 * n + 1:
            raise ValueError("column count does not match rotor count")
        cuts = np.cumsum([0, 1, 3, 9, 3, 3, 3, 3, n, n, n, 1])
        s = [X[:, cuts[i] : cuts[i + 1]] for i in range(len(cuts) - 1)]
        return cls(
            t=s[0][:, 0].copy(),
            p=s[1].copy(),
            R=s[2].reshape(N, 3, 3).copy(),
            v=s[3].copy(),
            omega=s[4].copy(),
            e_p=s[5].copy(),
            e_R=s[6].copy(),
            u=s[7].copy(),
            omega_rotor=s[8].copy(),
            omega_cmd=s[9].copy(),
            clamp_active=s[10][:, 0] != 0,
        )

    def equals(self, other: "SimLog") -> bool:
        return self.n == other.n and np.array_equal(self.to_matrix(), other.to_matrix())


def csv_header(n: int) -> list[str]:
    cols = ["t"]
    cols += [f"p_{i}" for i in range(1, 4)]
    cols += [f"R_{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    for name in ("v", "omega", "e_p", "e_R"):
        cols += [f"{name}_{i}" for i in range(1, 4)]
    for name in ("u", "omega_rotor", "omega_cmd"):
        cols += [f"{name}_{i}" for i in range(1, n + 1)]
    cols.append("clamp_active")
    return cols


def log_to_csv_text(log: SimLog) -> str:
    X = log.to_matrix()
    buf = io.StringIO()
    buf.write(",".join(log.columns()) + "\n")
    ncols = X.shape[1]
    fmt = ",".join([CSV_FMT] * (ncols - 1) + ["%d"]) + "\n"
    for row in X:
        buf.write(fmt % (*row[:-1], int(row[-1])))
    return buf.getvalue()


def atomic_write_text(path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(log: SimLog, path):
    atomic_write_text(path, log_to_csv_text(log))


def read_csv(path) -> SimLog:
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        n = sum(1 for h in header if h.startswith("u_"))
        if header != csv_header(n):
            raise ValueError(f"{path}: unexpected CSV header")
        X = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
    return SimLog.from_matrix(X, n)


# ---------------------------------------------------------------------------
# metrics

AXES = ("e_p_1", "e_p_2", "e_p_3", "e_R_1", "e_R_2", "e_R_3")


def mean_abs_errors(log: SimLog) -> dict[str, float]:
    """Mean of |e| over all rows, per component."""
    ep = np.mean(np.abs(log.e_p), axis=0)
    eR = np.mean(np.abs(log.e_R), axis=0)
    return dict(zip(AXES, [*map(float, ep), *map(float, eR)]))


@dataclass
class ComparisonReport:
    t: np.ndarray
    mean_abs: dict[str, dict[str, float]]  # axis -> {analytical, physics, difference}
    delta_omega: np.ndarray  # (N, n), physics minus analytical
    max_abs_delta_omega: np.ndarray  # (n,)

    def max_abs_delta_omega_outside(self, centers, half_width: float) -> np.ndarray:
        """Per-rotor max |delta omega| excluding ``|t - c| <= half_width`` windows."""
        mask = np.ones(self.t.shape, dtype=bool)
        for c in centers:
            mask &= np.abs(self.t - c) > half_width
        if not np.any(mask):
            return np.zeros(self.delta_omega.shape[1])
        return np.max(np.abs(self.delta_omega[mask]), axis=0)

    def to_dict(self) -> dict:
        return {
            "mean_abs_errors": {k: dict(v) for k, v in self.mean_abs.items()},
            "max_abs_delta_omega": self.max_abs_delta_omega.tolist(),
        }


def compute_metrics(log: SimLog, other: SimLog | None = None):
    """Mean absolute errors of one log, or a full comparison of a
    (analytical, physics) pair sharing the same time grid."""
    if other is None:
        return mean_abs_errors(log)
    if log.rows != other.rows or not np.array_equal(log.t, other.t):
        raise ValueError("logs do not share a time grid")
    if log.n != other.n:
        raise ValueError("logs have different rotor counts")
    a, p = mean_abs_errors(log), mean_abs_errors(other)
    table = {
        k: {"analytical": a[k], "physics": p[k], "difference": abs(p[k] - a[k])}
        for k in AXES
    }
    dw = other.omega_rotor - log.omega_rotor
    return ComparisonReport(
        t=log.t.copy(),
        mean_abs=table,
        delta_omega=dw,
        max_abs_delta_omega=np.max(np.abs(dw), axis=0),
    )


def delta_omega_csv_text(report: ComparisonReport) -> str:
    n = report.delta_omega.shape[1]
    buf = io.StringIO()
    buf.write(",".join(["t"] + [f"delta_omega_{i}" for i in range(1, n + 1)]) + "\n")
    fmt = ",".join([CSV_FMT] * (n + 1)) + "\n"
    for t, row in zip(report.t, report.delta_omega):
        buf.write(fmt % (t, *row))
    return buf.getvalue()
