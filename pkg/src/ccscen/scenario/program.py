"""Sampled convex programs and builders for the experiment families.

A :class:`ScenarioProgram` stores its constraints as stacked arrays:

* linear rows ``G x <= h``;
* quadratic forms ``x' Q_k x + g_k' x <= r_k`` with PSD ``Q_k``;
* nonnegativity flags per coordinate.

The objective is ``c' x`` or ``1/2 x' H x + c' x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DomainError

__all__ = [
    "ScenarioProgram",
    "build_single_linear",
    "build_joint_linear",
    "build_quadratic_objective",
    "build_quadratic_constraint",
    "psd_clip",
    "dump_program",
    "load_program",
]

_PSD_TOL = 1e-10


def psd_clip(mats, name="matrix"):
    """Symmetrize a stack of matrices; reject eigenvalues below -1e-10, clip the rest to >= 0."""
    m = np.asarray(mats, dtype=float)
    single = m.ndim == 2
    if single:
        m = m[None]
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    if m.shape[0] == 0:
        return m[0] if single else m
    w, v = np.linalg.eigh(m)
    scale = np.maximum(1.0, np.max(np.abs(w), axis=-1, keepdims=True))
    if np.any(w < -_PSD_TOL * scale):
        raise DomainError(f"{name} is not positive semidefinite")
    neg = np.any(w < 0, axis=-1)
    if np.any(neg):
        wc = np.clip(w[neg], 0.0, None)
        m[neg] = np.einsum("kij,kj,klj->kil", v[neg], wc, v[neg])
    return m[0] if single else m


@dataclass(frozen=True, eq=False)
class ScenarioProgram:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    H: np.ndarray | None = None
    Q: np.ndarray | None = None
    qg: np.ndarray | None = None
    qh: np.ndarray | None = None
    nonneg: np.ndarray | None = None
    n_quadratic: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        d = c.size
        G = np.asarray(self.G, dtype=float).reshape(-1, d)
        h = np.asarray(self.h, dtype=float).ravel()
        if h.size != G.shape[0]:
            raise DomainError("linear rows and right-hand sides differ in length")
        H = None if self.H is None else psd_clip(np.asarray(self.H, dtype=float).reshape(d, d), "H")
        if self.Q is None or len(self.Q) == 0:
            Q = np.zeros((0, d, d))
            qg = np.zeros((0, d))
            qh = np.zeros(0)
        else:
            Q = np.asarray(self.Q, dtype=float).reshape(-1, d, d)
            qg = np.asarray(self.qg, dtype=float).reshape(-1, d)
            qh = np.asarray(self.qh, dtype=float).ravel()
            if not (Q.shape[0] == qg.shape[0] == qh.size):
                raise DomainError("quadratic constraint arrays differ in length")
        nonneg = np.zeros(d, bool) if self.nonneg is None else np.asarray(self.nonneg, bool).ravel()
        if nonneg.size != d:
            raise DomainError("nonneg flags must match the decision dimension")
        for name, val in (("c", c), ("G", G), ("h", h), ("H", H), ("Q", Q), ("qg", qg),
                          ("qh", qh), ("nonneg", nonneg)):
            if val is not None:
                val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "n_quadratic", Q.shape[0])

    @property
    def dim(self) -> int:
        return self.c.size

    @property
    def n_linear(self) -> int:
        return self.G.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.n_linear + self.n_quadratic + int(self.nonneg.sum())

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        val = float(self.c @ x)
        if self.H is not None:
            val += 0.5 * float(x @ self.H @ x)
        return val

    def constraint_values(self, x) -> np.ndarray:
        """All f_i(x) (feasible iff every entry <= 0): linear, quadratic, then bounds."""
        x = np.asarray(x, dtype=float)
        lin = self.G @ x - self.h
        quad = np.einsum("i,kij,j->k", x, self.Q, x) + self.qg @ x - self.qh
        return np.concatenate([lin, quad, -x[self.nonneg]])

    def max_violation(self, x) -> float:
        vals = self.constraint_values(x)
        return float(vals.max()) if vals.size else -np.inf

    def with_constraints(self, other: "ScenarioProgram") -> "ScenarioProgram":
        """Union of the constraint sets of two programs sharing an objective."""
        return ScenarioProgram(
            self.c,
            np.vstack([self.G, other.G]),
            np.concatenate([self.h, other.h]),
            self.H,
            np.concatenate([self.Q, other.Q]),
            np.vstack([self.qg, other.qg]),
            np.concatenate([self.qh, other.qh]),
            self.nonneg | other.nonneg,
        )


def _as_samples(samples, d):
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        return np.zeros((0, d))
    s = s.reshape(-1, s.shape[-1]) if s.ndim > 1 else s.reshape(1, -1)
    if s.shape[1] != d:
        raise DomainError(f"sample dimension {s.shape[1]} does not match decision dimension {d}")
    return s


def build_single_linear(a, b: float, c, samples) -> ScenarioProgram:
    """Rows (a + xi_i)' x <= b for each sample, plus x >= 0; objective c' x."""
    a = np.asarray(a, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if a.size != c.size:
        raise DomainError("a and c must have equal length")
    s = _as_samples(samples, a.size)
    G = a + s
    return ScenarioProgram(c, G, np.full(G.shape[0], float(b)), nonneg=np.ones(a.size, bool))


def _joint_rows(A, b, mats):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != b.size:
        raise DomainError("A must be m x d with len(b) = m")
    m, d = A.shape
    mats = np.asarray(mats, dtype=float)
    if mats.size == 0:
        return np.zeros((0, d)), np.zeros(0)
    mats = mats.reshape(-1, m, d) if mats.shape[-2:] == (m, d) else None
    if mats is None:
        raise DomainError(f"each sample matrix must be {m} x {d}")
    G = (A[None] + mats).reshape(-1, d)
    return G, np.tile(b, mats.shape[0])


def build_joint_linear(A, b, c, sample_matrices) -> ScenarioProgram:
    """Rows (A + Xi_i) x <= b for each sample, plus x >= 0."""
    c = np.asarray(c, dtype=float).ravel()
    G, h = _joint_rows(A, b, sample_matrices)
    if np.asarray(A).shape[1] != c.size:
        raise DomainError("A and c dimensions differ")
    return ScenarioProgram(c, G, h, nonneg=np.ones(c.size, bool))


def build_quadratic_objective(H, A, b, c, sample_matrices) -> ScenarioProgram:
    """As :func:`build_joint_linear` with objective 1/2 x' H x + c' x."""
    base = build_joint_linear(A, b, c, sample_matrices)
    return ScenarioProgram(base.c, base.G, base.h, H=H, nonneg=base.nonneg)


def build_quadratic_constraint(a, b: float, c, Xis) -> ScenarioProgram:
    """One form x' Xi_i x + a' x <= b per sample, plus x >= 0."""
    a = np.asarray(a, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    d = a.size
    Xis = np.asarray(Xis, dtype=float)
    if Xis.size == 0:
        Xis = np.zeros((0, d, d))
    Xis = Xis.reshape(-1, d, d) if Xis.shape[-2:] == (d, d) else None
    if Xis is None:
        raise DomainError(f"each Xi must be {d} x {d}")
    Q = psd_clip(Xis, "Xi")
    k = Q.shape[0]
    return ScenarioProgram(
        c, np.zeros((0, d)), np.zeros(0), Q=Q, qg=np.tile(a, (k, 1)), qh=np.full(k, float(b)),
        nonneg=np.ones(d, bool),
    )


def _fmt(vals):
    return " ".join(repr(float(v)) for v in np.ravel(vals))


def dump_program(program: ScenarioProgram, path) -> None:
    """Write a line-oriented text dump (debugging aid, not a stable format)."""
    lines = [f"dim {program.dim}", f"objective {_fmt(program.c)}"]
    if program.H is not None:
        lines.append(f"hessian {_fmt(program.H)}")
    lines.append("nonneg " + " ".join(str(int(v)) for v in program.nonneg))
    for g, h in zip(program.G, program.h):
        lines.append(f"linear {_fmt(g)} {float(h)!r}")
    for q, g, h in zip(program.Q, program.qg, program.qh):
        lines.append(f"quadratic {_fmt(q)} {_fmt(g)} {float(h)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_program(path) -> ScenarioProgram:
    """Inverse of :func:`dump_program`."""
    d = None
    c = H = nonneg = None
    G, h, Q, qg, qh = [], [], [], [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag, vals = parts[0], parts[1:]
        try:
            if tag == "dim":
                d = int(vals[0])
            elif tag == "objective":
                c = np.array(vals, float)
            elif tag == "hessian":
                H = np.array(vals, float).reshape(d, d)
            elif tag == "nonneg":
                nonneg = np.array([int(v) for v in vals], bool)
            elif tag == "linear":
                row = np.array(vals, float)
                G.append(row[:d])
                h.append(row[d])
            elif tag == "quadratic":
                row = np.array(vals, float)
                Q.append(row[: d * d].reshape(d, d))
                qg.append(row[d * d: d * d + d])
                qh.append(row[-1])
            else:
                raise DomainError(f"unknown record {tag!r}")
        except (ValueError, IndexError, TypeError) as exc:
            raise DomainError(f"{path}:{lineno}: malformed line ({exc})") from None
    if d is None or c is None:
        raise DomainError(f"{path}: missing dim or objective")
    return ScenarioProgram(
        c, np.array(G).reshape(-1, d), np.array(h), H,
        np.array(Q).reshape(-1, d, d) if Q else None,
        np.array(qg) if Q else None, np.array(qh) if Q else None, nonneg,
    )
