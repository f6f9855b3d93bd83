"""Problem construction: data model, synthetic generators, file ingestion."""

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .prox import GroupPartition, PenaltyParams


def _matvec(mat, v):
    out = mat @ v
    return np.asarray(out).ravel()


@dataclass(eq=False)
class Problem:
    """One instance of the constrained sparse group square-root Lasso.

    minimize ||A x - b|| + p(x)  s.t.  B_E x = c_E,  B_I x >= c_I
    """

    A: object  # (m, n) dense array or scipy sparse
    b: np.ndarray
    groups: GroupPartition
    params: PenaltyParams
    BE: object = None  # (mE, n); may be empty
    cE: np.ndarray = None
    BI: object = None  # (mI, n); may be empty
    cI: np.ndarray = None
    name: str = "problem"

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise ValueError("b has wrong length")
        if self.BE is None:
            self.BE = np.zeros((0, n))
        if self.BI is None:
            self.BI = np.zeros((0, n))
        self.cE = np.zeros(self.BE.shape[0]) if self.cE is None else np.asarray(self.cE, float)
        self.cI = np.zeros(self.BI.shape[0]) if self.cI is None else np.asarray(self.cI, float)
        if self.BE.shape[1] != n or self.BI.shape[1] != n:
            raise ValueError("constraint matrix has wrong width")
        if self.cE.shape != (self.BE.shape[0],) or self.cI.shape != (self.BI.shape[0],):
            raise ValueError("constraint rhs has wrong length")
        if self.groups.n != n:
            raise ValueError("group partition does not cover the variables")
        self._N = None

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def mE(self):
        return self.BE.shape[0]

    @property
    def mI(self):
        return self.BI.shape[0]

    @property
    def m_hat(self):
        return self.m + self.mE + self.mI

    def with_params(self, params):
        out = replace(self, params=params)
        out._N = self._N
        return out

    def apply_A(self, x):
        return _matvec(self.A, x)

    def apply_constraints(self, x):
        return _matvec(self.BE, x), _matvec(self.BI, x)

    def adjoint_apply(self, u, vE, vI):
        """A* u + B_E* vE + B_I* vI."""
        out = _matvec(self.A.T, u)
        if self.mE:
            out = out + _matvec(self.BE.T, vE)
        if self.mI:
            out = out + _matvec(self.BI.T, vI)
        return out

    def stacked_apply(self, x):
        """N x with N = [A; B_E; B_I]."""
        bE, bI = self.apply_constraints(x)
        return np.concatenate([self.apply_A(x), bE, bI])

    def split(self, d):
        """Split a stacked (m + mE + mI)-vector into its three blocks."""
        m, mE = self.m, self.mE
        return d[:m], d[m : m + mE], d[m + mE :]

    def stacked_matrix(self):
        """Matrix representation of [A; B_E; B_I]; cached, column-sliceable."""
        if self._N is None:
            parts = [self.A, self.BE, self.BI]
            if any(sp.issparse(p) for p in parts):
                self._N = sp.csc_matrix(sp.vstack([sp.csr_matrix(p) for p in parts]))
            else:
                self._N = np.vstack(parts)
        return self._N

    def objective(self, x):
        from .prox import penalty_value

        return float(np.linalg.norm(self.apply_A(x) - self.b)) + penalty_value(
            x, self.groups, self.params
        )


@dataclass
class GeneratorSpec:
    """Synthetic instance description for the three constraint families.

    Family 1: 0/1 group-selector equality and inequality constraints.
    Family 2: equality constraints only.  Family 3: one sum-to-zero row.
    """

    family: int
    m: int
    n: int
    mE: int = 0
    mI: int = 0
    J: int = 1
    seed: int = 0
    active_group_fraction: float = 0.1
    active_entry_fraction: float = 0.2
    noise: float = 0.1

    def __post_init__(self):
        if self.family not in (1, 2, 3):
            raise ValueError("family must be 1, 2 or 3")
        if min(self.m, self.n, self.J) <= 0:
            raise ValueError("dimensions must be positive")
        if self.family == 2 and self.mI != 0:
            raise ValueError("family 2 has no inequality constraints")
        if self.family == 3 and (self.mE != 1 or self.mI != 0):
            raise ValueError("family 3 forces mE=1, mI=0")

    @classmethod
    def from_config(cls, path):
        """Parse a flat key=value config file."""
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key] = val
        ints = {"family", "m", "n", "mE", "mI", "J", "seed"}
        floats = {"active_group_fraction", "active_entry_fraction", "noise"}
        kwargs = {}
        for key, val in values.items():
            if key in ints:
                kwargs[key] = int(val)
            elif key in floats:
                kwargs[key] = float(val)
            else:
                raise ValueError(f"unknown generator key {key!r}")
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ValueError(f"{path}: {exc}") from exc


def _group_selector_rows(groups, pair_start, rows, n):
    """0/1 rows each selecting a disjoint pair of whole groups."""
    mat = sp.lil_matrix((rows, n))
    for i in range(rows):
        for g in (pair_start + 2 * i, pair_start + 2 * i + 1):
            mat[i, groups.indices[g]] = 1.0
    return sp.csr_matrix(mat)


def generate(spec):
    """Deterministic synthetic Problem for a GeneratorSpec."""
    rng = np.random.default_rng(spec.seed)
    m, n, J = spec.m, spec.n, spec.J
    groups = GroupPartition.contiguous(n, J)

    A = rng.standard_normal((m, n))
    n_active = max(1, math.ceil(spec.active_group_fraction * J))
    active = rng.choice(J, size=n_active, replace=False)
    x_true = np.zeros(n)
    for g in sorted(active):
        gi = groups.indices[g]
        k = max(1, int(round(spec.active_entry_fraction * gi.size)))
        chosen = rng.choice(gi, size=k, replace=False)
        x_true[chosen] = rng.standard_normal(k)
    b = A @ x_true + spec.noise * rng.standard_normal(m)

    if spec.family == 3:
        BE = np.ones((1, n))
        BI = np.zeros((0, n))
    else:
        if 2 * (spec.mE + spec.mI) > J:
            raise ValueError("not enough groups for the requested constraint rows")
        BE = _group_selector_rows(groups, 0, spec.mE, n)
        BI = _group_selector_rows(groups, 2 * spec.mE, spec.mI, n)

    name = f"rand{spec.family}-m{m}-n{n}-s{spec.seed}"
    return Problem(
        A=A,
        b=b,
        groups=groups,
        params=PenaltyParams(0.0, 0.0),
        BE=BE,
        BI=BI,
        name=name,
    )


def lambda_settings(A, b, gamma, setting):
    """Regularization pair from the scaled infinity norm of A* b.

    S1 splits the budget evenly; S2 uses the 0.8/0.2 split.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    base = float(np.max(np.abs(np.asarray(A.T @ b).ravel())))
    setting = setting.upper()
    if setting == "S1":
        return PenaltyParams(0.5 * gamma * base, 0.5 * gamma * base)
    if setting == "S2":
        return PenaltyParams(0.8 * gamma * base, 0.2 * gamma * base)
    raise ValueError("setting must be 'S1' or 'S2'")


def load_sparse_regression(path):
    """Read 'label index:value ...' lines (1-based indices) into (A, b)."""
    labels = []
    rows, cols, vals = [], [], []
    max_col = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
                if not np.isfinite(label):
                    raise ValueError("non-finite label")
                for tok in parts[1:]:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                    if idx < 1:
                        raise ValueError("feature indices are 1-based")
                    if not np.isfinite(val):
                        raise ValueError("non-finite value")
                    rows.append(len(labels))
                    cols.append(idx - 1)
                    vals.append(val)
                    max_col = max(max_col, idx)
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            labels.append(label)
    if not labels:
        raise ValueError(f"{path}: empty dataset")
    A = sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(labels), max_col), dtype=float
    )
    return sp.csc_matrix(A), np.asarray(labels)


def save_sparse_regression(path, A, b):
    """Write (A, b) in the 1-based 'label index:value' text format."""
    A = sp.csr_matrix(A)
    with open(path, "w") as fh:
        for i in range(A.shape[0]):
            start, end = A.indptr[i], A.indptr[i + 1]
            feats = " ".join(
                f"{j + 1}:{float(v)!r}"
                for j, v in zip(A.indices[start:end], A.data[start:end])
            )
            fh.write(f"{float(b[i])!r} {feats}".rstrip() + "\n")
