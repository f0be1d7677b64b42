"""Standard-form semidefinite programs and two solvers for them.

A problem is stated over a symmetric linear matrix pencil::

    maximize    c . v
    subject to  G(v) = A0 + sum_m v[m] A[m]  is positive semidefinite
                C v <= d,   E v = f

and is converted internally to a standard-form pair::

    minimize <Cm, X>  s.t.  <A_i, X> = b_i,  X in S^s_+ x R^l_+

Two conversions exist. The default one eliminates the equality rows and lets
the remaining free coordinates of ``v`` play the role of ``y`` (so ``G(v)`` is
the dual slack and the Schur complement has one row per free variable). The
fallback one takes ``X = G(v)`` itself as the primal matrix, with one
equality per pencil entry that ``v`` does not control freely.

Two backends solve the result: a dense primal-dual interior-point method
(HKM direction, Mehrotra predictor-corrector) and an adapter to the SCS
splitting solver for problems whose Schur complement would be too large to
factor repeatedly. ``backend="auto"`` picks by Schur-complement size.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical-failure"

DEFAULT_SIZE_CEILING = 350
DEFAULT_IPM_SCHUR_LIMIT = 3000
TARGET_MARGIN = 0.5


class SdpError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    gap: float = 1e-7
    feasibility: float = 1e-8
    max_iters: int = 200
    # first-order backend: SCS residual target and iteration cap
    first_order_eps: float = 1e-7
    first_order_max_iters: int = 100000


@dataclass(frozen=True)
class SdpProblem:
    """Pencil-form SDP. Matrices are stored as upper-triangle triplets."""

    size: int
    n_vars: int
    a0: tuple[np.ndarray, np.ndarray, np.ndarray]
    coeffs: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    c: np.ndarray
    ineq: sp.csr_matrix
    ineq_rhs: np.ndarray
    eq: sp.csr_matrix
    eq_rhs: np.ndarray

    def __post_init__(self):
        s, M = self.size, self.n_vars
        r0, c0, _ = self.a0
        m, r, cc, _ = self.coeffs
        for rows, cols in ((r0, c0), (r, cc)):
            if len(rows) and (rows.min() < 0 or cols.max() >= s or np.any(rows > cols)):
                raise SdpError("matrix triplets must be upper-triangular and inside the matrix")
        if len(m) and (m.min() < 0 or m.max() >= M):
            raise SdpError("coefficient triplet references a variable outside 0..n_vars-1")
        if self.c.shape != (M,):
            raise SdpError("objective length must equal n_vars")
        if self.ineq.shape[1] != M or self.eq.shape[1] != M:
            raise SdpError("constraint rows must have n_vars columns")
        if self.ineq.shape[0] != len(self.ineq_rhs) or self.eq.shape[0] != len(self.eq_rhs):
            raise SdpError("constraint rows and right-hand sides differ in length")

    @classmethod
    def from_triplets(cls, size, n_vars, a0, coeffs, c, ineq=((), ()), eq=((), ())):
        """Build from triplets; ``ineq``/``eq`` are ``(rows, rhs)`` with each row a
        ``{var: coef}`` mapping or already a sparse matrix."""

        def arr(x, dtype):
            return np.asarray(x, dtype=dtype).reshape(-1)

        def upper(rows, cols):
            rows, cols = arr(rows, np.int64), arr(cols, np.int64)
            return np.minimum(rows, cols), np.maximum(rows, cols)

        r0, c0 = upper(a0[0], a0[1])
        m, r1, c1 = arr(coeffs[0], np.int64), *upper(coeffs[1], coeffs[2])

        def rows_to_csr(rows, rhs):
            if sp.issparse(rows):
                return sp.csr_matrix(rows, dtype=float), arr(rhs, float)
            data, ri, ci = [], [], []
            for k, row in enumerate(rows):
                for var, coef in row.items():
                    ri.append(k)
                    ci.append(var)
                    data.append(coef)
            mat = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n_vars))
            mat.sum_duplicates()
            return mat, arr(rhs, float)

        ineq_m, ineq_r = rows_to_csr(*ineq)
        eq_m, eq_r = rows_to_csr(*eq)
        return cls(
            size=int(size),
            n_vars=int(n_vars),
            a0=(r0, c0, arr(a0[2], float)),
            coeffs=(m, r1, c1, arr(coeffs[3], float)),
            c=arr(c, float),
            ineq=ineq_m,
            ineq_rhs=ineq_r,
            eq=eq_m,
            eq_rhs=eq_r,
        )

    def gamma(self, v: np.ndarray) -> np.ndarray:
        """Evaluate the pencil at ``v`` as a dense symmetric matrix."""
        s = self.size
        upper = np.zeros((s, s))
        r0, c0, x0 = self.a0
        np.add.at(upper, (r0, c0), x0)
        m, r, c, x = self.coeffs
        np.add.at(upper, (r, c), x * np.asarray(v)[m])
        return upper + np.triu(upper, 1).T

    def dump(self, path: str | Path) -> None:
        """Write the sparse-triplet text format (see README)."""
        lines = ["# mgtheta-sdp 1", f"size {self.size}", f"vars {self.n_vars}"]
        lines += [f"A0 {r} {c} {x:.17g}" for r, c, x in zip(*self.a0)]
        lines += [f"A {m} {r} {c} {x:.17g}" for m, r, c, x in zip(*self.coeffs)]
        lines += [f"c {m} {x:.17g}" for m, x in enumerate(self.c) if x != 0]
        for tag, mat, rhs in (("ineq", self.ineq, self.ineq_rhs), ("eq", self.eq, self.eq_rhs)):
            coo = mat.tocoo()
            lines += [f"{tag} {k} {m} {x:.17g}" for k, m, x in zip(coo.row, coo.col, coo.data)]
            lines += [f"{tag}rhs {k} {x:.17g}" for k, x in enumerate(rhs)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> SdpProblem:
        size = n_vars = None
        a0, coeffs, c = [[], [], []], [[], [], [], []], {}
        rows = {"ineq": ([], [], []), "eq": ([], [], [])}
        rhs: dict[str, dict[int, float]] = {"ineq": {}, "eq": {}}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            tok = raw.split()
            if not tok or tok[0].startswith("#"):
                continue
            tag = tok[0]
            if tag == "size":
                size = int(tok[1])
            elif tag == "vars":
                n_vars = int(tok[1])
            elif tag == "A0":
                for k in range(3):
                    a0[k].append(float(tok[k + 1]) if k == 2 else int(tok[k + 1]))
            elif tag == "A":
                for k in range(4):
                    coeffs[k].append(float(tok[k + 1]) if k == 3 else int(tok[k + 1]))
            elif tag == "c":
                c[int(tok[1])] = float(tok[2])
            elif tag in rows:
                rows[tag][0].append(int(tok[1]))
                rows[tag][1].append(int(tok[2]))
                rows[tag][2].append(float(tok[3]))
            elif tag in ("ineqrhs", "eqrhs"):
                rhs[tag[:-3]][int(tok[1])] = float(tok[2])
            else:
                raise SdpError(f"unknown record {tag!r}")
        if size is None or n_vars is None:
            raise SdpError("dump lacks size/vars records")
        cvec = np.zeros(n_vars)
        for m, x in c.items():
            cvec[m] = x

        def mat(tag):
            k = len(rhs[tag])
            r, m, x = rows[tag]
            out = sp.csr_matrix((x, (r, m)), shape=(k, n_vars))
            return out, np.array([rhs[tag][i] for i in range(k)])

        return cls.from_triplets(size, n_vars, a0, coeffs, cvec, mat("ineq"), mat("eq"))


@dataclass
class SdpSolution:
    status: str
    objective: float
    v: np.ndarray
    gamma: np.ndarray
    min_eigenvalue: float
    max_violation: float
    relative_gap: float
    iterations: int
    backend: str
    wall_time: float
    dual_objective: float = float("nan")
    message: str = ""
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


# -- standard form -------------------------------------------------------------


@dataclass
class StandardForm:
    """``min c.x`` s.t. ``A x = b``, ``x = (upper(X), x_lp)``, ``X`` PSD, ``x_lp >= 0``.

    ``x`` lists the upper-triangle entries of the PSD block (row-major) then
    the LP block. ``to_v`` maps ``x`` back to pencil variables:
    ``v = to_v @ x + v_offset``; ``obj_offset`` turns ``c.x`` into the pencil
    objective via ``pencil_obj = -(c.x) + obj_offset``.
    """

    s: int
    l: int
    A: sp.csr_matrix
    b: np.ndarray
    c: np.ndarray
    to_v: sp.csr_matrix
    v_offset: np.ndarray
    obj_offset: float
    iu: np.ndarray
    ju: np.ndarray

    @property
    def n_ent(self) -> int:
        return len(self.iu)

    @property
    def p(self) -> int:
        return self.A.shape[0]

    def offdiag_weight(self) -> np.ndarray:
        """Inner-product weights: 1 on diagonal/LP coordinates, 2 off-diagonal."""
        w = np.where(self.iu == self.ju, 1.0, 2.0)
        return np.concatenate([w, np.ones(self.l)])

    def unpack(self, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates (entry values) -> (symmetric matrix, LP vector)."""
        s = self.s
        X = np.zeros((s, s))
        X[self.iu, self.ju] = coords[: self.n_ent]
        X[self.ju, self.iu] = coords[: self.n_ent]
        return X, coords[self.n_ent:]

    def pack(self, X: np.ndarray, x_lp: np.ndarray) -> np.ndarray:
        return np.concatenate([X[self.iu, self.ju], x_lp])

    def adjoint_matrix(self, coef: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Matrix of the linear functional ``coef . x``: off-diagonal halves."""
        half = np.where(self.iu == self.ju, 1.0, 0.5)
        return self.unpack(np.concatenate([coef[: self.n_ent] * half, coef[self.n_ent:]]))


def _entry_index(s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(s)
    index = np.full((s, s), -1, dtype=np.int64)
    index[iu, ju] = np.arange(len(iu))
    return iu, ju, index


def to_standard_form(prob: SdpProblem) -> StandardForm:
    s, M = prob.size, prob.n_vars
    iu, ju, index = _entry_index(s)
    n_ent = len(iu)
    weight = np.where(iu == ju, 1.0, 2.0)

    r0, c0, x0 = prob.a0
    a0 = np.zeros(n_ent)
    np.add.at(a0, index[r0, c0], x0)
    m, r, cc, x = prob.coeffs
    P = sp.csr_matrix((x, (index[r, cc], m)), shape=(n_ent, M))
    P.sum_duplicates()
    P.eliminate_zeros()

    per_entry = np.diff(P.indptr)
    if np.any(per_entry > 1):
        return _standard_form_dense(prob, P, a0, iu, ju, weight)

    Pc = P.tocsc()
    norms = np.asarray(Pc.multiply(Pc).T @ weight).ravel()
    free_vars = np.flatnonzero(norms == 0)
    free_pos = {int(mv): k for k, mv in enumerate(free_vars)}
    n_free = len(free_vars)

    # v = G (x - a0) on supported variables
    G = sp.csr_matrix(Pc.multiply(weight[:, None]).T)
    scale = np.where(norms > 0, 1.0 / np.where(norms > 0, norms, 1.0), 0.0)
    G = sp.diags(scale) @ G
    G.eliminate_zeros()

    n_ineq, n_eq = prob.ineq.shape[0], prob.eq.shape[0]
    l = 2 * n_free + n_ineq
    n_x = n_ent + l

    def free_block(mat: sp.csr_matrix) -> sp.csr_matrix:
        """Columns of ``mat`` on free variables, as +/- LP coordinates."""
        if not n_free:
            return sp.csr_matrix((mat.shape[0], 2 * n_free))
        sub = mat[:, free_vars]
        return sp.hstack([sub, -sub]).tocsr()

    rows = []
    rhs = []

    fixed = np.flatnonzero(per_entry == 0)
    rows.append(sp.csr_matrix((np.ones(len(fixed)), (np.arange(len(fixed)), fixed)), shape=(len(fixed), n_x)))
    rhs.append(a0[fixed])

    # ties: every support entry proportional to the first one of its variable
    ti, tj, tv, trhs = [], [], [], []
    k = 0
    for mv in range(M):
        lo, hi = Pc.indptr[mv], Pc.indptr[mv + 1]
        if hi - lo < 2:
            continue
        ents, us = Pc.indices[lo:hi], Pc.data[lo:hi]
        e1, u1 = ents[0], us[0]
        for e, u in zip(ents[1:], us[1:]):
            ratio = u / u1
            ti += [k, k]
            tj += [e, e1]
            tv += [1.0, -ratio]
            trhs.append(a0[e] - ratio * a0[e1])
            k += 1
    rows.append(sp.csr_matrix((tv, (ti, tj)), shape=(k, n_x)))
    rhs.append(np.asarray(trhs, dtype=float))

    def lift(mat: sp.csr_matrix) -> sp.csr_matrix:
        return sp.hstack([mat @ G, free_block(mat)]).tocsr()

    if n_ineq:
        body = lift(prob.ineq)
        slack = sp.csr_matrix(
            (np.ones(n_ineq), (np.arange(n_ineq), np.arange(n_ineq))), shape=(n_ineq, n_ineq)
        )
        rows.append(sp.hstack([body[:, : n_ent + 2 * n_free], slack]).tocsr())
        rhs.append(prob.ineq_rhs + prob.ineq @ (G @ a0))
    if n_eq:
        body = lift(prob.eq)
        rows.append(sp.hstack([body, sp.csr_matrix((n_eq, n_ineq))]).tocsr())
        rhs.append(prob.eq_rhs + prob.eq @ (G @ a0))

    A = sp.vstack([r_.tocsr() if r_.shape[1] == n_x else sp.hstack([r_, sp.csr_matrix((r_.shape[0], n_x - r_.shape[1]))]) for r_ in rows]).tocsr()
    b = np.concatenate(rhs)

    cvec = np.zeros(n_x)
    cvec[:n_ent] = -(G.T @ prob.c)
    if n_free:
        cf = prob.c[free_vars]
        cvec[n_ent:n_ent + n_free] = -cf
        cvec[n_ent + n_free:n_ent + 2 * n_free] = cf
    obj_offset = -float(prob.c @ (G @ a0))

    to_v = sp.hstack([G, sp.csr_matrix((M, l))]).tolil()
    for mv, kf in free_pos.items():
        to_v[mv, n_ent + kf] = 1.0
        to_v[mv, n_ent + n_free + kf] = -1.0
    return StandardForm(
        s=s, l=l, A=A, b=b, c=cvec, to_v=to_v.tocsr(), v_offset=-(G @ a0),
        obj_offset=obj_offset, iu=iu, ju=ju,
    )


def _standard_form_dense(prob, P, a0, iu, ju, weight) -> StandardForm:
    """General pencils (overlapping supports) via an explicit null-space basis."""
    n_ent, M = P.shape
    if n_ent * max(M, 1) > 4e7:
        raise SdpError("pencil with overlapping coefficient supports is too large to convert")
    Pd = P.toarray() * np.sqrt(weight)[:, None]
    U, sing, Vt = np.linalg.svd(Pd, full_matrices=True)
    rank = int(np.sum(sing > sing.max(initial=0.0) * 1e-12)) if sing.size else 0
    if rank < M:
        raise SdpError("pencil coefficient matrices are linearly dependent")
    N = U[:, rank:] / np.sqrt(weight)[:, None] * weight[:, None]
    # N^T (x - a0) = 0 in the weighted inner product; v = pinv(P) (x - a0)
    pinv = np.linalg.pinv(Pd) * np.sqrt(weight)[None, :]
    n_ineq, n_eq = prob.ineq.shape[0], prob.eq.shape[0]
    l = n_ineq
    n_x = n_ent + l
    Nt = sp.csr_matrix(N.T / np.sqrt(weight)[None, :] * np.sqrt(weight)[None, :])
    rows = [sp.hstack([Nt, sp.csr_matrix((Nt.shape[0], l))])]
    rhs = [Nt @ a0]
    G = sp.csr_matrix(pinv)
    if n_ineq:
        rows.append(sp.hstack([prob.ineq @ G, sp.eye(n_ineq)]))
        rhs.append(prob.ineq_rhs + prob.ineq @ (G @ a0))
    if n_eq:
        rows.append(sp.hstack([prob.eq @ G, sp.csr_matrix((n_eq, l))]))
        rhs.append(prob.eq_rhs + prob.eq @ (G @ a0))
    A = sp.vstack(rows).tocsr()
    A.data[np.abs(A.data) < 1e-14] = 0
    A.eliminate_zeros()
    cvec = np.zeros(n_x)
    cvec[:n_ent] = -(G.T @ prob.c)
    return StandardForm(
        s=prob.size, l=l, A=A, b=np.concatenate(rhs), c=cvec,
        to_v=sp.hstack([G, sp.csr_matrix((M, l))]).tocsr(), v_offset=-(G @ a0),
        obj_offset=-float(prob.c @ (G @ a0)), iu=iu, ju=ju,
    )


class _Infeasible(Exception):
    pass


def _eliminate_equalities(prob: SdpProblem) -> tuple[sp.csr_matrix, np.ndarray]:
    """Affine parametrization ``v = N u + v0`` of ``{v : E v = f}``."""
    M, k = prob.n_vars, prob.eq.shape[0]
    if not k:
        return sp.identity(M, format="csr"), np.zeros(M)
    E, f = prob.eq.toarray(), prob.eq_rhs
    Q, R, piv = sla.qr(E, pivoting=True, mode="economic")
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > 1e-10 * max(d.max(initial=0.0), 1.0)))
    qf = Q.T @ f
    if np.any(np.abs(qf[rank:]) > 1e-9 * (1 + np.abs(f).max(initial=0.0))):
        raise _Infeasible("equality rows are inconsistent")
    basic, free = piv[:rank], np.sort(piv[rank:])
    R11 = R[:rank, :rank]
    cols = {int(c): k for k, c in enumerate(piv)}
    R12 = R[:rank, [cols[int(c)] for c in free]]
    sol = sla.solve_triangular(R11, np.column_stack([qf[:rank], R12]), check_finite=False)
    N = np.zeros((M, len(free)))
    N[free, np.arange(len(free))] = 1.0
    N[basic] = -sol[:, 1:]
    N[np.abs(N) < 1e-15] = 0.0
    v0 = np.zeros(M)
    v0[basic] = sol[:, 0]
    return sp.csr_matrix(N), v0


def to_dual_form(prob: SdpProblem) -> StandardForm:
    """Pose the pencil program as the dual of a standard-form SDP.

    With ``v = N u + v0`` absorbing the equality rows, the pencil ``G(v)`` is
    the dual slack matrix and ``d - C v`` the LP dual slack, so interior
    iterates are exactly feasible for the original program once the dual
    residual vanishes. One primal constraint per remaining variable.
    """
    s, M = prob.size, prob.n_vars
    iu, ju, index = _entry_index(s)
    n_ent = len(iu)
    weight = np.where(iu == ju, 1.0, 2.0)
    r0, c0, x0 = prob.a0
    a0 = np.zeros(n_ent)
    np.add.at(a0, index[r0, c0], x0)
    m, r, cc, x = prob.coeffs
    P = sp.csr_matrix((x, (index[r, cc], m)), shape=(n_ent, M))
    P.sum_duplicates()

    N, v0 = _eliminate_equalities(prob)
    K = (P @ N).tocsr()
    a0 = a0 + P @ v0
    ineq = (prob.ineq @ N).tocsr()
    d = prob.ineq_rhs - prob.ineq @ v0
    l = ineq.shape[0]
    A = sp.hstack([-(K.T @ sp.diags(weight)), ineq.T]).tocsr()
    A.eliminate_zeros()
    cvec = np.concatenate([weight * a0, d])
    return StandardForm(
        s=s, l=l, A=A, b=N.T @ prob.c, c=cvec, to_v=N, v_offset=v0,
        obj_offset=float(prob.c @ v0), iu=iu, ju=ju,
    )


# -- shared helpers ------------------------------------------------------------


class _Ops:
    """Linear maps of a standard form in matrix/vector terms."""

    def __init__(self, sf: StandardForm):
        self.sf = sf
        self.A = sf.A
        self.At = sf.A.T.tocsr()
        n = sf.n_ent
        self.A_psd = sf.A[:, :n].tocsr()
        self.A_lp = sf.A[:, n:].tocsr()
        self.half = np.where(sf.iu == sf.ju, 1.0, 0.5)
        self.C, self.c_lp = sf.adjoint_matrix(sf.c)

    def apply(self, X: np.ndarray, x_lp: np.ndarray) -> np.ndarray:
        return self.A_psd @ X[self.sf.iu, self.sf.ju] + self.A_lp @ x_lp

    def adjoint(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.sf.adjoint_matrix(self.At @ y)


def _inner(X, x, Z, z) -> float:
    return float(np.sum(X * Z) + x @ z)


def _max_step(X: np.ndarray, dX: np.ndarray, x: np.ndarray, dx: np.ndarray) -> float:
    step = np.inf
    if X.size:
        try:
            L = np.linalg.cholesky(X)
        except np.linalg.LinAlgError:
            return 0.0
        Li = sla.solve_triangular(L, np.eye(len(X)), lower=True)
        lam = np.linalg.eigvalsh(Li @ dX @ Li.T)[0]
        if lam < 0:
            step = -1.0 / lam
    neg = dx < 0
    if np.any(neg):
        step = min(step, float(np.min(-x[neg] / dx[neg])))
    return step


# -- interior-point backend ----------------------------------------------------


class _Schur:
    """Dense HKM Schur complement ``M_ij = <A_i, X A_j Z^-1>`` (+ LP part)."""

    def __init__(self, sf: StandardForm, ops: _Ops):
        A = ops.A_psd.tocoo()
        iu, ju = sf.iu, sf.ju
        r, c = iu[A.col], ju[A.col]
        diag = r == c
        # full (nonsymmetric) entry list of every constraint matrix
        self.con = np.concatenate([A.row[diag], A.row[~diag], A.row[~diag]])
        self.r = np.concatenate([r[diag], r[~diag], c[~diag]])
        self.c = np.concatenate([c[diag], c[~diag], r[~diag]])
        self.val = np.concatenate([A.data[diag], A.data[~diag] / 2, A.data[~diag] / 2])
        order = np.argsort(self.con, kind="stable")
        self.con, self.r, self.c, self.val = (a[order] for a in (self.con, self.r, self.c, self.val))
        N = len(self.con)
        self.p = sf.p
        self.K = sp.csr_matrix((np.ones(N), (self.con, np.arange(N))), shape=(sf.p, N))
        self.A_lp = ops.A_lp

    def build(self, X, Zi, x, z) -> np.ndarray:
        N = len(self.con)
        M = np.zeros((self.p, self.p))
        chunk = max(1, int(4e6 // max(N, 1)))
        Xr = X[self.c]
        for lo in range(0, N, chunk):
            hi = min(N, lo + chunk)
            # T[a, b] = X[c_a, r_b] * Zi[c_b, r_a]
            T = Xr[:, self.r[lo:hi]] * Zi[self.c[lo:hi]][:, self.r].T
            T *= self.val[:, None] * self.val[None, lo:hi]
            M += (self.K @ T) @ self.K[:, lo:hi].T
        if x.size:
            D = sp.diags(x / z)
            M += (self.A_lp @ D @ self.A_lp.T).toarray()
        return M


def _solve_ipm(sf: StandardForm, tol: Tolerances) -> dict:
    ops = _Ops(sf)
    s, l, p = sf.s, sf.l, sf.p
    n_cone = s + l
    b, C, c_lp = sf.b, ops.C, ops.c_lp
    normA = np.sqrt(np.asarray(sf.A.multiply(sf.A).sum(axis=1)).ravel())
    normC = np.sqrt(np.sum(C * C) + c_lp @ c_lp)
    xi = max(10.0, np.sqrt(n_cone), n_cone * float(np.max((1 + np.abs(b)) / (1 + normA), initial=0)))
    eta = max(10.0, np.sqrt(n_cone), float(normA.max(initial=0)), normC)
    X, x = xi * np.eye(s), xi * np.ones(l)
    Z, z = eta * np.eye(s), eta * np.ones(l)
    y = np.zeros(p)
    schur = _Schur(sf, ops)
    nb, nC = 1 + np.linalg.norm(b), 1 + normC
    status, message = NUMERICAL_FAILURE, "iteration limit reached"
    best = None
    history = []
    it = 0
    for it in range(1, tol.max_iters + 1):
        Aty, aty = ops.adjoint(y)
        rp = b - ops.apply(X, x)
        Rd, rd = C - Z - Aty, c_lp - z - aty
        pobj = float(np.sum(C * X) + c_lp @ x)
        dobj = float(b @ y)
        mu = _inner(X, x, Z, z) / n_cone
        pinf = np.linalg.norm(rp) / nb
        dinf = np.sqrt(np.sum(Rd * Rd) + rd @ rd) / nC
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        history.append((pobj, dobj, pinf, dinf, gap))
        score = max(pinf / tol.feasibility, dinf / tol.feasibility, gap / tol.gap)
        if best is None or score < best[0]:
            best = (score, X.copy(), x.copy(), y.copy(), Z.copy(), z.copy(), it)
        elif it - best[6] > 15:
            message = "no progress in 15 iterations"
            break
        # internal targets keep a margin below the reported tolerances, which
        # are measured on the recovered pencil variables
        if pinf <= TARGET_MARGIN * tol.feasibility and dinf <= TARGET_MARGIN * tol.feasibility \
                and gap <= TARGET_MARGIN * tol.gap:
            status, message = OPTIMAL, "converged"
            break
        # infeasibility certificates from diverging iterates
        if dobj > 0 and np.sqrt(np.sum((Aty + Z) ** 2) + np.sum((aty + z) ** 2)) / dobj < 1e-8 and pinf > tol.feasibility:
            status, message = INFEASIBLE, "dual ray certifies primal infeasibility"
            break
        if pobj < 0 and np.linalg.norm(ops.apply(X, x)) / -pobj < 1e-8 and dinf > tol.feasibility:
            status, message = UNBOUNDED, "primal ray certifies unboundedness"
            break
        if max(np.abs(X).max(initial=0), np.abs(x).max(initial=0)) > 1e12:
            status, message = UNBOUNDED, "primal iterates diverge"
            break
        if max(np.abs(y).max(initial=0), np.abs(Z).max(initial=0), np.abs(z).max(initial=0)) > 1e12:
            status, message = INFEASIBLE, "dual iterates diverge"
            break
        try:
            Lz = np.linalg.cholesky(Z)
        except np.linalg.LinAlgError:
            message = "dual slack lost definiteness"
            break
        Lzi = sla.solve_triangular(Lz, np.eye(s), lower=True)
        Zi = Lzi.T @ Lzi
        Mat = schur.build(X, Zi, x, z)
        Mat = (Mat + Mat.T) / 2
        try:
            fac = sla.cho_factor(Mat, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            reg = 1e-12 * max(1.0, float(np.abs(np.diag(Mat)).max(initial=1)))
            try:
                fac = sla.cho_factor(Mat + reg * np.eye(p), lower=True, check_finite=False)
            except np.linalg.LinAlgError:
                message = "Schur complement is not positive definite"
                break

        def direction(RcZi, rc):
            # RcZi = Rc Z^-1 for the PSD block; rc the LP complementarity residual
            XRZ = X @ Rd @ Zi
            rhs = rp - ops.apply((RcZi + RcZi.T) / 2, rc / z) + ops.apply((XRZ + XRZ.T) / 2, x * rd / z)
            dy = sla.cho_solve(fac, rhs, check_finite=False)
            # iterative refinement against the exact operator; the assembled
            # Schur matrix loses digits near degenerate optima
            for _ in range(2):
                Atd, atd = ops.adjoint(dy)
                T = X @ Atd @ Zi
                res = rhs - ops.apply((T + T.T) / 2, x * atd / z)
                dy = dy + sla.cho_solve(fac, res, check_finite=False)
            Atd, atd = ops.adjoint(dy)
            dZ, dz = Rd - Atd, rd - atd
            dX = RcZi - X @ dZ @ Zi
            dX = (dX + dX.T) / 2
            dx = (rc - x * dz) / z
            return dX, dx, dy, dZ, dz

        dXa, dxa, dya, dZa, dza = direction(-X, -x * z)
        ap = min(1.0, _max_step(X, dXa, x, dxa))
        ad = min(1.0, _max_step(Z, dZa, z, dza))
        mu_aff = _inner(X + ap * dXa, x + ap * dxa, Z + ad * dZa, z + ad * dza) / n_cone
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        RcZi = sigma * mu * Zi - X - dXa @ dZa @ Zi
        rc = sigma * mu - x * z - dxa * dza
        dX, dx, dy, dZ, dz = direction(RcZi, rc)
        ap = _max_step(X, dX, x, dx)
        ad = _max_step(Z, dZ, z, dz)
        tau = 0.98 if it > 1 else 0.9
        ap, ad = min(1.0, tau * ap), min(1.0, tau * ad)
        history[-1] += (ap, ad)
        X, x = X + ap * dX, x + ap * dx
        y = y + ad * dy
        Z, z = Z + ad * dZ, z + ad * dz
        X, Z = (X + X.T) / 2, (Z + Z.T) / 2
        if it > 8 and ap < 1e-8 and ad < 1e-8:
            message = "step lengths collapsed"
            break
    k = len(history)
    if status == NUMERICAL_FAILURE and best is not None:
        _, X, x, y, Z, z, k = best
    return dict(X=X, x=x, y=y, Z=Z, z=z, status=status, message=message, iterations=it,
                history=history, residuals=history[k - 1][2:4] if history else (np.inf, np.inf))


# -- SCS adapter ---------------------------------------------------------------


def _svec_index(s: int, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Position and scale of entries in the lower-triangular column-major svec."""
    i, j = np.maximum(rows, cols), np.minimum(rows, cols)
    return j * s - j * (j - 1) // 2 + (i - j), np.where(i == j, 1.0, np.sqrt(2.0))


def _solve_scs(prob: SdpProblem, tol: Tolerances) -> dict:
    """First-order splitting solver on the pencil directly.

    Cone rows: equality rows (zero cone), inequality rows (nonnegative cone),
    then ``svec(A0 + sum v_m A_m)`` in the PSD cone.
    """
    import scs

    s, M = prob.size, prob.n_vars
    m, r, c, val = prob.coeffs
    pos, scale = _svec_index(s, r, c)
    n_svec = s * (s + 1) // 2
    A_psd = sp.csc_matrix((-val * scale, (pos, m)), shape=(n_svec, M))
    r0, c0, x0 = prob.a0
    pos0, scale0 = _svec_index(s, r0, c0)
    b_psd = np.zeros(n_svec)
    np.add.at(b_psd, pos0, x0 * scale0)
    A = sp.vstack([prob.eq, prob.ineq, A_psd]).tocsc()
    b = np.concatenate([prob.eq_rhs, prob.ineq_rhs, b_psd])
    cone = {"z": prob.eq.shape[0], "l": prob.ineq.shape[0], "s": [s]}
    solver = scs.SCS(
        {"A": A, "b": b, "c": -prob.c}, cone,
        eps_abs=tol.first_order_eps, eps_rel=tol.first_order_eps,
        eps_infeas=1e-9, max_iters=tol.first_order_max_iters, verbose=False,
    )
    out = solver.solve()
    info = out["info"]
    code = info["status"]
    if code in ("solved", "solved_inaccurate"):
        status, message = OPTIMAL, code
    elif code.startswith("infeasible"):
        status, message = INFEASIBLE, code
    elif code.startswith("unbounded"):
        status, message = UNBOUNDED, code
    else:
        status, message = NUMERICAL_FAILURE, code
    return dict(v=np.asarray(out["x"]), dual=-float(info["dobj"]), status=status,
                message=message, iterations=int(info["iter"]), history=[])


# -- front end -----------------------------------------------------------------


def schur_size(prob: SdpProblem) -> int:
    """Order of the interior-point Schur complement for ``prob``.

    This is the number of free pencil variables left after eliminating the
    equality rows (the first formulation the interior-point backend tries).
    """
    try:
        return to_dual_form(prob).p
    except _Infeasible:
        return 0


def choose_backend(prob: SdpProblem, ipm_schur_limit: int = DEFAULT_IPM_SCHUR_LIMIT) -> str:
    return "ipm" if schur_size(prob) <= ipm_schur_limit else "scs"


def _run_ipm(prob: SdpProblem, sf: StandardForm, tol: Tolerances, pencil: bool) -> dict:
    """Run the interior-point method on one formulation and map back to ``v``."""
    raw = _solve_ipm(sf, tol)
    if pencil:
        # the pencil program is the dual of the standard form being solved
        swap = {INFEASIBLE: UNBOUNDED, UNBOUNDED: INFEASIBLE}
        raw["status"] = swap.get(raw["status"], raw["status"])
        raw["v"] = sf.to_v @ raw["y"] + sf.v_offset
        raw["dual"] = float(sf.c @ sf.pack(raw["X"], raw["x"])) + sf.obj_offset
        raw["certified"] = raw["residuals"][0] <= tol.feasibility
    else:
        raw["v"] = sf.to_v @ sf.pack(raw["X"], raw["x"]) + sf.v_offset
        raw["dual"] = -float(sf.b @ raw["y"]) + sf.obj_offset
        raw["certified"] = raw["residuals"][1] <= tol.feasibility
    raw["schur_size"] = sf.p
    raw["form"] = "pencil" if pencil else "entry"
    return raw


def _finish(prob: SdpProblem, raw: dict, tol: Tolerances, backend: str, t0: float) -> SdpSolution:
    """Recompute diagnostics on the recovered point and settle the status."""
    v = raw["v"]
    G = prob.gamma(v)
    min_eig = float(np.linalg.eigvalsh(G)[0]) if prob.size else 0.0
    viol = 0.0
    if prob.ineq.shape[0]:
        viol = max(viol, float(np.max(prob.ineq @ v - prob.ineq_rhs)))
    if prob.eq.shape[0]:
        viol = max(viol, float(np.max(np.abs(prob.eq @ v - prob.eq_rhs))))
    obj = float(prob.c @ v)
    dual_obj = raw["dual"]
    rel_gap = abs(obj - dual_obj) / (1 + abs(obj) + abs(dual_obj))
    status, message = raw["status"], raw["message"]
    if status == OPTIMAL:
        problems = []
        if min_eig < -tol.feasibility:
            problems.append(f"min eigenvalue {min_eig:.2e}")
        if viol > tol.feasibility:
            problems.append(f"constraint violation {viol:.2e}")
        if rel_gap > tol.gap:
            problems.append(f"relative gap {rel_gap:.2e}")
        if problems:
            status = NUMERICAL_FAILURE
            message = "tolerances not met: " + ", ".join(problems)
    elif status == NUMERICAL_FAILURE and raw.get("certified") \
            and min_eig >= -tol.feasibility and viol <= tol.feasibility and rel_gap <= tol.gap:
        # the best interior-point iterate already meets the tolerances
        status, message = OPTIMAL, f"best iterate accepted ({message})"
    elif status == INFEASIBLE:
        obj = -np.inf
    elif status == UNBOUNDED:
        obj = np.inf
    info = {"history": raw["history"]}
    if "schur_size" in raw:
        info["schur_size"] = raw["schur_size"]
        info["form"] = raw["form"]
    return SdpSolution(
        status=status,
        objective=obj,
        v=v,
        gamma=G,
        min_eigenvalue=min_eig,
        max_violation=max(viol, 0.0),
        relative_gap=rel_gap,
        iterations=raw["iterations"],
        backend=backend,
        wall_time=time.perf_counter() - t0,
        dual_objective=dual_obj,
        message=message,
        info=info,
    )


def _trivial_infeasible(prob: SdpProblem, message: str, t0: float) -> SdpSolution:
    v = np.zeros(prob.n_vars)
    return SdpSolution(
        status=INFEASIBLE, objective=-np.inf, v=v, gamma=prob.gamma(v),
        min_eigenvalue=float("nan"), max_violation=float("nan"), relative_gap=float("nan"),
        iterations=0, backend="ipm", wall_time=time.perf_counter() - t0, message=message,
    )


def solve(
    prob: SdpProblem,
    tol: Tolerances | None = None,
    backend: str = "auto",
    size_ceiling: int = DEFAULT_SIZE_CEILING,
    ipm_schur_limit: int = DEFAULT_IPM_SCHUR_LIMIT,
) -> SdpSolution:
    """Maximize ``c . v`` over the pencil; see the module docstring.

    ``status == "optimal"`` is only reported when the recovered point meets
    ``tol`` (minimum eigenvalue, constraint violation and relative gap);
    otherwise the point is returned with status ``numerical-failure``.

    The interior-point backend first treats ``v`` (after eliminating the
    equality rows) as the dual variable of a standard-form program, which
    keeps the Schur complement small. Programs whose feasible pencils have
    no interior (for instance when equalities pin a principal minor to be
    singular) can defeat that iteration; it then retries on the entry-wise
    formulation over ``X = G(v)``.
    """
    tol = tol or Tolerances()
    if prob.size > size_ceiling:
        raise SdpError(f"matrix size {prob.size} exceeds the ceiling {size_ceiling}")
    if backend not in ("auto", "ipm", "scs"):
        raise SdpError(f"unknown backend {backend!r}")
    t0 = time.perf_counter()
    if backend == "scs":
        return _finish(prob, _solve_scs(prob, tol), tol, "scs", t0)
    try:
        sf = to_dual_form(prob)
    except _Infeasible as exc:
        return _trivial_infeasible(prob, str(exc), t0)
    if backend == "auto" and sf.p > ipm_schur_limit:
        return _finish(prob, _solve_scs(prob, tol), tol, "scs", t0)
    first = _finish(prob, _run_ipm(prob, sf, tol, pencil=True), tol, "ipm", t0)
    if first.status != NUMERICAL_FAILURE or prob.size == 0:
        return first
    log.debug("pencil formulation failed (%s); retrying entry-wise", first.message)
    sf = to_standard_form(prob)
    if backend == "auto" and sf.p > ipm_schur_limit:
        return first
    second = _finish(prob, _run_ipm(prob, sf, tol, pencil=False), tol, "ipm", t0)
    if second.status == NUMERICAL_FAILURE:
        second.message = f"{first.message}; entry-wise retry: {second.message}"
    second.iterations += first.iterations
    return second
