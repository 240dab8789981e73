"""Laplace spectrum of a meshed surface.

Piecewise-linear finite elements on the secant triangles: stiffness by
cotangent weights of the Euclidean comparison triangle (same three side
lengths), mass lumped as one third of the hyperbolic triangle area per
corner.  The generalized problem S f = lambda M f is solved by a block
preconditioned conjugate-gradient eigensolver working on the
mass-symmetrized operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse import coo_matrix, csc_matrix, diags
from scipy.sparse.linalg import spilu

from .errors import ConvergenceError, InvalidInputError, MeshQualityError

#: Secant triangles with an angle below this are rejected.
MIN_SECANT_ANGLE = 1e-6


@dataclass
class SpectralPair:
    """Stiffness matrix and lumped (diagonal) mass vector."""

    stiffness: "csc_matrix"
    mass: np.ndarray
    vertex_ids: np.ndarray | None = None   # set for submesh problems

    @property
    def n(self):
        return len(self.mass)


def local_cot_weights(a, b, c):
    """Half-cotangent weights of the Euclidean triangle with sides
    ``a``, ``b``, ``c`` (array-valued).

    Returns weights for the sides in the order (c, a, b), i.e. indexed
    like the corner opposite each side comes last.
    """
    a, b, c = np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)
    # angle at the corner opposite each side, via the law of cosines
    def angle(opp, x, y):
        cosv = (x * x + y * y - opp * opp) / (2.0 * x * y)
        return np.arccos(np.clip(cosv, -1.0, 1.0))

    alpha = angle(a, b, c)
    beta = angle(b, c, a)
    gamma = angle(c, a, b)
    angles = np.stack([alpha, beta, gamma])
    if np.any(angles < MIN_SECANT_ANGLE):
        raise MeshQualityError(
            f"secant triangle angle below {MIN_SECANT_ANGLE} rad; refine differently")
    return 0.5 / np.tan(gamma), 0.5 / np.tan(alpha), 0.5 / np.tan(beta)


def assemble_fem(mesh, tri_ids=None) -> SpectralPair:
    """Assemble the stiffness/mass pair, optionally on a triangle subset.

    A subset gets natural (free) boundary conditions and its pair
    carries ``vertex_ids`` mapping local rows to mesh vertices.
    """
    if tri_ids is None:
        tris = mesh.tris
        lengths = mesh.tri_lengths
        areas = mesh.tri_areas
        n = mesh.n_vertices
        vertex_ids = None
    else:
        tri_ids = np.asarray(tri_ids, dtype=np.int64)
        if len(tri_ids) == 0:
            raise InvalidInputError("empty triangle subset")
        tris_g = mesh.tris[tri_ids]
        vertex_ids = np.unique(tris_g)
        remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
        remap[vertex_ids] = np.arange(len(vertex_ids))
        tris = remap[tris_g]
        lengths = mesh.tri_lengths[tri_ids]
        areas = mesh.tri_areas[tri_ids]
        n = len(vertex_ids)

    # side j joins corners j and j+1; weight w_j uses the opposite corner
    c, a, b = lengths[:, 0], lengths[:, 1], lengths[:, 2]
    w0, w1, w2 = local_cot_weights(a, b, c)
    rows, cols, vals = [], [], []
    for j, w in ((0, w0), (1, w1), (2, w2)):
        u = tris[:, j]
        v = tris[:, (j + 1) % 3]
        rows.extend([u, v, u, v])
        cols.extend([u, v, v, u])
        vals.extend([w, w, -w, -w])
    S = coo_matrix((np.concatenate(vals),
                    (np.concatenate(rows), np.concatenate(cols))),
                   shape=(n, n)).tocsc()
    mass = np.zeros(n)
    third = areas / 3.0
    for j in range(3):
        np.add.at(mass, tris[:, j], third)
    return SpectralPair(stiffness=S, mass=mass, vertex_ids=vertex_ids)


@dataclass
class Spectrum:
    """Eigenvalues sorted ascending with relative residual norms.

    ``vectors`` holds the matching eigenfunctions (columns, original
    vertex space, M-orthonormal).
    """

    values: np.ndarray
    residuals: np.ndarray
    vectors: np.ndarray | None = None

    def write_csv(self, fh):
        fh.write("index,eigenvalue,residual\n")
        for i, (v, r) in enumerate(zip(self.values, self.residuals)):
            fh.write(f"{i},{float(v)!r},{float(r)!r}\n")


def rayleigh(pair: SpectralPair, f) -> float:
    """Rayleigh quotient of one function."""
    f = np.asarray(f, float)
    denom = float(f @ (pair.mass * f))
    if denom <= 0.0:
        raise InvalidInputError("function has zero mass norm")
    return float(f @ (pair.stiffness @ f)) / denom


def minimax_upper_bound(pair: SpectralPair, funcs) -> float:
    """Worst Rayleigh quotient over ``l`` mass-orthogonal test functions.

    The value bounds the ``(l-1)``-th eigenvalue of the pencil from
    above (eigenvalues indexed from 0).  Columns with a nonzero mass
    cross-term are rejected; disjoint supports satisfy this for free.
    """
    B = np.asarray(funcs, float)
    if B.ndim != 2 or B.shape[0] != pair.n or B.shape[1] < 1:
        raise InvalidInputError(f"need (n, l) test functions, got shape {B.shape}")
    Ms = B.T @ (pair.mass[:, None] * B)
    norms = np.diag(Ms)
    if np.any(norms <= 0.0):
        raise InvalidInputError("test function with zero mass-norm")
    cross = np.abs(Ms - np.diag(norms))
    limit = 1e-10 * np.sqrt(np.outer(norms, norms))
    if np.any(cross > limit):
        i, j = np.unravel_index(int(np.argmax(cross - limit)), cross.shape)
        raise InvalidInputError(
            f"test functions {i} and {j} are not mass-orthogonal "
            f"(cross-term {Ms[i, j]:.3e})")
    quots = np.einsum("ij,ij->j", B, pair.stiffness @ B) / norms
    return float(np.max(quots))


# ---------------------------------------------------------------------------
# block eigensolver


def _orthonormalize(B, drop_tol_factor=None):
    """Orthonormal basis of the column span, dropping null directions."""
    G = B.T @ B
    w, V = sla.eigh(G)
    cut = w[-1] * len(w) * (drop_tol_factor or np.finfo(float).eps)
    keep = w > max(cut, 0.0)
    if not np.any(keep):
        return B[:, :0]
    return B @ (V[:, keep] / np.sqrt(w[keep]))


def _dense_lowest(pair: SpectralPair, m: int) -> Spectrum:
    S = pair.stiffness.toarray()
    S = 0.5 * (S + S.T)
    d = np.sqrt(pair.mass)
    H = S / d[:, None] / d[None, :]
    vals, vecs = sla.eigh(H)
    vals = vals[:m]
    scale_floor = _residual_floor(vals)
    res = np.empty(m)
    for i in range(m):
        y = vecs[:, i]
        r = H @ y - vals[i] * y
        res[i] = np.linalg.norm(r) / max(vals[i], scale_floor)
    return Spectrum(values=vals, residuals=res, vectors=vecs[:, :m] / d[:, None])


def _residual_floor(theta):
    """Scale used for relative residuals of near-zero eigenvalues: the
    smallest clearly positive Ritz value, or 1 if there is none."""
    theta = np.asarray(theta)
    pos = theta[theta > 1e3 * np.finfo(float).eps * max(1.0, abs(float(theta[-1])))]
    return float(pos[0]) if len(pos) else 1.0


def lowest_eigs(pair: SpectralPair, m: int, *, tol: float = 1e-8,
                maxiter: int = 10000, seed: int = 0,
                shift: float = 1.0) -> Spectrum:
    """Lowest ``m`` eigenvalues of S f = lambda M f.

    Locally optimal block preconditioned conjugate gradients on the
    symmetrized operator, with an incomplete-LU preconditioner built
    from S + shift*M.  Deterministic for a fixed seed.  Raises
    ConvergenceError (carrying the residuals) if tolerance is not met
    within ``maxiter`` iterations.
    """
    n = pair.n
    if not (1 <= m < n):
        raise InvalidInputError(f"need 1 <= m < n vertices, got m={m}, n={n}")
    if np.any(pair.mass <= 0.0):
        raise InvalidInputError("mass vector must be positive")
    block = min(m + 3, n - 1)
    if n < max(64, 4 * block):
        return _dense_lowest(pair, m)

    d = np.sqrt(pair.mass)
    S = pair.stiffness

    def op(Y):
        return (S @ (Y / d[:, None])) / d[:, None]

    ilu = spilu(csc_matrix(S + shift * diags(pair.mass)))

    def precond(R):
        return ilu.solve(R * d[:, None]) * d[:, None]

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, block))
    X[:, 0] = d                     # exact kernel direction of a closed surface
    X = _orthonormalize(X)
    theta = None
    P = np.zeros((n, 0))
    res = None
    for _ in range(maxiter):
        AX = op(X)
        A = X.T @ AX
        theta, C = sla.eigh(0.5 * (A + A.T))
        X = X @ C
        AX = AX @ C
        R = AX - X * theta[None, :]
        floor = _residual_floor(theta)
        res = np.linalg.norm(R, axis=0) / np.maximum(theta, floor)
        if np.all(res[:m] <= tol):
            return Spectrum(values=theta[:m].copy(), residuals=res[:m].copy(),
                            vectors=X[:, :m] / d[:, None])
        W = precond(R)
        W -= X @ (X.T @ W)
        W = _orthonormalize(W)
        if W.shape[1] == 0:
            W = rng.standard_normal((n, block))
            W -= X @ (X.T @ W)
            W = _orthonormalize(W)
        if P.shape[1]:
            P -= X @ (X.T @ P)
            P -= W @ (W.T @ P)
            P = _orthonormalize(P)
        nx = X.shape[1]
        B = np.concatenate([X, W, P], axis=1)
        A = B.T @ op(B)
        _, C = sla.eigh(0.5 * (A + A.T))
        k = min(block, B.shape[1])
        X = B @ C[:, :k]
        P = B[:, nx:] @ C[nx:, :k]
    raise ConvergenceError(
        f"eigensolver did not reach tol={tol} within {maxiter} iterations "
        f"(worst residual {float(np.max(res[:m])):.3e})",
        residuals=res[:m].copy())
