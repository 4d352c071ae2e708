"""Symplectic linear algebra over R^{2n} with the standard structures.

Coordinates are ordered (x_1 .. x_n, y_1 .. y_n) and identified with C^n
through z_j = x_j + i y_j.  The standard structures in this basis are

    omega = [[0, I], [-I, 0]],    j = [[0, -I], [I, 0]],    g = identity,

so that g(X, Y) = omega(X, j Y) and j acts as multiplication by i.  All
subspaces are stored as matrices with g-orthonormal columns because frames,
not projectors, are the working objects of every downstream computation.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache
from math import isclose
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .config import DEFAULT, Tolerances, rng
from .errors import (
    ClassificationError,
    ContinuityLossError,
    DegenerateInputError,
)

__all__ = [
    "SymplecticSpace",
    "Subspace",
    "CoisotropicSubspace",
    "AdaptedFrame",
    "standard_space",
    "complex_coords",
    "real_coords",
    "realify",
    "principal_angles",
    "spans_equal",
    "omega_pairing",
    "symplectic_complement",
    "classify_coisotropic",
    "adapted_frame",
    "grassmannian_dim",
    "random_unitary",
    "random_coisotropic",
    "standard_model",
    "measured_grassmannian_dim",
]


@lru_cache(maxsize=32)
def _standard_omega(n: int) -> np.ndarray:
    o = np.zeros((2 * n, 2 * n))
    o[:n, n:] = np.eye(n)
    o[n:, :n] = -np.eye(n)
    o.setflags(write=False)
    return o


@lru_cache(maxsize=32)
def _standard_j(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    j.setflags(write=False)
    return j


@dataclasses.dataclass(frozen=True)
class SymplecticSpace:
    """(R^{2n}, omega, j, g) with omega antisymmetric, j^2 = -I and
    g = omega(., j .) positive definite."""

    n: int
    omega: np.ndarray
    j: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("complex dimension must be positive")
        d = 2 * self.n
        if self.omega.shape != (d, d):
            raise ValueError("omega has the wrong shape")
        if np.max(np.abs(self.omega + self.omega.T)) > 1e-12:
            raise ValueError("omega is not antisymmetric")
        if abs(np.linalg.det(self.omega)) < 1e-12:
            raise ValueError("omega is degenerate")
        if np.max(np.abs(self.j @ self.j + np.eye(d))) > 1e-12:
            raise ValueError("j*j != -identity")
        # compatibility: g = omega . j symmetric positive definite
        g = self.omega @ self.j
        if np.max(np.abs(g - self.g)) > 1e-12 or np.max(np.abs(g - g.T)) > 1e-12:
            raise ValueError("g != omega(., j.) or not symmetric")
        if np.min(np.linalg.eigvalsh(g)) <= 0:
            raise ValueError("g is not positive definite")
        # j preserves omega
        if np.max(np.abs(self.j.T @ self.omega @ self.j - self.omega)) > 1e-12:
            raise ValueError("j does not preserve omega")

    @property
    def dim(self) -> int:
        return 2 * self.n


def standard_space(n: int) -> SymplecticSpace:
    """The standard (R^{2n}, omega_0, j, g=identity)."""
    return SymplecticSpace(
        n=n,
        omega=_standard_omega(n),
        j=_standard_j(n),
        g=np.eye(2 * n),
    )


def complex_coords(v: np.ndarray) -> np.ndarray:
    """Real 2n-vectors (or 2n x m column stacks) as complex n-vectors."""
    v = np.asarray(v)
    n = v.shape[0] // 2
    return v[:n] + 1j * v[n:]


def real_coords(z: np.ndarray) -> np.ndarray:
    """Inverse of :func:`complex_coords`."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=0)


def realify(u: np.ndarray) -> np.ndarray:
    """Real 2n x 2n matrix of a complex-linear map acting on C^n."""
    u = np.asarray(u, dtype=complex)
    a, b = u.real, u.imag
    return np.block([[a, -b], [b, a]])


def _mgs(cols: np.ndarray, min_norm: float) -> np.ndarray:
    """Modified Gram-Schmidt in fixed column order, two passes for stability.

    Raises ContinuityLossError when a column drops below ``min_norm``.
    """
    q = np.array(cols, dtype=float)
    m = q.shape[1]
    for i in range(m):
        v = q[:, i]
        for _ in range(2):
            for k in range(i):
                v = v - (q[:, k] @ v) * q[:, k]
        nv = np.linalg.norm(v)
        if nv < min_norm:
            raise ContinuityLossError(
                f"column {i} projected to norm {nv:.3e} < {min_norm:.1e}"
            )
        q[:, i] = v / nv
    return q


def _mgs_complex(cols: np.ndarray, min_norm: float) -> np.ndarray:
    q = np.array(cols, dtype=complex)
    m = q.shape[1]
    for i in range(m):
        v = q[:, i]
        for _ in range(2):
            for k in range(i):
                v = v - (np.conj(q[:, k]) @ v) * q[:, k]
        nv = np.linalg.norm(v)
        if nv < min_norm:
            raise ContinuityLossError(
                f"column {i} projected to norm {nv:.3e} < {min_norm:.1e}"
            )
        q[:, i] = v / nv
    return q


def _canonical_signs(cols: np.ndarray) -> np.ndarray:
    """Deterministic sign choice: largest-magnitude entry made positive."""
    q = np.array(cols)
    for i in range(q.shape[1]):
        idx = int(np.argmax(np.abs(q[:, i])))
        if q[idx, i] < 0:
            q[:, i] = -q[:, i]
    return q


def _canonical_phases(cols: np.ndarray) -> np.ndarray:
    """Deterministic phase choice: largest-magnitude entry made real positive."""
    q = np.array(cols, dtype=complex)
    for i in range(q.shape[1]):
        idx = int(np.argmax(np.abs(q[:, i])))
        ph = q[idx, i]
        if abs(ph) > 0:
            q[:, i] = q[:, i] * (np.conj(ph) / abs(ph))
    return q


@dataclasses.dataclass(frozen=True)
class Subspace:
    """A linear subspace of R^{2n}, held as a 2n x m matrix with
    g-orthonormal columns.  Equality is equality of spans."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] % 2 != 0:
            raise ValueError("basis must be a 2n x m matrix")
        gram = b.T @ b
        if b.shape[1] and np.max(np.abs(gram - np.eye(b.shape[1]))) > DEFAULT.orthonormality:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def from_spanning(cls, cols: np.ndarray, min_norm: float = 1e-12) -> "Subspace":
        return cls(_mgs(np.asarray(cols, dtype=float), min_norm))

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ v)

    def contains(self, other: "Subspace", tol: float = DEFAULT.subspace_equality) -> bool:
        if other.dim == 0:
            return True
        resid = other.basis - self.project(other.basis)
        return float(np.max(np.linalg.norm(resid, axis=0))) < tol


def principal_angles(a: Subspace, b: Subspace) -> np.ndarray:
    """Principal angles between equal-dimensional subspaces, ascending
    (descending cosines), each in [0, pi/2]."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} != {b.dim}")
    if a.dim == 0:
        return np.zeros(0)
    ang = scipy.linalg.subspace_angles(a.basis, b.basis)
    return np.sort(ang)


def spans_equal(a: Subspace, b: Subspace, tol: float = DEFAULT.subspace_equality) -> bool:
    if a.dim != b.dim:
        return False
    if a.dim == 0:
        return True
    return float(np.max(principal_angles(a, b))) < tol


def omega_pairing(space: SymplecticSpace, a: Subspace, b: Subspace) -> np.ndarray:
    return a.basis.T @ space.omega @ b.basis


def symplectic_complement(
    space: SymplecticSpace, c: Subspace, tol: Tolerances = DEFAULT
) -> Subspace:
    """{v : omega(v, c) = 0 for all c in C}, of dimension 2n - dim C.

    Computed as the null space of the m x 2n pairing matrix via SVD with
    singular value cutoff ``tol.svd_cutoff``.
    """
    if c.dim == 0:
        return Subspace(np.eye(space.dim))
    pairing = c.basis.T @ space.omega
    u, s, vh = np.linalg.svd(pairing)
    if s.size:
        band = (s > tol.svd_cutoff) & (s < tol.svd_gap * s[0])
        if np.any(band):
            raise DegenerateInputError(
                "singular values straddle the rank cutoff: "
                f"{s[band]} against largest {s[0]:.3e}"
            )
    rank = int(np.sum(s > tol.svd_cutoff))
    kernel = vh[rank:].T
    return Subspace(_canonical_signs(kernel))


@dataclasses.dataclass(frozen=True)
class CoisotropicSubspace:
    """A certified coisotropic subspace C = H_C + kernel of dimension n + k.

    ``kernel`` is the symplectic complement C^omega (dimension n - k) and
    ``h_part`` the j-invariant g-orthogonal complement of the kernel inside
    C (dimension 2k).
    """

    space: Subspace
    k: int
    kernel: Subspace
    h_part: Subspace

    @property
    def n(self) -> int:
        return self.space.ambient_dim // 2

    @property
    def dim(self) -> int:
        return self.space.dim


def classify_coisotropic(
    space: SymplecticSpace, c: Subspace, tol: Tolerances = DEFAULT
) -> CoisotropicSubspace:
    """Certify C as coisotropic, returning its canonical splitting.

    Succeeds iff the symplectic complement of C lies inside C within the
    angle tolerance; otherwise raises ClassificationError carrying the
    violating pair.
    """
    n = space.n
    if c.dim < n:
        raise ClassificationError(
            f"dimension {c.dim} < n = {n}: coisotropic subspaces need dim >= n"
        )
    kernel = symplectic_complement(space, c, tol)
    if kernel.dim:
        resid = kernel.basis - c.project(kernel.basis)
        resid_norms = np.linalg.norm(resid, axis=0)
        worst = int(np.argmax(resid_norms))
        if resid_norms[worst] > tol.subspace_equality:
            angle = float(np.arcsin(min(1.0, resid_norms[worst])))
            raise ClassificationError(
                f"not coisotropic: kernel direction leaves the subspace "
                f"by angle {angle:.3e}",
                witness=(kernel.basis[:, worst], resid[:, worst], angle),
            )
    k = c.dim - n
    # h_part: g-orthogonal complement of the kernel inside C
    if k == 0:
        h_part = Subspace(np.zeros((space.dim, 0)))
    else:
        proj = c.basis - kernel.basis @ (kernel.basis.T @ c.basis)
        u, s, _ = np.linalg.svd(proj, full_matrices=False)
        h_part = Subspace(_canonical_signs(u[:, : 2 * k]))
        jh = space.j @ h_part.basis
        resid = jh - h_part.project(jh)
        if np.max(np.linalg.norm(resid, axis=0)) > tol.subspace_equality:
            raise ClassificationError(
                "h_part failed the j-invariance check",
                witness=(h_part.basis[:, 0], resid[:, 0], None),
            )
    return CoisotropicSubspace(space=c, k=k, kernel=kernel, h_part=h_part)


@dataclasses.dataclass(frozen=True)
class AdaptedFrame:
    """A unitary Darboux frame (e_1..e_n, f_1..f_n) with f_i = j e_i.

    Columns e_1..e_k frame the j-invariant part H_C, columns e_{k+1}..e_n
    the kernel C^omega; the index split is recorded in ``k``.
    """

    k: int
    e: np.ndarray
    f: np.ndarray

    @property
    def n(self) -> int:
        return self.e.shape[1]

    def unitary(self) -> np.ndarray:
        """The frame as a unitary n x n complex matrix (columns = e_i)."""
        return complex_coords(self.e)

    def tangent_basis(self) -> np.ndarray:
        """Columns (e_1..e_n, f_1..f_k): a basis of the coisotropic subspace."""
        return np.concatenate([self.e, self.f[:, : self.k]], axis=1)

    def kernel_vectors(self) -> np.ndarray:
        return self.e[:, self.k:]

    def h_vectors(self) -> np.ndarray:
        return np.concatenate([self.e[:, : self.k], self.f[:, : self.k]], axis=1)


def _validate_frame(space: SymplecticSpace, c: CoisotropicSubspace,
                    frame: AdaptedFrame, tol: Tolerances) -> None:
    full = np.concatenate([frame.e, frame.f], axis=1)
    if np.max(np.abs(full.T @ full - np.eye(space.dim))) > 10 * tol.orthonormality:
        raise ContinuityLossError("frame is not orthonormal")
    if np.max(np.abs(frame.f - space.j @ frame.e)) > tol.frame_j:
        raise ContinuityLossError("f != j e beyond tolerance")
    pair = full.T @ space.omega @ full
    want = np.block([[np.zeros((space.n,) * 2), np.eye(space.n)],
                     [-np.eye(space.n), np.zeros((space.n,) * 2)]])
    if np.max(np.abs(pair - want)) > tol.darboux:
        raise ContinuityLossError("Darboux relations violated")
    tangent = frame.tangent_basis()
    resid = tangent - c.space.project(tangent)
    if np.max(np.linalg.norm(resid, axis=0)) > tol.subspace_equality:
        raise ContinuityLossError("frame does not span the target subspace")
    if c.kernel.dim:
        kv = frame.kernel_vectors()
        resid = kv - c.kernel.project(kv)
        if np.max(np.linalg.norm(resid, axis=0)) > tol.subspace_equality:
            raise ContinuityLossError("frame kernel block does not span the kernel")


def adapted_frame(
    space: SymplecticSpace,
    c: CoisotropicSubspace,
    hint: Optional[AdaptedFrame] = None,
    tol: Tolerances = DEFAULT,
) -> AdaptedFrame:
    """An adapted unitary Darboux frame for C.

    Without a hint the construction is deterministic (SVD bases with
    canonical signs).  With a hint, each hint column is projected onto the
    required span and re-orthonormalized by modified Gram-Schmidt, which is
    the discrete transport used for loop continuity; a projection below
    ``tol.hint_min_norm`` raises ContinuityLossError.
    """
    n, k = space.n, c.k
    # kernel block, real orthonormal
    if c.kernel.dim:
        if hint is not None:
            cols = c.kernel.project(hint.kernel_vectors())
            ker = _mgs(cols, tol.hint_min_norm)
        else:
            ker = c.kernel.basis
    else:
        ker = np.zeros((space.dim, 0))
    # H block, unitary basis of the j-invariant part viewed as C^k
    if k:
        zc = complex_coords(c.h_part.basis)  # n x 2k complex, rank k
        u, s, _ = np.linalg.svd(zc)
        hbasis = u[:, :k]
        if hint is not None:
            pr = hbasis @ (np.conj(hbasis.T) @ complex_coords(hint.e[:, :k]))
            hcols = _mgs_complex(pr, tol.hint_min_norm)
        else:
            hcols = _canonical_phases(hbasis)
        e_h = real_coords(hcols)
    else:
        e_h = np.zeros((space.dim, 0))
    e = np.concatenate([e_h, ker], axis=1)
    frame = AdaptedFrame(k=k, e=e, f=space.j @ e)
    _validate_frame(space, c, frame, tol)
    return frame


def grassmannian_dim(n: int, k: int) -> int:
    """(n + 3k + 1)(n - k) / 2, the dimension of the rank-2k coisotropic
    Grassmannian of R^{2n}."""
    if not (0 <= k <= n):
        raise ValueError(f"k must satisfy 0 <= k <= n, got k={k}, n={n}")
    return (n + 3 * k + 1) * (n - k) // 2


def random_unitary(n: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary: QR of a complex Gaussian, phases fixed."""
    z = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def standard_model(space: SymplecticSpace, k: int) -> CoisotropicSubspace:
    """The model C^k + R^{n-k}: span(e_1..e_n, f_1..f_k)."""
    n = space.n
    if not (0 <= k <= n):
        raise ValueError(f"k must satisfy 0 <= k <= n, got k={k}")
    eye = np.eye(2 * n)
    cols = np.concatenate([eye[:, :n], eye[:, n: n + k]], axis=1)
    return classify_coisotropic(space, Subspace(cols))


def random_coisotropic(
    space: SymplecticSpace, k: int, seed, tol: Tolerances = DEFAULT
) -> CoisotropicSubspace:
    """U . (C^k + R^{n-k}) for a seeded Haar-ish random unitary U."""
    gen = seed if isinstance(seed, np.random.Generator) else rng(seed)
    u = realify(random_unitary(space.n, gen))
    model = standard_model(space, k)
    return classify_coisotropic(space, Subspace.from_spanning(u @ model.space.basis), tol)


def _schur_constraint(space: SymplecticSpace, t_basis: np.ndarray,
                      perp: np.ndarray, k: int, z: np.ndarray) -> np.ndarray:
    """Upper triangle of the kernel-block Schur complement of the restricted
    form on the perturbed subspace; zero iff the perturbation stays
    coisotropic to first order."""
    cols = t_basis + perp @ z.T
    om = cols.T @ space.omega @ cols
    hk = 2 * k
    p, m, kk = om[:hk, :hk], om[:hk, hk:], om[hk:, hk:]
    if kk.shape[0] < 2:
        return np.zeros(0)
    s = kk + m.T @ np.linalg.solve(p, m)
    iu = np.triu_indices(s.shape[0], 1)
    return s[iu]


def measured_grassmannian_dim(
    space: SymplecticSpace,
    c: CoisotropicSubspace,
    step: float = DEFAULT.rank_step,
    tol: Tolerances = DEFAULT,
) -> int:
    """Tangent-space dimension of the coisotropic Grassmannian at C,
    measured numerically.

    Nearby (n+k)-dimensional subspaces are graphs over C; the coisotropy
    condition is the vanishing of the kernel-block Schur complement of the
    restricted symplectic form.  The rank of its finite-difference Jacobian
    (central differences of size ``step``) is subtracted from the ambient
    Grassmannian dimension.
    """
    frame = adapted_frame(space, c, tol=tol)
    t_basis = np.concatenate([frame.h_vectors(), frame.kernel_vectors()], axis=1)
    sub = Subspace.from_spanning(t_basis)
    proj = np.eye(space.dim) - sub.basis @ sub.basis.T
    u, s, _ = np.linalg.svd(proj)
    perp = u[:, : space.dim - sub.dim]
    npar = sub.dim * perp.shape[1]
    ncon = _schur_constraint(space, t_basis, perp, c.k, np.zeros((sub.dim, perp.shape[1]))).size
    if ncon == 0:
        return npar
    jac = np.zeros((ncon, npar))
    for a in range(npar):
        z = np.zeros(npar)
        z[a] = step
        zp = z.reshape(sub.dim, perp.shape[1])
        fp = _schur_constraint(space, t_basis, perp, c.k, zp)
        fm = _schur_constraint(space, t_basis, perp, c.k, -zp)
        jac[:, a] = (fp - fm) / (2 * step)
    sv = np.linalg.svd(jac, compute_uv=False)
    rank = int(np.sum(sv > max(1e-7, 1e-6 * sv[0])))
    return npar - rank
