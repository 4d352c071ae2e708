"""Extrinsic geometry of coisotropic level-set hypersurfaces in flat C^n.

A hypersurface Y = {rho = 1} with unit gradient on Y is coisotropic of
rank 2(n-1): the null foliation is spanned by the Hamiltonian direction
X_rho = j grad(rho), and the j-invariant complement N_JF = ker(d rho)
intersected with ker(d^c rho) is the maximal complex tangency.  Everything
here is pointwise: second fundamental form blocks in an adapted frame,
leafwise mean curvature, Levi form, the transverse symplectic curvature by
two independent routes, and leaf minimality along the X_rho flow.

Sign conventions, fixed once and used consistently: the normal is the
outward nu = grad(rho); the frame convention puts e_n along X_rho, so
f_n = j e_n = -nu, and the second fundamental form blocks A, B, C, D are
taken against the f_alpha normal frame.  On the unit sphere this makes the
A block the identity and the curvature vector of the Hopf leaf -nu.
"""

from __future__ import annotations

import dataclasses
import itertools
from functools import lru_cache
from math import pi
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from .config import DEFAULT, Tolerances, rng
from .errors import (
    ExtensionQualityError,
    InternalConsistencyError,
    NumericalQualityError,
    UnnormalizedDefiningFunctionError,
)
from .symplin import (
    AdaptedFrame,
    Subspace,
    classify_coisotropic,
    complex_coords,
    real_coords,
    standard_space,
)

__all__ = [
    "LevelSetHypersurface",
    "TangentSplitting",
    "SFFBlocks",
    "MeanCurvature",
    "LeviForm",
    "TransverseCurvature",
    "Minimality",
    "tangent_splitting",
    "second_fundamental_form",
    "leafwise_mean_curvature",
    "levi_form",
    "transverse_curvature_bracket",
    "transverse_curvature_sff",
    "is_integrable_prekahler",
    "leaf_minimality",
    "sphere",
    "hyperplane",
    "cylinder",
    "ellipsoid",
    "from_polynomial",
    "FIXTURES",
    "LagrangianGraphProduct",
    "random_graph_product",
]


@lru_cache(maxsize=32)
def _jmat(n: int) -> np.ndarray:
    return standard_space(n).j


def _fd_gradient(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    d = len(x)
    out = np.zeros(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def _fd_hessian(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    d = len(x)
    out = np.zeros((d, d))
    f0 = f(x)
    ee = h * np.eye(d)
    for i in range(d):
        out[i, i] = (f(x + 2 * ee[i]) - 2 * f0 + f(x - 2 * ee[i])) / (4 * h * h)
        for j in range(i + 1, d):
            pij = f(x + ee[i] + ee[j]) - f(x + ee[i] - ee[j]) \
                - f(x - ee[i] + ee[j]) + f(x - ee[i] - ee[j])
            out[i, j] = out[j, i] = pij / (4 * h * h)
    return out


@dataclasses.dataclass(frozen=True)
class LevelSetHypersurface:
    """Y = {rho = 1} in C^n with derivative oracles.

    ``grad`` and ``hess`` are analytic oracles when the fixture provides
    them; otherwise central differences with step ``h`` are used.  With
    ``strict`` set, points where |grad rho| deviates from 1 beyond the
    strict tolerance are rejected; otherwise all formulas normalize by
    |grad rho| pointwise, which is exact for the tangential quantities
    computed here.
    """

    n: int
    rho: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None
    h: float = DEFAULT.fd_step
    strict: bool = True
    name: str = "levelset"

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def k(self) -> int:
        return self.n - 1

    def value(self, x: np.ndarray) -> float:
        return float(self.rho(np.asarray(x, dtype=float)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return _fd_gradient(self.rho, x, self.h)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.hess is not None:
            return np.asarray(self.hess(x), dtype=float)
        return _fd_hessian(self.rho, x, self.h)

    def on_surface(self, x: np.ndarray, tol: float = DEFAULT.boundary_on_surface) -> bool:
        return abs(self.value(x) - 1.0) < tol

    def unit_normal(self, x: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
        g = self.gradient(x)
        norm = float(np.linalg.norm(g))
        if norm < 1e-12:
            raise UnnormalizedDefiningFunctionError("grad rho vanished")
        if self.strict and abs(norm - 1.0) > tol.unit_gradient_strict:
            raise UnnormalizedDefiningFunctionError(
                f"|grad rho| = {norm:.6f} deviates from 1 beyond "
                f"{tol.unit_gradient_strict:.1e}"
            )
        return g / norm

    def gradient_norm(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.gradient(x)))

    def x_rho(self, x: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
        """The Hamiltonian direction j grad(rho), unit on Y."""
        return _jmat(self.n) @ self.unit_normal(x, tol)

    def project(self, x: np.ndarray, iters: int = 50,
                tol: float = 1e-13) -> np.ndarray:
        """Newton projection onto {rho = 1} along the gradient."""
        x = np.array(x, dtype=float)
        for _ in range(iters):
            r = self.value(x) - 1.0
            if abs(r) < tol:
                return x
            g = self.gradient(x)
            x = x - r * g / float(g @ g)
        return x

    def sample_points(self, count: int, seed, offset: float = 0.5) -> np.ndarray:
        """Deterministic points on Y: Gaussian seeds projected to the surface."""
        g = rng(seed) if not isinstance(seed, np.random.Generator) else seed
        pts = []
        while len(pts) < count:
            x0 = g.normal(size=self.dim) * offset
            try:
                x = self.project(x0 + g.normal(size=self.dim))
            except UnnormalizedDefiningFunctionError:
                continue
            if self.on_surface(x, 1e-9):
                pts.append(x)
        return np.stack(pts)


class TangentSplitting(NamedTuple):
    nu: np.ndarray
    x_rho: np.ndarray
    njf: Subspace
    frame: AdaptedFrame


def tangent_splitting(
    y: LevelSetHypersurface, p: np.ndarray, tol: Tolerances = DEFAULT
) -> TangentSplitting:
    """Outward normal, Hamiltonian direction, maximal complex tangency and
    an adapted frame with e_n along X_rho (so f_n = -nu)."""
    p = np.asarray(p, dtype=float)
    nu = y.unit_normal(p, tol)
    j = _jmat(y.n)
    xr = j @ nu
    span = np.stack([nu, xr], axis=1)
    u, s, _ = np.linalg.svd(np.eye(y.dim) - span @ span.T)
    njf = Subspace(u[:, : y.dim - 2])
    jn = j @ njf.basis
    if float(np.max(np.linalg.norm(jn - njf.project(jn), axis=0))) > tol.subspace_equality:
        raise InternalConsistencyError("N_JF failed the j-invariance check")
    # complex orthonormal basis of N_JF, deterministic
    k = y.k
    if k:
        zc = complex_coords(njf.basis)
        uu, ss, _ = np.linalg.svd(zc)
        hc = uu[:, :k]
        for i in range(k):
            idx = int(np.argmax(np.abs(hc[:, i])))
            hc[:, i] = hc[:, i] * (np.conj(hc[idx, i]) / abs(hc[idx, i]))
        e_h = real_coords(hc)
    else:
        e_h = np.zeros((y.dim, 0))
    e = np.concatenate([e_h, xr[:, None]], axis=1)
    frame = AdaptedFrame(k=k, e=e, f=j @ e)
    return TangentSplitting(nu=nu, x_rho=xr, njf=njf, frame=frame)


@dataclasses.dataclass(frozen=True)
class SFFBlocks:
    """Second fundamental form of Y in an adapted frame, one symmetric
    matrix per normal direction f_alpha.

    ``full`` has shape (n - k, n + k, n + k) on the tangent basis ordered
    (e_1..e_n, f_1..f_k).  The blocks are views into it:

        A = full[:, :n, :n]      (e x e)
        B = full[:, :n, n:]      (e x f)
        C = full[:, n:, :n]      (f x e)
        D = full[:, n:, n:]      (f x f)

    so A = A', D = D' and B = C' are exactly the Cartan-lemma symmetries.
    """

    point: np.ndarray
    frame: AdaptedFrame
    full: np.ndarray

    def __post_init__(self):
        worst = max(
            (float(np.max(np.abs(s - s.T))) for s in self.full), default=0.0
        )
        if worst > DEFAULT.sff_symmetry:
            raise NumericalQualityError(
                f"second fundamental form symmetry violated by {worst:.3e}"
            )

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def k(self) -> int:
        return self.frame.k

    @property
    def a(self) -> np.ndarray:
        return self.full[:, : self.n, : self.n]

    @property
    def b(self) -> np.ndarray:
        return self.full[:, : self.n, self.n:]

    @property
    def c(self) -> np.ndarray:
        return self.full[:, self.n:, : self.n]

    @property
    def d(self) -> np.ndarray:
        return self.full[:, self.n:, self.n:]

    def symmetry_residual(self) -> float:
        return max(
            (float(np.max(np.abs(s - s.T))) for s in self.full), default=0.0
        )


def second_fundamental_form(
    y: LevelSetHypersurface,
    p: np.ndarray,
    frame: Optional[AdaptedFrame] = None,
    tol: Tolerances = DEFAULT,
) -> SFFBlocks:
    """SFF blocks of Y at p in the given (or canonical) adapted frame.

    For a level set with unit normal nu = grad(rho)/|grad(rho)| the
    normal-valued form on tangent vectors is
    S(v, w) = -(<Hess(rho) v, w> / |grad rho|) nu, and the blocks are its
    pairings with the frame normals f_alpha.
    """
    p = np.asarray(p, dtype=float)
    if frame is None:
        frame = tangent_splitting(y, p, tol).frame
    nu = y.unit_normal(p, tol)
    hess = y.hessian(p) / y.gradient_norm(p)
    t = frame.tangent_basis()
    ht = t.T @ hess @ t
    normals = frame.f[:, frame.k:]
    signs = -(nu @ normals)          # f_n = -nu gives +1 for hypersurfaces
    full = np.stack([s * ht for s in signs])
    return SFFBlocks(point=p, frame=frame, full=full)


def normal_convention_matrix(blocks: SFFBlocks, nu: np.ndarray) -> np.ndarray:
    """The same form read against the outward unit normal:
    S_nu(v, w) = <S(v, w), nu>.  On the unit sphere this is -identity."""
    normals = blocks.frame.f[:, blocks.frame.k:]
    coef = normals.T @ nu
    return np.einsum("a,aij->ij", coef, blocks.full)


@dataclasses.dataclass(frozen=True)
class MeanCurvature:
    """Partial trace of the SFF over the null directions and its
    omega-contraction restricted to the tangent space."""

    h_vector: np.ndarray            # leafwise mean curvature vector in R^{2n}
    alpha: np.ndarray               # one-form values on the tangent basis
    alpha_norm: float
    formula_residual: float         # direct contraction vs frame formula


def leafwise_mean_curvature(
    y: LevelSetHypersurface,
    p: np.ndarray,
    frame: Optional[AdaptedFrame] = None,
    tol: Tolerances = DEFAULT,
) -> MeanCurvature:
    """Leafwise mean curvature vector and one-form at p.

    The vector is the trace of the SFF over the kernel frame directions;
    its omega-contraction on the tangent basis is cross-checked against the
    frame formula (minus the kernel-block trace of A on the kernel duals),
    in both index patterns, to 1e-6.
    """
    p = np.asarray(p, dtype=float)
    spl = tangent_splitting(y, p, tol)
    if frame is None:
        frame = spl.frame
    blocks = second_fundamental_form(y, p, frame, tol)
    n, k = blocks.n, blocks.k
    normals = frame.f[:, k:]
    kernel_idx = np.arange(k, n)
    trace = blocks.a[:, kernel_idx, kernel_idx].sum(axis=1)   # per alpha
    h_vec = normals @ trace
    omega = standard_space(y.n).omega
    t = frame.tangent_basis()
    alpha = (omega @ t).T @ h_vec * (-1.0)
    # direct contraction: (i_H omega)(t) = omega(H, t)
    alpha_direct = np.array([h_vec @ omega @ t[:, i] for i in range(t.shape[1])])
    # frame formula: -sum_alpha A^beta_{alpha alpha} on the kernel e-duals,
    # and the transposed contraction -sum_alpha A^alpha_{beta alpha}
    formula1 = np.zeros(t.shape[1])
    formula2 = np.zeros(t.shape[1])
    for bi, beta in enumerate(kernel_idx):
        s1 = blocks.a[bi, kernel_idx, kernel_idx].sum()
        formula1[beta] = -s1
        s2 = sum(blocks.a[ai, beta, alpha_i]
                 for ai, alpha_i in enumerate(kernel_idx))
        formula2[beta] = -s2
    residual = max(
        float(np.max(np.abs(alpha_direct - formula1))),
        float(np.max(np.abs(alpha_direct - formula2))),
    )
    if residual > 10 * tol.mean_curvature_consistency:
        raise InternalConsistencyError(
            f"mean curvature contractions disagree by {residual:.3e}"
        )
    return MeanCurvature(
        h_vector=h_vec,
        alpha=alpha_direct,
        alpha_norm=float(np.linalg.norm(alpha_direct)),
        formula_residual=residual,
    )


@dataclasses.dataclass(frozen=True)
class LeviForm:
    """Levi data on the maximal complex tangency.

    ``two_form`` is L(b_i, b_j) = (1/2)(<H J b_i, b_j> - <H b_i, J b_j>)
    with H the |grad|-normalized Hessian; ``hermitian`` the J-invariant
    symmetric reading whose value on a unit vector X is L(X, JX).  The
    convention factor 1/2 makes the unit sphere value 1.
    """

    basis: np.ndarray
    two_form: np.ndarray
    hermitian: np.ndarray
    eigenvalues: np.ndarray
    positive_definite: bool


def levi_form(
    y: LevelSetHypersurface,
    p: np.ndarray,
    frame: Optional[AdaptedFrame] = None,
    tol: Tolerances = DEFAULT,
) -> LeviForm:
    p = np.asarray(p, dtype=float)
    spl = tangent_splitting(y, p, tol)
    if frame is None:
        frame = spl.frame
    basis = frame.h_vectors()
    j = _jmat(y.n)
    hess = y.hessian(p) / y.gradient_norm(p)
    jb = j @ basis
    two_form = 0.5 * (jb.T @ hess @ basis - basis.T @ hess @ jb)
    hermitian = 0.5 * (basis.T @ hess @ basis + jb.T @ hess @ jb)
    eig = np.linalg.eigvalsh(hermitian) if basis.shape[1] else np.zeros(0)
    return LeviForm(
        basis=basis,
        two_form=two_form,
        hermitian=hermitian,
        eigenvalues=eig,
        positive_definite=bool(basis.shape[1] and np.min(eig) > 0),
    )


@dataclasses.dataclass(frozen=True)
class TransverseCurvature:
    """The null-direction-valued two-form on N_JF measuring
    non-integrability of the j-invariant complement.

    ``components[i, j, a]`` is the coefficient of kernel direction a on
    the basis pair (b_i, b_j); antisymmetric in (i, j).  The complex type
    parts are populated by the second-fundamental-form route only.
    """

    basis: np.ndarray
    components: np.ndarray
    f20: Optional[np.ndarray] = None
    f11: Optional[np.ndarray] = None
    f02: Optional[np.ndarray] = None
    rho_trans: Optional[np.ndarray] = None

    def reassembled(self, tol: float = DEFAULT.type_reassembly) -> np.ndarray:
        """F^{2,0} + F^{1,1} + F^{0,2} evaluated on the real basis pairs;
        must reproduce ``components``."""
        if self.f20 is None:
            raise ValueError("type decomposition not available on this route")
        two_k = self.components.shape[0]
        k = two_k // 2
        nal = self.components.shape[2]
        out = np.zeros((two_k, two_k, nal), dtype=complex)
        # theta^a(e_b) = delta, theta^a(f_b) = i delta on the (e_a, f_a) basis
        theta = np.zeros((k, two_k), dtype=complex)
        for a in range(k):
            theta[a, a] = 1.0
            theta[a, k + a] = 1j
        tbar = np.conj(theta)
        for i in range(two_k):
            for jj in range(two_k):
                for al in range(nal):
                    v20 = sum(
                        self.f20[a, b, al]
                        * (theta[a, i] * theta[b, jj] - theta[a, jj] * theta[b, i])
                        for a in range(k) for b in range(k)
                    )
                    v11 = sum(
                        self.f11[a, b, al]
                        * (theta[a, i] * tbar[b, jj] - theta[a, jj] * tbar[b, i])
                        for a in range(k) for b in range(k)
                    )
                    v02 = sum(
                        self.f02[a, b, al]
                        * (tbar[a, i] * tbar[b, jj] - tbar[a, jj] * tbar[b, i])
                        for a in range(k) for b in range(k)
                    )
                    out[i, jj, al] = v20 + v11 + v02
        if float(np.max(np.abs(out.imag))) > tol:
            raise InternalConsistencyError("type reassembly left an imaginary part")
        return out.real

    def norm(self) -> float:
        return float(np.max(np.abs(self.components))) if self.components.size else 0.0


def _surface_step(y: LevelSetHypersurface, p: np.ndarray, v: np.ndarray) -> np.ndarray:
    return y.project(p + v)


def _njf_project(y: LevelSetHypersurface, q: np.ndarray, v: np.ndarray,
                 tol: Tolerances) -> np.ndarray:
    nu = y.unit_normal(q, tol)
    xr = _jmat(y.n) @ nu
    return v - (v @ nu) * nu - (v @ xr) * xr


def transverse_curvature_bracket(
    y: LevelSetHypersurface,
    p: np.ndarray,
    frame: Optional[AdaptedFrame] = None,
    step: float = 1e-4,
    scheme: str = "projection",
    tol: Tolerances = DEFAULT,
) -> TransverseCurvature:
    """Bracket-route transverse curvature.

    Basis vectors of N_JF are extended to fields normal to the foliation
    either by projecting their constant extensions onto N_JF at nearby
    surface points (``projection``) or by transporting the base frame with
    hint projection (``transport``); the Lie bracket is formed by central
    differences of the field along surface steps and its null-direction
    component extracted.  The bracket must remain tangent to Y.
    """
    p = np.asarray(p, dtype=float)
    spl = tangent_splitting(y, p, tol)
    if frame is None:
        frame = spl.frame
    basis = frame.h_vectors()
    two_k = basis.shape[1]
    kernel = frame.kernel_vectors()

    if scheme == "projection":
        def field(i):
            b = basis[:, i]

            def x(q, _b=b):
                return _njf_project(y, q, _b, tol)

            return x
    elif scheme == "transport":
        def field(i):
            coeff = i

            def x(q, _i=coeff):
                spl_q = tangent_splitting(y, q, tol)
                cols = spl_q.njf.project(basis)
                # hint-projected transport of the whole base N_JF frame
                from .symplin import _mgs
                moved = _mgs(cols, tol.hint_min_norm)
                return moved[:, _i]

            return x
    else:
        raise ValueError(f"unknown extension scheme {scheme!r}")

    fields = [field(i) for i in range(two_k)]
    comps = np.zeros((two_k, two_k, kernel.shape[1]))
    scale = max(1.0, float(np.max(np.abs(y.hessian(p)))))
    for i in range(two_k):
        for jj in range(i + 1, two_k):
            xi, xj = fields[i], fields[jj]
            vi, vj = xi(p), xj(p)
            qp, qm = _surface_step(y, p, step * vi), _surface_step(y, p, -step * vi)
            dxj = (xj(qp) - xj(qm)) / (2 * step)
            qp, qm = _surface_step(y, p, step * vj), _surface_step(y, p, -step * vj)
            dxi = (xi(qp) - xi(qm)) / (2 * step)
            br = dxj - dxi
            nu = spl.nu
            if abs(br @ nu) > tol.bracket_tangency * scale * (1 + np.linalg.norm(br)):
                raise ExtensionQualityError(
                    f"bracket has normal component {abs(br @ nu):.3e}"
                )
            coef = kernel.T @ br
            comps[i, jj] = coef
            comps[jj, i] = -coef
    return TransverseCurvature(basis=basis, components=comps)


def transverse_curvature_sff(
    y_or_blocks,
    p: Optional[np.ndarray] = None,
    frame: Optional[AdaptedFrame] = None,
    tol: Tolerances = DEFAULT,
) -> TransverseCurvature:
    """Frame-route transverse curvature assembled from the SFF blocks.

    Real components, index order pinned against the bracket oracle:
    F(e_a, e_b) = (C_ba - C_ab) e_alpha, F(f_a, f_b) the same value, and
    F(e_a, f_b) = (-D_ab - A_ab) e_alpha, all indices in the H range.  The
    complex type parts are solved from the real blocks; since the mixed
    block is symmetric and the two diagonal blocks agree, the (2,0) and
    (0,2) parts vanish identically in the flat Kahler setting.
    """
    if isinstance(y_or_blocks, SFFBlocks):
        blocks = y_or_blocks
    else:
        blocks = second_fundamental_form(y_or_blocks, p, frame, tol)
    n, k = blocks.n, blocks.k
    nal = n - k
    ch = blocks.c[:, :, :k]             # C^alpha_{b j}, H columns only
    ah = blocks.a[:, :k, :k]
    dh = blocks.d
    bh = blocks.b[:, :k, :]             # B^alpha_{j b}, H rows only
    comps = np.zeros((2 * k, 2 * k, nal))
    for al in range(nal):
        c_, a_, d_, b_ = ch[al], ah[al], dh[al], bh[al]
        for a in range(k):
            for b in range(k):
                comps[a, b, al] = c_[b, a] - c_[a, b]
                comps[k + a, k + b, al] = b_[a, b] - b_[b, a]
                val = -d_[a, b] - a_[a, b]
                comps[a, k + b, al] += val
                comps[k + b, a, al] -= val
    f20 = np.zeros((k, k, nal), dtype=complex)
    f11 = np.zeros((k, k, nal), dtype=complex)
    f02 = np.zeros((k, k, nal), dtype=complex)
    rho_trans = np.zeros(nal)
    for al in range(nal):
        e_blk = comps[:k, :k, al]
        g_blk = comps[k:, k:, al]
        m_blk = comps[:k, k:, al]
        m_sym = 0.5 * (m_blk + m_blk.T)
        m_anti = 0.5 * (m_blk - m_blk.T)
        f20[:, :, al] = (e_blk - g_blk) / 8.0 - 0.25j * m_anti
        f11[:, :, al] = (e_blk + g_blk) / 4.0 + 0.5j * m_sym
        f02[:, :, al] = np.conj(f20[:, :, al])
        rho_trans[al] = -np.trace(ah[al]) - np.trace(dh[al])
    out = TransverseCurvature(
        basis=blocks.frame.h_vectors(), components=comps,
        f20=f20, f11=f11, f02=f02, rho_trans=rho_trans,
    )
    resid = float(np.max(np.abs(out.reassembled() - comps))) if comps.size else 0.0
    if resid > tol.type_reassembly:
        raise InternalConsistencyError(
            f"type decomposition reassembly residual {resid:.3e}"
        )
    return out


def is_integrable_prekahler(
    y: LevelSetHypersurface, p: np.ndarray, tol: Tolerances = DEFAULT
) -> bool:
    """True iff the transverse curvature is of type (1,1).

    Route one tests the real-block criterion in the bracket-verified index
    order (the two diagonal blocks agree and the mixed block is symmetric);
    route two tests vanishing of the (2,0) and (0,2) parts directly.  The
    routes must agree or an internal consistency error is raised.
    """
    blocks = second_fundamental_form(y, p, tol=tol)
    curv = transverse_curvature_sff(blocks, tol=tol)
    k = blocks.k
    comps = curv.components
    resid = 0.0
    for al in range(comps.shape[2]):
        e_blk = comps[:k, :k, al]
        g_blk = comps[k:, k:, al]
        m_blk = comps[:k, k:, al]
        resid = max(resid,
                    float(np.max(np.abs(e_blk - g_blk))) if k else 0.0,
                    float(np.max(np.abs(m_blk - m_blk.T))) if k else 0.0)
    route1 = resid < tol.integrability
    off = max(
        float(np.max(np.abs(curv.f20))) if curv.f20.size else 0.0,
        float(np.max(np.abs(curv.f02))) if curv.f02.size else 0.0,
    )
    route2 = off < tol.integrability / 2
    if route1 != route2:
        raise InternalConsistencyError(
            f"integrability routes disagree: real blocks {resid:.3e} vs "
            f"type parts {off:.3e}"
        )
    return route1


@dataclasses.dataclass(frozen=True)
class Minimality:
    minimal: bool
    curvature_norm: float
    curvature_vector: np.ndarray
    blocks_vector: np.ndarray
    consistency_residual: float
    c_contractions: np.ndarray
    a_contractions: np.ndarray


def _rk4(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def leaf_minimality(
    y: LevelSetHypersurface,
    p: np.ndarray,
    flow_step: float = 1e-3,
    tol: Tolerances = DEFAULT,
) -> Minimality:
    """Is the null leaf through p a minimal curve of Y?

    The leaf is the integral curve of X_rho.  Its curvature inside Y is the
    second difference of the flow projected onto the tangent space minus
    the X_rho direction; the leaf is minimal iff that vector vanishes.
    The result is cross-checked against the frame contractions of the SFF
    blocks (the C and A entries pairing H directions with the null
    direction), which express the same curvature.
    """
    p = np.asarray(p, dtype=float)
    spl = tangent_splitting(y, p, tol)

    def vf(x):
        g = y.gradient(x)
        return _jmat(y.n) @ (g / np.linalg.norm(g))

    xp = _rk4(vf, p, flow_step)
    xm = _rk4(vf, p, -flow_step)
    acc = (xp - 2 * p + xm) / flow_step ** 2
    kappa = acc - (acc @ spl.nu) * spl.nu - (acc @ spl.x_rho) * spl.x_rho
    norm = float(np.linalg.norm(kappa))

    blocks = second_fundamental_form(y, p, spl.frame, tol)
    n, k = blocks.n, blocks.k
    c_con = blocks.c[0, :, n - 1].copy()       # C^n_{a, n}
    a_con = blocks.a[0, :k, n - 1].copy()      # A^n_{a, n}
    e_h = spl.frame.e[:, :k]
    f_h = spl.frame.f[:, :k]
    blocks_vec = -e_h @ c_con + f_h @ a_con
    resid = float(np.linalg.norm(kappa - blocks_vec))
    if resid > tol.minimality_consistency * max(1.0, norm):
        raise InternalConsistencyError(
            f"flow curvature and block contractions disagree: {resid:.3e}"
        )
    return Minimality(
        minimal=norm < tol.minimality,
        curvature_norm=norm,
        curvature_vector=kappa,
        blocks_vector=blocks_vec,
        consistency_residual=resid,
        c_contractions=c_con,
        a_contractions=a_con,
    )


# ---------------------------------------------------------------------------
# fixtures


def sphere(n: int = 2, radius: float = 1.0, analytic: bool = True,
           h: float = DEFAULT.fd_step) -> LevelSetHypersurface:
    """The round sphere |x| = radius, with rho = |x| - radius + 1 so the
    gradient is exactly unit."""

    def rho(x):
        return float(np.linalg.norm(x)) - radius + 1.0

    def grad(x):
        return x / np.linalg.norm(x)

    def hess(x):
        r = np.linalg.norm(x)
        xh = x / r
        return (np.eye(len(x)) - np.outer(xh, xh)) / r

    return LevelSetHypersurface(
        n=n, rho=rho,
        grad=grad if analytic else None,
        hess=hess if analytic else None,
        h=h, strict=True, name=f"sphere(r={radius})",
    )


def hyperplane(n: int = 2, level: float = 1.0) -> LevelSetHypersurface:
    """The real hyperplane {x_1 = level}, totally geodesic and Levi flat."""

    def rho(x):
        return float(x[0]) - level + 1.0

    def grad(x):
        g = np.zeros(len(x))
        g[0] = 1.0
        return g

    def hess(x):
        return np.zeros((len(x), len(x)))

    return LevelSetHypersurface(
        n=n, rho=rho, grad=grad, hess=hess, strict=True,
        name=f"hyperplane(x1={level})",
    )


def cylinder(n: int = 2, radius: float = 1.0,
             analytic: bool = True, h: float = DEFAULT.fd_step) -> LevelSetHypersurface:
    """{|z_1| = radius} in C^n; curvature concentrated in the z_1 plane."""

    def rho(x):
        nn = len(x) // 2
        return float(np.hypot(x[0], x[nn])) - radius + 1.0

    def grad(x):
        nn = len(x) // 2
        r = np.hypot(x[0], x[nn])
        g = np.zeros(len(x))
        g[0], g[nn] = x[0] / r, x[nn] / r
        return g

    def hess(x):
        nn = len(x) // 2
        r = np.hypot(x[0], x[nn])
        out = np.zeros((len(x), len(x)))
        c, s = x[0] / r, x[nn] / r
        out[0, 0] = s * s / r
        out[nn, nn] = c * c / r
        out[0, nn] = out[nn, 0] = -c * s / r
        return out

    return LevelSetHypersurface(
        n=n, rho=rho,
        grad=grad if analytic else None,
        hess=hess if analytic else None,
        h=h, strict=True, name=f"cylinder(r={radius})",
    )


def ellipsoid(semi_axes: Sequence[float], analytic: bool = True,
              h: float = DEFAULT.fd_step) -> LevelSetHypersurface:
    """{sum |z_j|^2 / a_j^2 = 1}, one semi-axis per complex coordinate.

    The gradient is not unit, so the fixture runs in non-strict mode and
    all formulas normalize pointwise.
    """
    a = np.asarray(semi_axes, dtype=float)
    n = len(a)
    w = np.concatenate([1.0 / a ** 2, 1.0 / a ** 2])

    def rho(x):
        return float(np.sum(w * x * x))

    def grad(x):
        return 2.0 * w * x

    def hess(x):
        return np.diag(2.0 * w)

    return LevelSetHypersurface(
        n=n, rho=rho,
        grad=grad if analytic else None,
        hess=hess if analytic else None,
        h=h, strict=False, name=f"ellipsoid{tuple(a)}",
    )


def from_polynomial(n: int, terms: Sequence[dict],
                    h: float = DEFAULT.fd_step, strict: bool = False
                    ) -> LevelSetHypersurface:
    """A defining function given as a polynomial coefficient table.

    Each term is {"exponents": [2n ints], "coeff": float} with total degree
    at most 6.  Gradient and Hessian are produced by exact exponent
    manipulation; no code is evaluated.
    """
    exps = []
    coefs = []
    for t in terms:
        e = np.asarray(t["exponents"], dtype=int)
        if e.shape != (2 * n,) or np.any(e < 0):
            raise ValueError("each term needs 2n nonnegative exponents")
        if int(e.sum()) > 6:
            raise ValueError("polynomial degree must be at most 6")
        exps.append(e)
        coefs.append(float(t["coeff"]))
    exps = np.stack(exps) if exps else np.zeros((0, 2 * n), dtype=int)
    coefs = np.asarray(coefs)

    def rho(x):
        return float(np.sum(coefs * np.prod(x ** exps, axis=1)))

    def grad(x):
        out = np.zeros(2 * n)
        for i in range(2 * n):
            mask = exps[:, i] > 0
            if not np.any(mask):
                continue
            e2 = exps[mask].copy()
            c2 = coefs[mask] * e2[:, i]
            e2[:, i] -= 1
            out[i] = np.sum(c2 * np.prod(x ** e2, axis=1))
        return out

    def hess(x):
        out = np.zeros((2 * n, 2 * n))
        for i in range(2 * n):
            for jj in range(i, 2 * n):
                e2 = exps.copy().astype(float)
                c2 = coefs * exps[:, i]
                e2[:, i] -= 1
                c2 = c2 * np.where(e2[:, jj] > -1, e2[:, jj], 0)
                e2[:, jj] -= 1
                mask = c2 != 0
                val = np.sum(c2[mask] * np.prod(x ** e2[mask], axis=1)) if np.any(mask) else 0.0
                out[i, jj] = out[jj, i] = val
        return out

    return LevelSetHypersurface(
        n=n, rho=rho, grad=grad, hess=hess, h=h, strict=strict,
        name="polynomial",
    )


def _fixture_factory(name: str, params: dict) -> LevelSetHypersurface:
    params = dict(params)
    if name == "sphere":
        return sphere(n=int(params.get("n", 2)), radius=float(params.get("r", 1.0)))
    if name == "hyperplane":
        return hyperplane(n=int(params.get("n", 2)), level=float(params.get("level", 1.0)))
    if name == "cylinder":
        return cylinder(n=int(params.get("n", 2)), radius=float(params.get("r", 1.0)))
    if name == "ellipsoid":
        return ellipsoid(params["semi_axes"])
    if name == "polynomial":
        return from_polynomial(int(params["n"]), params["terms"])
    raise ValueError(f"unknown fixture {name!r}")


FIXTURES = {
    "sphere": _fixture_factory,
    "hyperplane": _fixture_factory,
    "cylinder": _fixture_factory,
    "ellipsoid": _fixture_factory,
    "polynomial": _fixture_factory,
}


# ---------------------------------------------------------------------------
# product fixture: Lagrangian graph times C^m, for multi-dimensional leaves


class LagrangianGraphProduct:
    """Y = L x C^m in C^{l+m} with L the Lagrangian graph of df in C^l.

    The null foliation has l-dimensional leaves (tangent to TL) and the
    j-invariant complement is the C^m factor.  The second fundamental form
    lives entirely in the L block and has the closed form
    <S(t(u), t(v)), J t(w)> = D^3 f(u, v, w), which serves as the oracle
    for the numerical route.
    """

    def __init__(self, cubic: np.ndarray, quad: np.ndarray, m: int = 1):
        cubic = np.asarray(cubic, dtype=float)
        quad = np.asarray(quad, dtype=float)
        l = quad.shape[0]
        if cubic.shape != (l, l, l):
            raise ValueError("cubic tensor shape mismatch")
        # symmetrize
        cs = np.zeros_like(cubic)
        for perm in itertools.permutations(range(3)):
            cs += np.transpose(cubic, perm)
        self.cubic = cs / 6.0
        self.quad = (quad + quad.T) / 2.0
        self.l = l
        self.m = m
        self.n = l + m
        self.k = m

    def grad_f(self, x: np.ndarray) -> np.ndarray:
        return self.quad @ x + 0.5 * np.einsum("ijk,j,k->i", self.cubic, x, x)

    def hess_f(self, x: np.ndarray) -> np.ndarray:
        return self.quad + np.einsum("ijk,k->ij", self.cubic, x)

    def embed(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Real coordinates of the point (x + i grad f(x), w) in C^{l+m}."""
        n = self.n
        out = np.zeros(2 * n)
        out[: self.l] = x
        out[self.l: n] = w[: self.m]
        out[n: n + self.l] = self.grad_f(x)
        out[n + self.l:] = w[self.m:]
        return out

    def frame(self, x: np.ndarray) -> AdaptedFrame:
        """Adapted frame: e_1..e_m the C^m directions, e_{m+1}..e_n an
        orthonormal basis of TL."""
        n, l, m = self.n, self.l, self.m
        hf = self.hess_f(x)
        tl = np.zeros((2 * n, l))
        tl[: l, :] = np.eye(l)
        tl[n: n + l, :] = hf
        tl = tl @ np.linalg.inv(scipy.linalg.sqrtm(np.eye(l) + hf @ hf).real)
        e_h = np.zeros((2 * n, m))
        for a in range(m):
            e_h[l + a, a] = 1.0
        e = np.concatenate([e_h, tl], axis=1)
        j = _jmat(n)
        return AdaptedFrame(k=m, e=e, f=j @ e)

    def tangent_projector(self, x: np.ndarray) -> np.ndarray:
        fr = self.frame(x)
        t = fr.tangent_basis()
        return t @ t.T

    def sff_oracle(self, x: np.ndarray) -> SFFBlocks:
        """Closed-form blocks from the third derivatives of f."""
        n, l, m = self.n, self.l, self.m
        fr = self.frame(x)
        hf = self.hess_f(x)
        minv = np.linalg.inv(scipy.linalg.sqrtm(np.eye(l) + hf @ hf).real)
        full = np.zeros((l, n + m, n + m))
        # kernel block indices inside the e range: m .. n-1
        for al in range(l):
            for b in range(l):
                for c in range(l):
                    val = np.einsum(
                        "ijk,i,j,k->", self.cubic,
                        minv[:, b], minv[:, c], minv[:, al],
                    )
                    full[al, m + b, m + c] = val
        return SFFBlocks(point=self.embed(x, np.zeros(2 * m)), frame=fr, full=full)

    def sff_numeric(self, x: np.ndarray, step: float = 1e-5) -> SFFBlocks:
        """Blocks by central differences of tangentially extended fields,
        independent of the third-derivative oracle."""
        n, m = self.n, self.m
        fr = self.frame(x)
        t = fr.tangent_basis()
        normals = fr.f[:, m:]
        w0 = np.zeros(2 * m)

        def pullback_step(v, s):
            # move the surface parameters by the tangent vector's components
            dx = v[: self.l] * s
            dw = np.concatenate([v[self.l: n], v[n + self.l:]]) * s
            return x + dx, w0 + dw

        cols = t.shape[1]
        full = np.zeros((normals.shape[1], cols, cols))
        for i in range(cols):
            vi = t[:, i]
            xp, wp = pullback_step(vi, step)
            xm, wm = pullback_step(vi, -step)
            pp = self.tangent_projector(xp)
            pm = self.tangent_projector(xm)
            for jj in range(cols):
                vj = t[:, jj]
                dw = (pp @ vj - pm @ vj) / (2 * step)
                coef = normals.T @ dw
                full[:, i, jj] += coef
        full = 0.5 * (full + np.transpose(full, (0, 2, 1)))
        return SFFBlocks(point=self.embed(x, w0), frame=fr, full=full)


def random_graph_product(seed, l: int = 2, m: int = 1,
                         scale: float = 0.4) -> LagrangianGraphProduct:
    g = rng(seed) if not isinstance(seed, np.random.Generator) else seed
    cubic = scale * g.normal(size=(l, l, l))
    quad = scale * g.normal(size=(l, l))
    return LagrangianGraphProduct(cubic=cubic, quad=quad, m=m)
