"""Phase functions of oscillatory-integral operators and their canonical maps.

A phase Phi(x, eta) on R^d x R^d is either quadratic,

    Phi = 1/2 A x.x + B x.eta + 1/2 C eta.eta + eta0.x - x0.eta,

or generic (user-supplied evaluators for Phi, its gradients and the mixed
Hessian, plus declared derivative bounds and a lower bound delta on
|det d^2_{x,eta} Phi|).  The canonical transformation chi(y, eta) = (x, xi)
solves y = grad_eta Phi(x, eta), xi = grad_x Phi(x, eta); for quadratic
phases it is an explicit affine symplectic map, in general it is computed by
a damped Newton iteration.

All evaluators are vectorized: x and eta are arrays of shape (..., d).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import ConditionViolation, ConfigError, ContractViolation, NewtonError

__all__ = [
    "QuadraticPhase",
    "GenericPhase",
    "CanonicalMap",
    "canonical_map",
    "canonical_map_quadratic",
    "check_phase_conditions",
    "x_gradient_diameter",
    "PhaseConditionReport",
    "GradientDiameterReport",
    "phase_catalog",
    "CATALOG_NAMES",
]


def _as_matrix(M, d):
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        M = M * np.eye(d)
    if M.shape != (d, d):
        raise ContractViolation(f"expected a {d}x{d} matrix, got shape {M.shape}")
    return M


def _as_vector(v, d):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 1 and d > 1:
        v = np.full(d, v[0])
    if v.shape != (d,):
        raise ContractViolation(f"expected a vector of length {d}")
    return v


@dataclass(frozen=True)
class QuadraticPhase:
    """Quadratic phase with symmetric A, C and nondegenerate B."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    x0: np.ndarray
    eta0: np.ndarray
    name: str = "quadratic"

    @classmethod
    def make(cls, d=1, A=0.0, B=1.0, C=0.0, x0=0.0, eta0=0.0, name="quadratic"):
        A = _as_matrix(A, d)
        B = _as_matrix(B, d)
        C = _as_matrix(C, d)
        if not np.array_equal(A, A.T) or not np.array_equal(C, C.T):
            raise ContractViolation("A and C must be exactly symmetric")
        if abs(np.linalg.det(B)) < 1e-14:
            raise ContractViolation("B must be nondegenerate")
        return cls(A, B, C, _as_vector(x0, d), _as_vector(eta0, d), name)

    @property
    def d(self):
        return self.A.shape[0]

    @property
    def delta(self):
        """Lower bound for |det d^2_{x,eta} Phi| (exactly |det B| here)."""
        return abs(np.linalg.det(self.B))

    def value(self, x, eta):
        x = np.asarray(x, dtype=float)
        eta = np.asarray(eta, dtype=float)
        quad = (
            0.5 * np.einsum("...i,ij,...j->...", x, self.A, x)
            + np.einsum("...i,ij,...j->...", eta, self.B, x)
            + 0.5 * np.einsum("...i,ij,...j->...", eta, self.C, eta)
        )
        return quad + x @ self.eta0 - eta @ self.x0

    def grad_x(self, x, eta):
        return np.asarray(x) @ self.A + np.asarray(eta) @ self.B + self.eta0

    def grad_eta(self, x, eta):
        return np.asarray(x) @ self.B.T + np.asarray(eta) @ self.C - self.x0

    def mixed_hessian(self, x, eta):
        """d^2 Phi / dx_i deta_j, broadcast over the leading shape of x."""
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(eta)[:-1])
        return np.broadcast_to(self.B.T, shape + (self.d, self.d)).copy()

    def hess_xx(self, x, eta):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(eta)[:-1])
        return np.broadcast_to(self.A, shape + (self.d, self.d)).copy()

    def hess_ee(self, x, eta):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(eta)[:-1])
        return np.broadcast_to(self.C, shape + (self.d, self.d)).copy()


@dataclass
class GenericPhase:
    """Smooth phase given by evaluators; derivatives are user-supplied.

    Finite differences are used only to cross-validate the declared
    gradients and to estimate the second/third derivative sups in condition
    reports, never inside the Newton solver.
    """

    d: int
    fn: callable
    grad_x_fn: callable
    grad_eta_fn: callable
    mixed_hessian_fn: callable
    delta: float
    c2_bound: float = np.inf
    c3_bound: float = np.inf
    name: str = "generic"
    hess_xx_fn: callable = None
    hess_ee_fn: callable = None

    def value(self, x, eta):
        return self.fn(np.asarray(x, dtype=float), np.asarray(eta, dtype=float))

    def grad_x(self, x, eta):
        return self.grad_x_fn(np.asarray(x, dtype=float), np.asarray(eta, dtype=float))

    def grad_eta(self, x, eta):
        return self.grad_eta_fn(np.asarray(x, dtype=float), np.asarray(eta, dtype=float))

    def mixed_hessian(self, x, eta):
        return self.mixed_hessian_fn(np.asarray(x, dtype=float), np.asarray(eta, dtype=float))

    def hess_xx(self, x, eta):
        if self.hess_xx_fn is not None:
            return self.hess_xx_fn(x, eta)
        return _fd_jacobian(lambda u: self.grad_x(u, eta), np.asarray(x, dtype=float))

    def hess_ee(self, x, eta):
        if self.hess_ee_fn is not None:
            return self.hess_ee_fn(x, eta)
        return _fd_jacobian(lambda u: self.grad_eta(x, u), np.asarray(eta, dtype=float))


def _fd_jacobian(fn, pts, h=1e-5):
    """Central-difference Jacobian of a vector field, shape (..., d, d)."""
    pts = np.asarray(pts, dtype=float)
    d = pts.shape[-1]
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        cols.append((fn(pts + e) - fn(pts - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def _full_gradient(phase, x, eta):
    return np.concatenate(
        [phase.grad_x(x, eta), phase.grad_eta(x, eta)], axis=-1
    )


def _newton_solve(residual_fn, jac_fn, x0, tol, max_iter, what):
    """Damped Newton for a batch of d-dimensional root problems."""
    x = np.array(x0, dtype=float)
    r = residual_fn(x)
    rn = np.linalg.norm(r, axis=-1)
    for _ in range(max_iter):
        if np.max(rn) <= tol:
            return x
        J = jac_fn(x)
        step = np.linalg.solve(J, r[..., None])[..., 0]
        trial = x - step
        r_trial = residual_fn(trial)
        rn_trial = np.linalg.norm(r_trial, axis=-1)
        for _halving in range(10):
            worse = (rn_trial > rn) & (rn > tol)
            if not np.any(worse):
                break
            step = np.where(worse[..., None], 0.5 * step, step)
            trial = x - step
            r_trial = residual_fn(trial)
            rn_trial = np.linalg.norm(r_trial, axis=-1)
        x, r, rn = trial, r_trial, rn_trial
    if np.max(rn) > tol:
        raise NewtonError(
            f"{what}: Newton did not converge in {max_iter} iterations "
            f"(residual {np.max(rn):.3e})",
            residual=float(np.max(rn)),
        )
    return x


def canonical_map(phase, y, eta, tol=1e-10, max_iter=50):
    """Solve y = grad_eta Phi(x, eta) for x by Newton, then xi = grad_x Phi.

    y and eta have shape (..., d); returns (x, xi) of the same shape.
    """
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)
    y, eta = np.broadcast_arrays(y, eta)

    if isinstance(phase, QuadraticPhase):
        x0 = np.linalg.solve(
            np.broadcast_to(phase.B, y.shape + (phase.d,)),
            (y - eta @ phase.C + phase.x0)[..., None],
        )[..., 0]
    else:
        x0 = y.copy()

    delta = getattr(phase, "delta", 0.0)

    def residual(x):
        return phase.grad_eta(x, eta) - y

    def jac(x):
        M = phase.mixed_hessian(x, eta)  # M[i,j] = d2 Phi / dx_i deta_j
        det = np.abs(np.linalg.det(M))
        if delta > 0 and np.min(det) < delta / 2:
            raise ConditionViolation(
                f"|det d^2_(x,eta) Phi| = {np.min(det):.3e} fell below delta/2 = {delta / 2:.3e}"
            )
        return np.swapaxes(M, -1, -2)  # Jacobian of grad_eta w.r.t. x

    x = _newton_solve(residual, jac, x0, tol, max_iter, "canonical_map")
    return x, phase.grad_x(x, eta)


def _inverse_canonical_map(phase, x, xi, tol=1e-10, max_iter=50):
    """Solve grad_x Phi(x, eta) = xi for eta, then y = grad_eta Phi."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    x, xi = np.broadcast_arrays(x, xi)

    if isinstance(phase, QuadraticPhase):
        eta0 = np.linalg.solve(
            np.broadcast_to(phase.B.T, x.shape + (phase.d,)),
            (xi - x @ phase.A - phase.eta0)[..., None],
        )[..., 0]
    else:
        eta0 = xi.copy()

    def residual(eta):
        return phase.grad_x(x, eta) - xi

    def jac(eta):
        return phase.mixed_hessian(x, eta)  # Jacobian of grad_x w.r.t. eta

    eta = _newton_solve(residual, jac, eta0, tol, max_iter, "inverse canonical_map")
    return phase.grad_eta(x, eta), eta


@dataclass
class CanonicalMap:
    """Canonical transformation chi: (y, eta) -> (x, xi) on phase space.

    For quadratic phases `affine` holds (S, tau) with chi(z) = S z + tau;
    otherwise points are mapped by the Newton solve.
    """

    phase: object
    affine: tuple = None

    @property
    def d(self):
        return self.phase.d

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.affine is not None:
            S, tau = self.affine
            return z @ S.T + tau
        x, xi = canonical_map(self.phase, z[..., : self.d], z[..., self.d :])
        return np.concatenate([x, xi], axis=-1)

    def inverse(self, w):
        w = np.asarray(w, dtype=float)
        if self.affine is not None:
            S, tau = self.affine
            return np.linalg.solve(
                np.broadcast_to(S, w.shape[:-1] + S.shape), (w - tau)[..., None]
            )[..., 0]
        y, eta = _inverse_canonical_map(self.phase, w[..., : self.d], w[..., self.d :])
        return np.concatenate([y, eta], axis=-1)

    def jacobian(self, z):
        """Jacobian d chi / d(y, eta), shape (..., 2d, 2d)."""
        z = np.asarray(z, dtype=float)
        if self.affine is not None:
            S, _ = self.affine
            return np.broadcast_to(S, z.shape[:-1] + S.shape).copy()
        d = self.d
        w = self(z)
        x, eta = w[..., :d], z[..., d:]
        M = self.phase.mixed_hessian(x, eta)
        Hxx = self.phase.hess_xx(x, eta)
        Hee = self.phase.hess_ee(x, eta)
        MT_inv = np.linalg.inv(np.swapaxes(M, -1, -2))
        dx_dy = MT_inv
        dx_de = -np.einsum("...ij,...jk->...ik", MT_inv, Hee)
        dxi_dy = np.einsum("...ij,...jk->...ik", Hxx, dx_dy)
        dxi_de = np.einsum("...ij,...jk->...ik", Hxx, dx_de) + M
        top = np.concatenate([dx_dy, dx_de], axis=-1)
        bottom = np.concatenate([dxi_dy, dxi_de], axis=-1)
        return np.concatenate([top, bottom], axis=-2)

    def bilipschitz_constant(self, extent=8.0, n_samples=200, seed=0):
        """Sampled two-sided Lipschitz constant K of chi on a box."""
        rng = np.random.default_rng(seed)
        z1 = rng.uniform(-extent, extent, size=(n_samples, 2 * self.d))
        z2 = rng.uniform(-extent, extent, size=(n_samples, 2 * self.d))
        num = np.linalg.norm(self(z1) - self(z2), axis=-1)
        den = np.linalg.norm(z1 - z2, axis=-1)
        keep = den > 1e-9
        ratios = num[keep] / den[keep]
        return float(max(np.max(ratios), 1.0 / np.min(ratios)))


def canonical_map_quadratic(qp: QuadraticPhase) -> CanonicalMap:
    """Closed-form affine canonical map of a quadratic phase.

    Block form [[B^-1, -B^-1 C], [A B^-1, B^T - A B^-1 C]] plus the affine
    shift (B^-1 x0, A B^-1 x0 + eta0).
    """
    if abs(np.linalg.det(qp.B)) < 1e-14:
        raise ContractViolation("singular B: no canonical map")
    Binv = np.linalg.inv(qp.B)
    top = np.concatenate([Binv, -Binv @ qp.C], axis=1)
    bottom = np.concatenate([qp.A @ Binv, qp.B.T - qp.A @ Binv @ qp.C], axis=1)
    S = np.concatenate([top, bottom], axis=0)
    tau = np.concatenate([Binv @ qp.x0, qp.A @ Binv @ qp.x0 + qp.eta0])
    return CanonicalMap(qp, affine=(S, tau))


def as_canonical_map(phase) -> CanonicalMap:
    """Canonical map of any phase: affine when quadratic, Newton otherwise."""
    if isinstance(phase, QuadraticPhase):
        return canonical_map_quadratic(phase)
    return CanonicalMap(phase)


def _sample_box(d, extent, n_samples, seed):
    sampler = qmc.Halton(d=d, scramble=True, seed=seed)
    u = sampler.random(n_samples)
    return (2 * u - 1) * extent


@dataclass
class PhaseConditionReport:
    """Sampled sups of the phase conditions (i)-(iii) on a box.

    Sampling is a desk-scale surrogate for the paper-style global bounds;
    growth_flag reports whether the second-derivative sup grew by more than
    1.5x from the half box to the full box.
    """

    phase_name: str
    box_extent: float
    sup_d2: float
    sup_d3: float
    min_det_mixed: float
    delta_declared: float
    delta_ok: bool
    growth_flag: bool
    grad_consistency: float = 0.0

    def as_dict(self):
        return {
            "phase": self.phase_name,
            "box_extent": self.box_extent,
            "sup_d2": self.sup_d2,
            "sup_d3": self.sup_d3,
            "min_det_mixed": self.min_det_mixed,
            "delta_declared": self.delta_declared,
            "delta_ok": self.delta_ok,
            "growth_flag": self.growth_flag,
            "grad_consistency": self.grad_consistency,
        }


def _second_derivative_stats(phase, pts, fd_step=1e-4):
    d = phase.d
    x, eta = pts[:, :d], pts[:, d:]
    if isinstance(phase, QuadraticPhase):
        Hxx = np.broadcast_to(phase.A, (len(pts), d, d))
        Hee = np.broadcast_to(phase.C, (len(pts), d, d))
        M = np.broadcast_to(phase.B.T, (len(pts), d, d))
    else:
        Hxx = _fd_jacobian(lambda u: phase.grad_x(u, eta), x, fd_step)
        Hee = _fd_jacobian(lambda u: phase.grad_eta(x, u), eta, fd_step)
        M = phase.mixed_hessian(x, eta)
    sup_d2 = max(np.max(np.abs(Hxx)), np.max(np.abs(Hee)), np.max(np.abs(M)))
    det = np.abs(np.linalg.det(M))
    return float(sup_d2), float(np.min(det))


def _third_derivative_sup(phase, pts, fd_step=1e-3):
    if isinstance(phase, QuadraticPhase):
        return 0.0
    d = phase.d
    x, eta = pts[:, :d], pts[:, d:]
    sup = 0.0
    for j in range(d):
        e = np.zeros(d)
        e[j] = fd_step
        for block in (
            lambda u: phase.mixed_hessian(u, eta),
            lambda u: _fd_jacobian(lambda v: phase.grad_x(v, eta), u, fd_step),
        ):
            deriv = (block(x + e) - block(x - e)) / (2 * fd_step)
            sup = max(sup, float(np.max(np.abs(deriv))))
        deriv = (phase.mixed_hessian(x, eta + e) - phase.mixed_hessian(x, eta - e)) / (2 * fd_step)
        sup = max(sup, float(np.max(np.abs(deriv))))
        hee = (
            _fd_jacobian(lambda v: phase.grad_eta(x, v), eta + e, fd_step)
            - _fd_jacobian(lambda v: phase.grad_eta(x, v), eta - e, fd_step)
        ) / (2 * fd_step)
        sup = max(sup, float(np.max(np.abs(hee))))
    return sup


def check_phase_conditions(phase, box_extent=8.0, n_samples=100, seed=0) -> PhaseConditionReport:
    """Report sampled sups of |d^2 Phi|, |d^3 Phi| and min |det d^2_{x,eta} Phi|.

    Report-only: nothing is raised; delta_ok records whether the sampled
    determinant stays above delta/2.
    """
    d = phase.d
    pts = _sample_box(2 * d, box_extent, n_samples, seed)
    sup_d2, min_det = _second_derivative_stats(phase, pts)
    sup_d3 = _third_derivative_sup(phase, pts)
    half = _sample_box(2 * d, box_extent / 2, n_samples, seed + 1)
    sup_d2_half, _ = _second_derivative_stats(phase, half)
    growth = sup_d2 > 1.5 * max(sup_d2_half, 1e-12)

    grad_err = 0.0
    if not isinstance(phase, QuadraticPhase):
        x, eta = pts[:, :d], pts[:, d:]
        h = 1e-5
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            fd_x = (phase.value(x + e, eta) - phase.value(x - e, eta)) / (2 * h)
            fd_e = (phase.value(x, eta + e) - phase.value(x, eta - e)) / (2 * h)
            scale = 1.0 + np.abs(phase.grad_x(x, eta)[..., j])
            grad_err = max(grad_err, float(np.max(np.abs(fd_x - phase.grad_x(x, eta)[..., j]) / scale)))
            scale = 1.0 + np.abs(phase.grad_eta(x, eta)[..., j])
            grad_err = max(grad_err, float(np.max(np.abs(fd_e - phase.grad_eta(x, eta)[..., j]) / scale)))

    delta = getattr(phase, "delta", 0.0)
    return PhaseConditionReport(
        phase_name=getattr(phase, "name", "phase"),
        box_extent=box_extent,
        sup_d2=sup_d2,
        sup_d3=sup_d3,
        min_det_mixed=min_det,
        delta_declared=delta,
        delta_ok=bool(min_det >= delta / 2),
        growth_flag=bool(growth),
        grad_consistency=grad_err,
    )


@dataclass
class GradientDiameterReport:
    """Sampled sup over x, x', eta of |grad_x Phi(x,eta) - grad_x Phi(x',eta)|."""

    diameter: float
    diameter_doubled_box: float
    unbounded: bool


def x_gradient_diameter(phase, box_extent=8.0, n_samples=200, seed=0) -> GradientDiameterReport:
    """Diameter of the range of x -> grad_x Phi(x, eta), uniformly in eta.

    Boundedness of this quantity is the extra condition for mixed-norm
    boundedness; the doubled-box comparison flags growth (ratio > 1.5).
    """

    def diam(extent, seed_):
        pts = _sample_box(2 * phase.d + phase.d, extent, n_samples, seed_)
        x1, x2, eta = pts[:, : phase.d], pts[:, phase.d : 2 * phase.d], pts[:, 2 * phase.d :]
        g1 = phase.grad_x(x1, eta)
        g2 = phase.grad_x(x2, eta)
        return float(np.max(np.linalg.norm(g1 - g2, axis=-1)))

    d1 = diam(box_extent, seed)
    d2 = diam(2 * box_extent, seed + 1)
    if d1 < 1e-12 and d2 < 1e-12:
        return GradientDiameterReport(0.0, 0.0, False)
    return GradientDiameterReport(d1, d2, bool(d2 > 1.5 * max(d1, 1e-12)))


def _sine_phase(d, amplitude, name):
    a = float(amplitude)
    if not 0 <= a < 1:
        raise ContractViolation("sine perturbation amplitude must lie in [0, 1)")

    def fn(x, eta):
        return np.sum(x * eta + a * np.sin(x) * np.sin(eta), axis=-1)

    def grad_x(x, eta):
        return eta + a * np.cos(x) * np.sin(eta)

    def grad_eta(x, eta):
        return x + a * np.sin(x) * np.cos(eta)

    def mixed(x, eta):
        diag = 1.0 + a * np.cos(x) * np.cos(eta)
        shape = diag.shape[:-1]
        out = np.zeros(shape + (d, d))
        idx = np.arange(d)
        out[..., idx, idx] = diag
        return out

    def hxx(x, eta):
        diag = -a * np.sin(x) * np.sin(eta)
        out = np.zeros(diag.shape[:-1] + (d, d))
        idx = np.arange(d)
        out[..., idx, idx] = diag
        return out

    return GenericPhase(
        d=d,
        fn=fn,
        grad_x_fn=grad_x,
        grad_eta_fn=grad_eta,
        mixed_hessian_fn=mixed,
        hess_xx_fn=hxx,
        hess_ee_fn=hxx,
        delta=(1.0 - a) ** d,
        c2_bound=1.0 + a,
        c3_bound=a,
        name=name,
    )


CATALOG_NAMES = (
    "identity",
    "translation",
    "modulation",
    "dilation",
    "chirp",
    "free-schrodinger",
    "quadratic",
    "sine",
)


def phase_catalog(name, d=1, **params):
    """Built-in named phases selectable from configs and the CLI.

    identity          x.eta
    translation       (x - x0).eta                 (param x0, default 1)
    modulation        (eta + eta0).x               (param eta0, default 1)
    dilation          B x.eta                      (param B, default 2)
    chirp             x.eta + 1/2 A x.x            (param A, default 1)
    free-schrodinger  x.eta + 1/2 C eta.eta        (param C, default 1)
    quadratic         full (A, B, C, x0, eta0)
    sine              x.eta + a sin(x).sin(eta)    (param amplitude, default 0.5)
    """
    if name == "identity":
        return QuadraticPhase.make(d, name=name)
    if name == "translation":
        return QuadraticPhase.make(d, x0=params.get("x0", 1.0), name=name)
    if name == "modulation":
        return QuadraticPhase.make(d, eta0=params.get("eta0", 1.0), name=name)
    if name == "dilation":
        return QuadraticPhase.make(d, B=params.get("B", 2.0), name=name)
    if name == "chirp":
        return QuadraticPhase.make(d, A=params.get("A", 1.0), name=name)
    if name == "free-schrodinger":
        return QuadraticPhase.make(d, C=params.get("C", 1.0), name=name)
    if name == "quadratic":
        return QuadraticPhase.make(
            d,
            A=params.get("A", 0.0),
            B=params.get("B", 1.0),
            C=params.get("C", 0.0),
            x0=params.get("x0", 0.0),
            eta0=params.get("eta0", 0.0),
        )
    if name == "sine":
        return _sine_phase(d, params.get("amplitude", 0.5), name)
    raise ConfigError(f"unknown phase {name!r}; catalog: {', '.join(CATALOG_NAMES)}")
