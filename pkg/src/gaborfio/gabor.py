"""Short-time Fourier transform and Gabor frames on separable lattices.

A lattice is alpha Z^d x beta Z^d truncated to the grid torus; window systems
are g_{m,n} = M_n T_m g.  The frame operator is materialized as a dense
n^d x n^d matrix (desk scale), from which frame bounds, the canonical dual
window gamma = S^-1 g and the tight window S^-1/2 g are computed by a
Hermitian eigendecomposition.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, NotAFrameError
from .grid import Grid, SampledFunction, fourier_transform

__all__ = [
    "Lattice",
    "STFTField",
    "GaborSystem",
    "MixedNormSpec",
    "stft",
    "window_matrix",
    "freq_window_matrix",
    "frame_operator",
    "frame_bounds",
    "dual_window",
    "tight_window",
    "gabor_system",
    "analyze",
    "synthesize",
    "gram_matrix",
    "mixed_seq_norm",
]


@dataclass(frozen=True)
class Lattice:
    """Time-frequency lattice alpha Z^d x beta Z^d on a grid torus.

    alpha must be an integer multiple of dx dividing L; beta an integer
    multiple of the frequency spacing dividing the full band width.
    Positions are enumerated over symmetric representatives [-L/2, L/2),
    frequencies over [-band, band).
    """

    grid: Grid
    alpha: float
    beta: float

    def __post_init__(self):
        g = self.grid
        for value, spacing, extent, name in (
            (self.alpha, g.dx, g.L, "alpha"),
            (self.beta, g.deta, 2 * g.band, "beta"),
        ):
            if value <= 0:
                raise ContractViolation(f"{name} must be positive")
            ratio = value / spacing
            if abs(ratio - round(ratio)) > 1e-9:
                raise ContractViolation(f"{name}={value} is not a multiple of the grid spacing {spacing}")
            count = extent / value
            if abs(count - round(count)) > 1e-9:
                raise ContractViolation(f"{name}={value} does not divide the grid extent {extent}")

    @property
    def density(self):
        return self.alpha * self.beta

    @property
    def n_m_axis(self):
        return int(round(self.grid.L / self.alpha))

    @property
    def n_n_axis(self):
        return int(round(2 * self.grid.band / self.beta))

    @property
    def m_axis(self):
        k = self.n_m_axis
        return self.alpha * (np.arange(k) - k // 2)

    @property
    def n_axis(self):
        k = self.n_n_axis
        return self.beta * (np.arange(k) - k // 2)

    @property
    def n_m(self):
        """Number of position lattice points, (L/alpha)^d."""
        return self.n_m_axis**self.grid.d

    @property
    def n_n(self):
        return self.n_n_axis**self.grid.d

    @property
    def size(self):
        return self.n_m * self.n_n

    def m_points(self):
        """Position lattice coordinates, shape (n_m, d)."""
        mesh = np.meshgrid(*([self.m_axis] * self.grid.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def n_points(self):
        mesh = np.meshgrid(*([self.n_axis] * self.grid.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def points(self):
        """All lattice points (m, n) in m-major order, shape (size, 2d)."""
        mp = self.m_points()
        np_ = self.n_points()
        m_rep = np.repeat(mp, self.n_n, axis=0)
        n_rep = np.tile(np_, (self.n_m, 1))
        return np.concatenate([m_rep, n_rep], axis=1)


@dataclass
class STFTField:
    """V_g f sampled on (a subset of) grid positions x full frequency grid."""

    grid: Grid
    values: np.ndarray  # (N_x, N_eta)
    x_points: np.ndarray  # (N_x, d)
    eta_points: np.ndarray  # (N_eta, d)
    x_weight: float  # Riemann weight per x sample
    eta_weight: float

    def l2_norm(self):
        return np.sqrt(self.x_weight * self.eta_weight) * np.linalg.norm(self.values)


def stft(f: SampledFunction, g: SampledFunction, x_stride: int = 1) -> STFTField:
    """V_g f(x, eta) = dx^d sum_t f(t) conj(g(t-x)) e^(-2 pi i eta.t).

    One FFT per retained time shift; x_stride subsamples the shift positions
    (the frequency grid is always the full centered grid).
    """
    if f.side != "time" or g.side != "time":
        raise ContractViolation("stft expects time-side functions")
    if f.grid != g.grid:
        raise ContractViolation("grid mismatch")
    grid = f.grid
    n, d = grid.n, grid.d
    if d == 1:
        shift_idx = np.arange(0, n, x_stride)
        steps = shift_idx - n // 2
        t_idx = np.arange(n)
        rolled = g.values[(t_idx[:, None] - steps[None, :]) % n]
        prod = np.fft.ifftshift(f.values[:, None] * np.conj(rolled), axes=0)
        V = grid.dx * np.fft.fftshift(np.fft.fft(prod, axis=0), axes=0)
        return STFTField(
            grid,
            V.T,
            grid.x[shift_idx, None],
            grid.eta[:, None],
            grid.dx * x_stride,
            grid.deta,
        )
    # d == 2: loop over retained shifts, one FFT2 each
    ax = np.arange(0, n, x_stride)
    xs = grid.x[ax]
    rows = []
    pts = []
    for i1 in ax:
        for i2 in ax:
            shifted = np.roll(g.values, (i1 - n // 2, i2 - n // 2), axis=(0, 1))
            prod = np.fft.ifftshift(f.values * np.conj(shifted))
            V = grid.dx**2 * np.fft.fftshift(np.fft.fft2(prod))
            rows.append(V.ravel())
    pts = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    return STFTField(
        grid,
        np.array(rows),
        pts,
        grid.eta_points(),
        (grid.dx * x_stride) ** 2,
        grid.deta**2,
    )


def window_matrix(g: SampledFunction, lat: Lattice) -> np.ndarray:
    """Columns are the samples of g_{m,n} = M_n T_m g, m-major order."""
    grid = lat.grid
    mp = lat.m_points()
    rolled = np.empty((grid.size, lat.n_m), dtype=complex)
    for i, m in enumerate(mp):
        steps = tuple(int(round(c / grid.dx)) for c in m)
        rolled[:, i] = np.roll(g.values, steps, axis=tuple(range(grid.d))).ravel()
    phases = np.exp(2j * np.pi * grid.x_points() @ lat.n_points().T)  # (n^d, N_n)
    W = rolled[:, :, None] * phases[:, None, :]
    return W.reshape(grid.size, lat.size)


def freq_window_matrix(g: SampledFunction, lat: Lattice) -> np.ndarray:
    """Columns are the Fourier transforms of g_{m,n}: T_n M_{-m} ghat, exactly."""
    grid = lat.grid
    ghat = fourier_transform(g).values
    np_pts = lat.n_points()
    rolled = np.empty((grid.size, lat.n_n), dtype=complex)
    for i, nu in enumerate(np_pts):
        steps = tuple(int(round(c / grid.deta)) for c in nu)
        rolled[:, i] = np.roll(ghat, steps, axis=tuple(range(grid.d))).ravel()
    mp = lat.m_points()
    mod = np.exp(-2j * np.pi * grid.eta_points() @ mp.T)  # (n^d, N_m)
    cross = np.exp(2j * np.pi * mp @ np_pts.T)  # (N_m, N_n)
    W = np.einsum("tm,tn,mn->tmn", mod, rolled, cross)
    return W.reshape(grid.size, lat.size)


def frame_operator(g: SampledFunction, lat: Lattice) -> np.ndarray:
    """Dense matrix of S_g f = sum <f, g_{m,n}> g_{m,n} in the sample basis."""
    W = window_matrix(g, lat)
    S = lat.grid.dx**lat.grid.d * (W @ W.conj().T)
    return S


def frame_bounds(g: SampledFunction, lat: Lattice):
    """Extreme eigenvalues (A, B) of the frame operator."""
    evals = np.linalg.eigvalsh(frame_operator(g, lat))
    return float(evals[0]), float(evals[-1])


@dataclass
class GaborSystem:
    """Window + lattice with precomputed dual/tight windows and frame bounds."""

    g: SampledFunction
    lattice: Lattice
    bounds: tuple
    gamma: SampledFunction
    tight: SampledFunction
    meta: dict = field(default_factory=dict)


def _frame_decomposition(g, lat):
    S = frame_operator(g, lat)
    evals, evecs = np.linalg.eigh(S)
    A, B = float(evals[0]), float(evals[-1])
    if A < 1e-10 * B:
        raise NotAFrameError(
            f"not a frame on this grid: bounds A={A:.3e}, B={B:.3e}"
        )
    evals = np.maximum(evals, A * 1e-12)
    return evals, evecs, A, B


def dual_window(g: SampledFunction, lat: Lattice) -> SampledFunction:
    """Canonical dual window gamma = S^-1 g."""
    evals, evecs, _, _ = _frame_decomposition(g, lat)
    coeff = evecs.conj().T @ g.values.ravel()
    vals = evecs @ (coeff / evals)
    return SampledFunction(lat.grid, vals.reshape(lat.grid.shape), "time")


def tight_window(g: SampledFunction, lat: Lattice) -> SampledFunction:
    """Tight window S^-1/2 g, rescaled so the tight frame bound is exactly 1."""
    evals, evecs, _, _ = _frame_decomposition(g, lat)
    coeff = evecs.conj().T @ g.values.ravel()
    vals = evecs @ (coeff / np.sqrt(evals))
    gt = SampledFunction(lat.grid, vals.reshape(lat.grid.shape), "time")
    Wt = window_matrix(gt, lat)
    mean_bound = lat.grid.dx**lat.grid.d * np.linalg.norm(Wt) ** 2 / lat.grid.size
    gt.values = gt.values / np.sqrt(mean_bound)
    return gt


def gabor_system(g: SampledFunction, lat: Lattice) -> GaborSystem:
    """Build the full Gabor system; requires density alpha*beta <= 1/2."""
    if lat.density > 0.5 + 1e-12:
        raise ContractViolation(
            f"frame construction requires alpha*beta <= 1/2, got {lat.density}"
        )
    evals, evecs, A, B = _frame_decomposition(g, lat)
    coeff = evecs.conj().T @ g.values.ravel()
    gamma_vals = evecs @ (coeff / evals)
    tight_vals = evecs @ (coeff / np.sqrt(evals))
    gamma = SampledFunction(lat.grid, gamma_vals.reshape(lat.grid.shape), "time")
    gt = SampledFunction(lat.grid, tight_vals.reshape(lat.grid.shape), "time")
    Wt = window_matrix(gt, lat)
    mean_bound = lat.grid.dx**lat.grid.d * np.linalg.norm(Wt) ** 2 / lat.grid.size
    gt.values = gt.values / np.sqrt(mean_bound)
    return GaborSystem(g, lat, (A, B), gamma, gt)


def _pick_window(gsys: GaborSystem, window):
    if isinstance(window, SampledFunction):
        return window
    return {"given": gsys.g, "dual": gsys.gamma, "tight": gsys.tight}[window]


def analyze(gsys: GaborSystem, f: SampledFunction, window="given") -> np.ndarray:
    """Coefficient operator (C_g f)_{m,n} = <f, g_{m,n}>, shape (n_m, n_n)."""
    lat = gsys.lattice
    w = _pick_window(gsys, window)
    W = window_matrix(w, lat)
    c = lat.grid.dx**lat.grid.d * (W.conj().T @ f.values.ravel())
    return c.reshape(lat.n_m, lat.n_n)


def synthesize(gsys: GaborSystem, c: np.ndarray, window="given") -> SampledFunction:
    """Synthesis operator D_g c = sum c_{m,n} g_{m,n}."""
    lat = gsys.lattice
    c = np.asarray(c)
    if c.shape != (lat.n_m, lat.n_n):
        raise ContractViolation(f"coefficient shape {c.shape} != {(lat.n_m, lat.n_n)}")
    w = _pick_window(gsys, window)
    W = window_matrix(w, lat)
    vals = W @ c.ravel()
    return SampledFunction(lat.grid, vals.reshape(lat.grid.shape), "time")


def gram_matrix(g: SampledFunction, lat: Lattice) -> np.ndarray:
    """G[(m',n'), (m,n)] = <g_{m,n}, g_{m',n'}> over the full lattice."""
    W = window_matrix(g, lat)
    return lat.grid.dx**lat.grid.d * (W.conj().T @ W)


@dataclass(frozen=True)
class MixedNormSpec:
    """Mixed-norm exponents (p, q) and polynomial weight exponent s >= 0."""

    p: float
    q: float
    s: float = 0.0

    def __post_init__(self):
        for e in (self.p, self.q):
            if not (1 <= e):
                raise ContractViolation("exponents must lie in [1, inf]")
        if self.s < 0:
            raise ContractViolation("weight exponent s must be >= 0")


def _reduce(a, exponent, axis, weight=None):
    """One layer of an l^p reduction with optional Riemann weight."""
    if np.isinf(exponent):
        return np.max(a, axis=axis)
    w = 1.0 if weight is None else weight
    return (w * np.sum(a**exponent, axis=axis)) ** (1.0 / exponent)


def mixed_seq_norm(c: np.ndarray, spec: MixedNormSpec, lattice: Lattice = None) -> float:
    """l^{p,q}_{v_s} norm: inner l^p over m (rows), outer l^q over n (columns).

    For s > 0 the entries are weighted by v_s(m, n) = (1 + |m|^2 + |n|^2)^(s/2),
    which requires the lattice for its coordinates.
    """
    a = np.abs(np.asarray(c, dtype=complex))
    if a.ndim != 2:
        raise ContractViolation("coefficient array must be 2-d (m, n)")
    if spec.s > 0:
        if lattice is None:
            raise ContractViolation("weighted norm needs the lattice coordinates")
        m2 = np.sum(lattice.m_points() ** 2, axis=1)
        n2 = np.sum(lattice.n_points() ** 2, axis=1)
        w = (1.0 + m2[:, None] + n2[None, :]) ** (spec.s / 2)
        a = a * w
    inner = _reduce(a, spec.p, axis=0)
    return float(_reduce(inner, spec.q, axis=0))
