"""Oscillatory-integral operators on the grid and their Gabor matrices.

The operator T f(x) = integral e^(2 pi i Phi(x,eta)) sigma(x,eta) fhat(eta) deta
is discretized by plain Riemann summation over the frequency grid (exact for
band-limited data up to the checked aliasing mass).  Its matrix with respect
to a Gabor system, entry[(m',n'), (m,n)] = <T g_{m,n}, g_{m',n'}>, is computed
by two independent routes:

* direct: one operator application per lattice column, analyzed against the
  window shifts (all dense matmuls at desk scale);
* symbol-stft: the exact windowed-transform identity

      <T g_{m,n}, g_{m',n'}> =
          e^(2 pi i (Phi(m',n) - n'.m')) * J(n' - grad_x Phi(m',n),
                                             m  - grad_eta Phi(m',n)),

  where J is the (non-conjugated) windowed transform of the symbol against
  Psi_{(m',n)}(u) = e^(2 pi i Phi_2,(m',n)(u)) (conj g x ghat)(u) and Phi_2 is
  the second-order Taylor remainder of the phase at (m', n).  One 2d-FFT per
  (m', n) yields all entries of that block exactly when the phase gradients
  land on the dual grid; otherwise a direct nonuniform transform is used.

Both routes produce identical complex matrices up to rounding; entries below
eps * max|entry| are dropped from the sparse store.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .errors import AliasingError, ConfigError, ContractViolation
from .gabor import GaborSystem, Lattice, freq_window_matrix, window_matrix
from .grid import Grid, SampledFunction, fourier_transform
from .phase import QuadraticPhase

__all__ = [
    "ConstantSymbol",
    "GridSymbol",
    "CallableSymbol",
    "symbol_catalog",
    "DiscretizedFIO",
    "apply_fio",
    "GaborMatrix",
    "gabor_matrix_direct",
    "gabor_matrix_via_symbol_stft",
    "apply_via_matrix",
]


# ----------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class ConstantSymbol:
    """sigma identically equal to `value` (default 1)."""

    value: complex = 1.0
    name: str = "one"

    def kernel_values(self, grid: Grid):
        return self.value

    def sample(self, grid: Grid) -> "GridSymbol":
        vals = np.full((grid.size, grid.size), complex(self.value))
        return GridSymbol(grid, vals, name=self.name)


@dataclass
class GridSymbol:
    """Symbol given by complex samples sigma(x_j, eta_k), shape (n^d, n^d)."""

    grid: Grid
    values: np.ndarray
    name: str = "grid-symbol"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.size, self.grid.size):
            raise ContractViolation(
                f"grid symbol must have shape {(self.grid.size, self.grid.size)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ContractViolation("grid symbol contains non-finite values")

    def kernel_values(self, grid: Grid):
        if grid != self.grid:
            raise ContractViolation("symbol sampled on a different grid")
        return self.values

    def sample(self, grid: Grid) -> "GridSymbol":
        if grid != self.grid:
            raise ContractViolation("symbol sampled on a different grid")
        return self


@dataclass
class CallableSymbol:
    """Smooth symbol given by an evaluator sigma(x, eta) with x, eta (..., d).

    Optional derivative evaluators (keyed like 'dx0', 'deta0') are
    cross-checked against finite differences of the evaluator.
    """

    fn: callable
    name: str = "callable-symbol"
    derivatives: dict = field(default_factory=dict)

    def eval(self, x, eta):
        return np.asarray(self.fn(np.asarray(x, dtype=float), np.asarray(eta, dtype=float)))

    def kernel_values(self, grid: Grid):
        X = grid.x_points()[:, None, :]
        E = grid.eta_points()[None, :, :]
        return self.eval(X, E)

    def sample(self, grid: Grid) -> GridSymbol:
        return GridSymbol(grid, self.kernel_values(grid), name=self.name)

    def fd_consistency(self, points, h=1e-4):
        """Max relative error of declared derivatives vs finite differences."""
        worst = 0.0
        pts = np.asarray(points, dtype=float)
        d = pts.shape[-1] // 2
        x, eta = pts[..., :d], pts[..., d:]
        for key, dfn in self.derivatives.items():
            which, axis = key[:-1], int(key[-1])
            e = np.zeros(d)
            e[axis] = h
            if which == "dx":
                fd = (self.eval(x + e, eta) - self.eval(x - e, eta)) / (2 * h)
            elif which == "deta":
                fd = (self.eval(x, eta + e) - self.eval(x, eta - e)) / (2 * h)
            else:
                raise ContractViolation(f"unknown derivative key {key!r}")
            declared = np.asarray(dfn(x, eta))
            scale = 1.0 + np.abs(declared)
            worst = max(worst, float(np.max(np.abs(fd - declared) / scale)))
        return worst


def symbol_catalog(name, **params):
    """Named symbols: one, gaussian-x, gaussian-xeta, modulated, step-x."""
    if name == "one":
        return ConstantSymbol()
    if name == "gaussian-x":

        def fn(x, eta):
            return np.exp(-np.sum(x**2, axis=-1))

        return CallableSymbol(fn, name=name, derivatives={"dx0": lambda x, eta: -2 * x[..., 0] * fn(x, eta)})
    if name == "gaussian-xeta":

        def fn(x, eta):
            return np.exp(-np.sum(x**2, axis=-1) - np.sum(eta**2, axis=-1))

        return CallableSymbol(fn, name=name)
    if name == "modulated":
        a = np.atleast_1d(np.asarray(params.get("a", (1.0, 0.0)), dtype=float))

        def fn(x, eta, a=a):
            d = x.shape[-1]
            return np.exp(2j * np.pi * (x @ a[:d] + eta @ a[d : 2 * d]))

        return CallableSymbol(fn, name=name)
    if name == "step-x":
        width = float(params.get("width", 0.1))

        def fn(x, eta, w=width):
            return np.tanh(x[..., 0] / w) + 0.0j

        return CallableSymbol(fn, name=name)
    raise ConfigError(f"unknown symbol {name!r}")


# ----------------------------------------------------------------------------
# operator application


class DiscretizedFIO:
    """Kernel table K[j,k] = e^(2 pi i Phi(x_j, eta_k)) sigma(x_j, eta_k).

    Applying the operator is one matrix-vector product per input; the table
    costs O(n^(2d)) memory, which is the point of the desk-scale design.
    """

    def __init__(self, grid: Grid, phase, symbol=None):
        self.grid = grid
        self.phase = phase
        self.symbol = ConstantSymbol() if symbol is None else symbol
        X = grid.x_points()[:, None, :]
        E = grid.eta_points()[None, :, :]
        phivals = phase.value(X, E)
        sigma = self.symbol.kernel_values(grid)
        if not np.all(np.isfinite(phivals)):
            raise ContractViolation("NaN/inf in phase values on the grid")
        if not np.all(np.isfinite(np.asarray(sigma))):
            raise ContractViolation("NaN/inf in symbol values on the grid")
        self.kernel = np.exp(2j * np.pi * phivals) * sigma

    def apply(self, f: SampledFunction, check_aliasing=True) -> SampledFunction:
        if f.side != "time":
            raise ContractViolation("apply_fio expects a time-side input")
        if f.grid != self.grid:
            raise ContractViolation("grid mismatch")
        fhat = fourier_transform(f)
        if check_aliasing:
            _check_band_edge(fhat)
        out = self.kernel @ (self.grid.deta**self.grid.d * fhat.values.ravel())
        return SampledFunction(self.grid, out.reshape(self.grid.shape), "time")


def _check_band_edge(fhat: SampledFunction, rel_tol=1e-6, shell=2):
    grid = fhat.grid
    mask = np.zeros(grid.shape, dtype=bool)
    for a in range(grid.d):
        idx = [slice(None)] * grid.d
        idx[a] = slice(0, shell)
        mask[tuple(idx)] = True
        idx[a] = slice(grid.n - shell, grid.n)
        mask[tuple(idx)] = True
    total = np.linalg.norm(fhat.values)
    edge = np.linalg.norm(fhat.values[mask])
    if total > 0 and edge / total > rel_tol:
        raise AliasingError(
            f"spectral mass at band edge {edge / total:.2e} exceeds {rel_tol:.0e}"
        )


def apply_fio(phase, symbol, f: SampledFunction, check_aliasing=True) -> SampledFunction:
    """T f(x_j) = deta^d sum_k e^(2 pi i Phi(x_j, eta_k)) sigma(x_j, eta_k) fhat(eta_k)."""
    return DiscretizedFIO(f.grid, phase, symbol).apply(f, check_aliasing=check_aliasing)


# ----------------------------------------------------------------------------
# Gabor matrices


@dataclass
class GaborMatrix:
    """Sparse Gabor matrix of an operator over a lattice.

    Row/column flat index is m_index * n_n + n_index (m-major), matching the
    coefficient layout of analyze/synthesize.
    """

    lattice: Lattice
    matrix: scipy.sparse.csr_array
    eps: float
    route: str
    phase_name: str = ""
    symbol_name: str = ""

    @property
    def nnz(self):
        return self.matrix.nnz

    def max_abs(self):
        if self.matrix.nnz == 0:
            return 0.0
        return float(np.max(np.abs(self.matrix.data)))

    def dense(self):
        return self.matrix.toarray()

    def flat_index(self, mi, ni):
        return mi * self.lattice.n_n + ni

    def entry(self, mi_prime, ni_prime, mi, ni):
        return complex(self.matrix[self.flat_index(mi_prime, ni_prime), self.flat_index(mi, ni)])

    def coords(self):
        """(row lattice points, col lattice points, values) of stored entries."""
        coo = self.matrix.tocoo()
        pts = self.lattice.points()
        return pts[coo.row], pts[coo.col], coo.data


def _sparsify(dense, lat, eps, route, phase_name, symbol_name):
    amax = float(np.max(np.abs(dense))) if dense.size else 0.0
    if eps > 0 and amax > 0:
        dense = np.where(np.abs(dense) >= eps * amax, dense, 0.0)
    sp = scipy.sparse.csr_array(dense)
    sp.eliminate_zeros()
    return GaborMatrix(lat, sp, eps, route, phase_name, symbol_name)


def _resolve_window(gsys: GaborSystem, window):
    if isinstance(window, SampledFunction):
        return window
    return {"given": gsys.g, "dual": gsys.gamma, "tight": gsys.tight}[window]


def gabor_matrix_direct(phase, symbol, gsys: GaborSystem, eps=1e-8, window="tight") -> GaborMatrix:
    """Entries by applying the operator to every g_{m,n} and analyzing.

    entry[(m',n'), (m,n)] = dx^d sum_j (T g_{m,n})(x_j) conj(g_{m',n'}(x_j)).
    """
    lat = gsys.lattice
    grid = lat.grid
    g = _resolve_window(gsys, window)
    op = DiscretizedFIO(grid, phase, symbol)
    W = window_matrix(g, lat)
    What = freq_window_matrix(g, lat)
    columns = op.kernel @ (grid.deta**grid.d * What)
    dense = grid.dx**grid.d * (W.conj().T @ columns)
    return _sparsify(
        dense, lat, eps, "direct", getattr(phase, "name", ""), getattr(symbol, "name", "")
    )


def _phase_grad_tables(phase, m_pts, n_pts):
    """Phi, grad_x Phi, grad_eta Phi at all (m', n) pairs."""
    X = m_pts[:, None, :]
    E = n_pts[None, :, :]
    vals = phase.value(X, E)
    gx = phase.grad_x(X, E)
    ge = phase.grad_eta(X, E)
    return vals, gx, ge


def _remainder_grid(phase, z0_x, z0_e, Ux, Ue, val0, gx, ge):
    """Second-order Taylor remainder Phi(z0+u) - Phi(z0) - grad Phi(z0).u."""
    shifted = phase.value((z0_x + Ux)[:, None, :], (z0_e + Ue)[None, :, :])
    linear = (Ux @ gx)[:, None] + (Ue @ ge)[None, :]
    return shifted - val0 - linear


def gabor_matrix_via_symbol_stft(
    phase, symbol, gsys: GaborSystem, eps=1e-8, window="tight"
) -> GaborMatrix:
    """Entries from windowed transforms of the symbol (one FFT per (m', n)).

    Complex entries, including the unimodular prefactor, match the direct
    route up to rounding.  When a required transform argument does not land
    on the dual grid the block falls back to a direct nonuniform transform.
    """
    lat = gsys.lattice
    grid = lat.grid
    g = _resolve_window(gsys, window)
    sigma = symbol.sample(grid) if not isinstance(symbol, ConstantSymbol) else symbol

    ghat = fourier_transform(g)
    H = np.conj(g.values.ravel())[:, None] * ghat.values.ravel()[None, :]

    m_pts = lat.m_points()
    n_pts = lat.n_points()
    vals, gx_tab, ge_tab = _phase_grad_tables(phase, m_pts, n_pts)

    Ux = grid.x_points()
    Ue = grid.eta_points()

    quadratic = isinstance(phase, QuadraticPhase)
    if quadratic:
        # remainder is z0-independent: Phi_2(u) = 1/2 A ux.ux + B ux.ue + 1/2 C ue.ue
        phi2 = (
            0.5 * np.einsum("ui,ij,uj->u", Ux, phase.A, Ux)[:, None]
            + np.einsum("vi,ij,uj->uv", Ue, phase.B, Ux)
            + 0.5 * np.einsum("vi,ij,vj->v", Ue, phase.C, Ue)[None, :]
        )
        psi_shared = np.exp(2j * np.pi * phi2) * H

    measure = (grid.dx * grid.deta) ** d
    dense = np.zeros((lat.size, lat.size), dtype=complex)

    shared_J = None
    constant_sigma = isinstance(sigma, ConstantSymbol)
    if quadratic and constant_sigma:
        G = sigma.value * psi_shared
        shared_J = _centered_fft_2dgrid(G, grid, measure)

    for mi in range(lat.n_m):
        for ni in range(lat.n_n):
            z0x, z0e = m_pts[mi], n_pts[ni]
            val0 = vals[mi, ni]
            gx, ge = gx_tab[mi, ni], ge_tab[mi, ni]

            zeta1 = n_pts - gx  # rows: n' index
            zeta2 = m_pts - ge  # cols: m index

            if shared_J is not None:
                J = shared_J
                block = _gather_on_grid(J, grid, zeta1, zeta2)
            else:
                if quadratic:
                    psi = psi_shared
                else:
                    phi2 = _remainder_grid(phase, z0x, z0e, Ux, Ue, val0, gx, ge)
                    psi = np.exp(2j * np.pi * phi2) * H
                if constant_sigma:
                    G = sigma.value * psi
                else:
                    G = _rolled_symbol(sigma, grid, z0x, z0e) * psi
                block = _transform_block(G, grid, zeta1, zeta2, measure)

            scalar = np.exp(2j * np.pi * val0)
            rowph = np.exp(-2j * np.pi * (n_pts @ z0x))
            rows = mi * lat.n_n + np.arange(lat.n_n)
            cols = np.arange(lat.n_m) * lat.n_n + ni
            dense[np.ix_(rows, cols)] = scalar * rowph[:, None] * block

    return _sparsify(
        dense, lat, eps, "symbol-stft", getattr(phase, "name", ""), getattr(symbol, "name", "")
    )


def _rolled_symbol(sigma: GridSymbol, grid: Grid, z0x, z0e):
    """sigma(z0 + u) on the torus as a (n^d, n^d) array."""
    S = sigma.values.reshape(grid.shape + grid.shape)
    sx = [int(round(c / grid.dx)) for c in np.atleast_1d(z0x)]
    se = [int(round(c / grid.deta)) for c in np.atleast_1d(z0e)]
    rolled = np.roll(S, shift=tuple(-s for s in sx + se), axis=tuple(range(2 * grid.d)))
    return rolled.reshape(grid.size, grid.size)


def _centered_fft_2dgrid(G, grid: Grid, measure):
    """Centered DFT of G(u) over both u_x and u_eta axes, Riemann-weighted."""
    shaped = G.reshape(grid.shape + grid.shape)
    out = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(shaped)))
    return measure * out


def _on_grid_indices(grid: Grid, zeta, spacing):
    steps = zeta / spacing
    rounded = np.rint(steps)
    ok = np.max(np.abs(steps - rounded)) <= 1e-6
    idx = (rounded.astype(int) + grid.n // 2) % grid.n
    return ok, idx


def _gather_on_grid(J, grid: Grid, zeta1, zeta2):
    """Look up J at zeta = (zeta1, zeta2); exact by DFT periodicity in zeta."""
    ok1, i1 = _on_grid_indices(grid, zeta1, grid.deta)
    ok2, i2 = _on_grid_indices(grid, zeta2, grid.dx)
    if not (ok1 and ok2):
        raise ContractViolation("transform argument off the dual grid")
    ix = tuple(i1[:, a][:, None] for a in range(grid.d)) + tuple(
        i2[:, a][None, :] for a in range(grid.d)
    )
    return J[ix]


def _transform_block(G, grid: Grid, zeta1, zeta2, measure):
    """J(zeta1, zeta2) for one block: FFT + gather, or nonuniform fallback."""
    ok1, _ = _on_grid_indices(grid, zeta1, grid.deta)
    ok2, _ = _on_grid_indices(grid, zeta2, grid.dx)
    if ok1 and ok2:
        J = _centered_fft_2dgrid(G, grid, measure)
        return _gather_on_grid(J, grid, zeta1, zeta2)
    E1 = np.exp(-2j * np.pi * (grid.x_points() @ zeta1.T))  # (n^d, N_n)
    E2 = np.exp(-2j * np.pi * (grid.eta_points() @ zeta2.T))  # (n^d, N_m)
    return measure * (E1.T @ G @ E2)


def apply_via_matrix(gm: GaborMatrix, c: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product on coefficient arrays (n_m, n_n)."""
    lat = gm.lattice
    c = np.asarray(c, dtype=complex)
    if c.shape != (lat.n_m, lat.n_n):
        raise ContractViolation(f"coefficient shape {c.shape} != {(lat.n_m, lat.n_n)}")
    out = gm.matrix @ c.ravel()
    return out.reshape(lat.n_m, lat.n_n)
