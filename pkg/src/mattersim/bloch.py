"""Fixed-kappa Hamiltonian in the plane-wave basis and Bloch band structure."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceError, max_workers

MAX_QL_ITERATIONS = 50


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """H = (kappa + 2p)^2 on the diagonal, q on both off-diagonals."""

    kappa: float
    q: float
    p_min: int
    p_max: int

    @property
    def orders(self) -> np.ndarray:
        return np.arange(self.p_min, self.p_max + 1)

    @property
    def size(self) -> int:
        return self.p_max - self.p_min + 1

    @property
    def diagonal(self) -> np.ndarray:
        return (self.kappa + 2.0 * self.orders) ** 2

    @property
    def off_diagonal(self) -> np.ndarray:
        return np.full(self.size - 1, float(self.q))

    def dense(self) -> np.ndarray:
        return (np.diag(self.diagonal) + np.diag(self.off_diagonal, 1)
                + np.diag(self.off_diagonal, -1))


def default_p_span(q: float) -> int:
    return max(8, math.ceil(2 * math.sqrt(q)) + 6)


def build_hamiltonian(kappa: float, q: float, p_span: int) -> TridiagonalHamiltonian:
    """Truncated Hamiltonian on orders ``-p_span..p_span``.

    ``kappa`` must already be folded into the first Brillouin zone (-1, 1].
    """
    if not (-1.0 < kappa <= 1.0):
        raise ValueError(f"kappa={kappa} outside the first Brillouin zone (-1, 1]")
    if not (math.isfinite(q) and q >= 0):
        raise ValueError(f"q must be finite and >= 0, got {q}")
    if int(p_span) != p_span or p_span < 1:
        raise ValueError(f"p_span must be an integer >= 1, got {p_span}")
    return TridiagonalHamiltonian(float(kappa), float(q), -int(p_span), int(p_span))


def tridiagonal_eigh(diag, offdiag, tol=None, max_iter=MAX_QL_ITERATIONS):
    """Eigen-decomposition of a real symmetric tridiagonal matrix.

    Implicit-shift QL with Wilkinson-type shifts, accumulating the plane
    rotations into the eigenvector matrix.

    Parameters
    ----------
    diag : array_like, shape (n,)
        Main diagonal.
    offdiag : array_like, shape (n-1,)
        Sub/super diagonal.
    tol : float, optional
        Relative deflation threshold; defaults to machine epsilon.
    max_iter : int
        Sweep cap per eigenvalue.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in ascending order.
    v : ndarray, shape (n, n)
        Orthonormal eigenvectors, ``v[:, i]`` belongs to ``w[i]``.
    """
    d = np.array(diag, dtype=float)
    n = d.size
    e = np.zeros(n)
    e[:n - 1] = np.asarray(offdiag, dtype=float)
    z = np.eye(n)
    eps = np.finfo(float).eps if tol is None else tol

    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceError(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                z[:, i] = c * zi - s * z[:, i + 1]
                z[:, i + 1] = s * zi + c * z[:, i + 1]
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def eigensystem(h: TridiagonalHamiltonian):
    """Ascending eigenvalues and orthonormal eigenvectors of ``h``."""
    return tridiagonal_eigh(h.diagonal, h.off_diagonal)


@dataclass(frozen=True)
class BandStructure:
    kappa: np.ndarray
    energies: np.ndarray  # shape (n_kappa, n_bands)
    q: float

    @property
    def n_bands(self) -> int:
        return self.energies.shape[1]

    def rows(self):
        """Yield ``(kappa, band, energy)`` in grid order."""
        for i, k in enumerate(self.kappa):
            for b in range(self.n_bands):
                yield float(k), b, float(self.energies[i, b])


def kappa_grid(n_kappa: int) -> np.ndarray:
    """Uniform grid over (-1, 1]: kappa = 1 included, kappa = -1 excluded."""
    if n_kappa < 2:
        raise ValueError("n_kappa must be >= 2")
    return -1.0 + 2.0 * np.arange(1, n_kappa + 1) / n_kappa


def band_structure(q: float, n_kappa: int, n_bands: int, p_span: int | None = None,
                   workers: int | None = None) -> BandStructure:
    """Lowest ``n_bands`` Bloch energies on the standard kappa grid.

    Evaluation over kappa may run on a thread pool (``MATTERSIM_THREADS``
    caps it); results are always assembled in grid order.
    """
    if p_span is None:
        p_span = max(default_p_span(q), math.ceil(n_bands / 2) + 2)
    if n_bands < 1 or n_bands > 2 * p_span:
        raise ValueError(f"n_bands must be in [1, 2*p_span={2 * p_span}]")
    grid = kappa_grid(n_kappa)

    def lowest(k):
        w, _ = eigensystem(build_hamiltonian(float(k), q, p_span))
        return w[:n_bands]

    workers = max_workers() if workers is None else workers
    if workers > 1 and n_kappa > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lowest, grid))
    else:
        rows = [lowest(k) for k in grid]
    return BandStructure(grid, np.array(rows), float(q))


def ground_energy_shift(q: float, tol: float = 1e-12) -> float:
    """Lowest Bloch energy at kappa = 0, converged in the basis size."""
    if not (math.isfinite(q) and q >= 0):
        raise ValueError(f"q must be finite and >= 0, got {q}")
    if q == 0:
        return 0.0
    span = default_p_span(q)
    prev = eigensystem(build_hamiltonian(0.0, q, span))[0][0]
    while True:
        span += 2
        cur = eigensystem(build_hamiltonian(0.0, q, span))[0][0]
        if abs(cur - prev) < tol:
            return float(cur)
        if span > 400:
            raise ConvergenceError("ground energy did not converge in basis size")
        prev = cur
