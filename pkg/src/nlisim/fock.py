"""Exact single-sector dynamics of the trilinear pump/signal/idler coupling.

The three-mode down-conversion dynamics conserves the combination
``n_pump + n_signal`` (and creates signal and idler photons in pairs), so
the evolution splits into independent sectors labelled by the total pump
photon number ``N``.  Within one sector the state is a vector of ``N + 1``
complex coefficients ``c_nu`` and the generator is a Hermitian tridiagonal
matrix with zero diagonal and off-diagonal entries
``(nu + 1) * sqrt(N - nu) * exp(i * theta)``.

The phase ``theta`` enters only through a diagonal gauge transform
``D(theta) = diag(exp(i * nu * theta))``, so the real symmetric matrix for
``theta = 0`` is diagonalized once per sector and reused for every phase
and interaction strength.
"""

from __future__ import annotations

import os
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

CACHE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class FockSector:
    """Basis |N - nu>_p |nu>_s |nu>_i for a fixed total pump photon number."""

    n_total: int

    def __post_init__(self):
        if int(self.n_total) != self.n_total or self.n_total < 0:
            raise ValueError(f"n_total must be a nonnegative integer, got {self.n_total!r}")
        object.__setattr__(self, "n_total", int(self.n_total))

    @property
    def dim(self) -> int:
        return self.n_total + 1


@dataclass
class StateVector:
    """Complex coefficients c_nu over one sector."""

    sector: FockSector
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.sector.dim,):
            raise ValueError(
                f"coefficient length {self.coeffs.shape} does not match sector dim {self.sector.dim}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.sector, self.coeffs.copy())


def basis_state(sector: FockSector, nu: int = 0, phase: float = 0.0) -> StateVector:
    """State with all population in |nu>, optionally with a global phase."""
    c = np.zeros(sector.dim, dtype=complex)
    c[nu] = np.exp(1j * phase)
    return StateVector(sector, c)


@dataclass(frozen=True)
class CouplingSpec:
    """Off-diagonal couplings (nu+1)*sqrt(N-nu); theta is kept separate."""

    sector: FockSector
    theta: float
    offdiag: np.ndarray


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-decomposition of the zero-phase coupling matrix of one sector."""

    sector: FockSector
    values: np.ndarray   # real eigenvalues, ascending
    vectors: np.ndarray  # orthonormal columns


def build_coupling(sector: FockSector, theta: float = 0.0) -> CouplingSpec:
    """Off-diagonal entries of the sector coupling matrix.

    Entry nu is (nu + 1) * sqrt(N - nu) for nu = 0 .. N-1; the recurrence
    terminates at nu = N because the coupling out of the last basis state
    vanishes.
    """
    n = sector.n_total
    nu = np.arange(n, dtype=float)
    offdiag = (nu + 1.0) * np.sqrt(n - nu)
    return CouplingSpec(sector=sector, theta=float(theta), offdiag=offdiag)


def coupling_matrix(coupling: CouplingSpec) -> np.ndarray:
    """Dense Hermitian matrix M(theta) of the coupling, mainly for tests."""
    dim = coupling.sector.dim
    m = coupling.offdiag * np.exp(1j * coupling.theta)
    mat = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim - 1)
    mat[idx + 1, idx] = m
    mat[idx, idx + 1] = np.conj(m)
    return mat


def diagonalize(coupling: CouplingSpec) -> SpectralDecomposition:
    """Eigenvalues and orthonormal eigenvectors of the zero-phase matrix."""
    dim = coupling.sector.dim
    diag = np.zeros(dim)
    try:
        values, vectors = eigh_tridiagonal(diag, coupling.offdiag)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - solver failure path
        raise RuntimeError(
            f"tridiagonal eigensolver failed for sector N={coupling.sector.n_total}: {exc}"
        ) from exc
    return SpectralDecomposition(sector=coupling.sector, values=values, vectors=vectors)


def _gauge(dim: int, theta: float) -> np.ndarray | None:
    if theta == 0.0:
        return None
    return np.exp(1j * theta * np.arange(dim))


def evolve_coeffs(c: np.ndarray, spec: SpectralDecomposition, tau: float, theta: float = 0.0) -> np.ndarray:
    """exp(-i tau M(theta)) applied to one coefficient vector."""
    g = _gauge(len(c), theta)
    x = c if g is None else np.conj(g) * c
    w = spec.vectors.T @ x
    w = np.exp(-1j * tau * spec.values) * w
    y = spec.vectors @ w
    return y if g is None else g * y


def evolve_taus(c: np.ndarray, spec: SpectralDecomposition, taus: np.ndarray, theta: float = 0.0) -> np.ndarray:
    """One input vector evolved at many interaction strengths; rows index tau."""
    taus = np.asarray(taus, dtype=float)
    g = _gauge(len(c), theta)
    x = c if g is None else np.conj(g) * c
    w0 = spec.vectors.T @ x
    w = np.exp(-1j * np.outer(taus, spec.values)) * w0
    y = w @ spec.vectors.T
    return y if g is None else y * g


def evolve_rows(rows: np.ndarray, spec: SpectralDecomposition, taus: np.ndarray, theta: float = 0.0) -> np.ndarray:
    """Row i of `rows` evolved for taus[i] at a shared phase theta."""
    taus = np.asarray(taus, dtype=float)
    g = _gauge(rows.shape[1], theta)
    x = rows if g is None else rows * np.conj(g)
    w = x @ spec.vectors
    w *= np.exp(-1j * np.outer(taus, spec.values))
    y = w @ spec.vectors.T
    return y if g is None else y * g


def evolve_thetas(c: np.ndarray, spec: SpectralDecomposition, tau: float, thetas: np.ndarray) -> np.ndarray:
    """One input vector evolved at a fixed tau for many phases; rows index theta."""
    thetas = np.asarray(thetas, dtype=float)
    g = np.exp(1j * np.outer(thetas, np.arange(len(c))))
    x = np.conj(g) * c[None, :]
    w = x @ spec.vectors
    w *= np.exp(-1j * tau * spec.values)[None, :]
    y = w @ spec.vectors.T
    return y * g


def propagate(state: StateVector, spectral: SpectralDecomposition, tau: float, theta: float = 0.0) -> StateVector:
    """Evolve a sector state by exp(-i tau M(theta))."""
    if state.sector != spectral.sector:
        raise ValueError(
            f"sector mismatch: state N={state.sector.n_total}, "
            f"decomposition N={spectral.sector.n_total}"
        )
    return StateVector(state.sector, evolve_coeffs(state.coeffs, spectral, tau, theta))


def ode_oracle(
    state: StateVector,
    coupling: CouplingSpec,
    tau: float,
    theta: float | None = None,
    step: float | None = None,
) -> StateVector:
    """Brute-force fixed-step RK4 integration of the coupled amplitude ODEs.

    Integrates i dc_nu/dtau = m_{nu-1} c_{nu-1} + conj(m_nu) c_{nu+1} with
    the explicit complex couplings m_nu = (nu+1) sqrt(N-nu) exp(i theta).
    Test fixture only; the production path is the spectral propagator.
    """
    if state.sector != coupling.sector:
        raise ValueError("sector mismatch between state and coupling")
    if theta is None:
        theta = coupling.theta
    if tau == 0.0:
        return state.copy()
    if step is None:
        step = abs(tau) / 1e4
    if step <= 0:
        raise ValueError("step must be positive")

    n_steps = max(1, int(round(abs(tau) / step)))
    h = tau / n_steps
    m = coupling.offdiag * np.exp(1j * theta)
    mc = np.conj(m)

    def deriv(c):
        out = np.zeros_like(c)
        out[1:] = m * c[:-1]
        out[:-1] += mc * c[1:]
        out *= -1j
        return out

    c = state.coeffs.copy()
    for _ in range(n_steps):
        k1 = deriv(c)
        k2 = deriv(c + 0.5 * h * k1)
        k3 = deriv(c + 0.5 * h * k2)
        k4 = deriv(c + h * k3)
        c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return StateVector(state.sector, c)


class SpectralStore:
    """Per-sector memoization of spectral decompositions.

    Safe for concurrent reads; insertions are serialized.  If `directory`
    is set, decompositions are persisted as versioned .npz files and
    reloaded on later runs.  Corrupt files trigger a warning and a
    recomputation; an unwritable directory degrades to memory-only.
    """

    def __init__(self, directory: str | None = None):
        self.directory = directory
        self._memo: dict[int, SpectralDecomposition] = {}
        self._lock = threading.Lock()

    def get(self, n_total: int) -> SpectralDecomposition:
        with self._lock:
            spec = self._memo.get(n_total)
        if spec is not None:
            return spec
        if self.directory is not None:
            spec = self._load_disk(n_total)
        if spec is None:
            spec = diagonalize(build_coupling(FockSector(n_total)))
            if self.directory is not None:
                self._save_disk(n_total, spec)
        with self._lock:
            self._memo.setdefault(n_total, spec)
            return self._memo[n_total]

    def clear_memory(self):
        with self._lock:
            self._memo.clear()

    def _path(self, n_total: int) -> str:
        return os.path.join(self.directory, f"tridiag-n{n_total}-v{CACHE_FORMAT_VERSION}.npz")

    def _load_disk(self, n_total: int) -> SpectralDecomposition | None:
        path = self._path(n_total)
        if not os.path.exists(path):
            return None
        try:
            with np.load(path) as data:
                if int(data["version"]) != CACHE_FORMAT_VERSION:
                    return None
                values = np.asarray(data["values"], dtype=float)
                vectors = np.asarray(data["vectors"], dtype=float)
            dim = n_total + 1
            if values.shape != (dim,) or vectors.shape != (dim, dim):
                raise ValueError("unexpected array shapes")
            if not (np.all(np.isfinite(values)) and np.all(np.isfinite(vectors))):
                raise ValueError("non-finite cache contents")
        except Exception as exc:
            warnings.warn(
                f"corrupt spectral cache entry for N={n_total} ({exc}); recomputing",
                RuntimeWarning,
            )
            return None
        return SpectralDecomposition(sector=FockSector(n_total), values=values, vectors=vectors)

    def _save_disk(self, n_total: int, spec: SpectralDecomposition):
        try:
            os.makedirs(self.directory, exist_ok=True)
            path = self._path(n_total)
            tmp = path + f".{os.getpid()}.tmp.npz"
            np.savez(tmp, version=CACHE_FORMAT_VERSION, values=spec.values, vectors=spec.vectors)
            os.replace(tmp, path)
        except OSError as exc:
            warnings.warn(
                f"spectral cache directory {self.directory!r} is not writable ({exc}); "
                "falling back to in-memory caching",
                RuntimeWarning,
            )
            self.directory = None


DEFAULT_STORE = SpectralStore()


def spectral(n_total: int, store: SpectralStore | None = None) -> SpectralDecomposition:
    """Cached spectral decomposition for one sector."""
    return (store or DEFAULT_STORE).get(n_total)
