"""Reduced density matrices, natural-orbital decompositions, momentum
distributions and two-body densities, for stationary and evolved states.

Grid diagonalization is the authoritative natural-orbital backend; the
analytic binomial-split forms are provided as a second backend together with
comparison helpers, since their validity for evolved states is unproven.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .eigenstates import RelEigenstate, TwoBodyState, cm_ground, eval_rel_closed, eval_rel_series
from .quench import OverlapTable, QuenchScenario, wavefunction_t, _postquench_basis
from .specfun import ho_values_grid

__all__ = [
    "Grid2D",
    "OneBodyDM",
    "NaturalDecomposition",
    "MomentumDistribution",
    "TwoBodyDensity",
    "DEFAULT_MOMENTUM_POINTS",
    "trapezoid_weights",
    "stationary_field",
    "rho1_from_field",
    "natural_decomposition",
    "natural_orbitals_paper",
    "natural_populations_paper",
    "natural_orbitals_paper_t",
    "natural_backend_report",
    "natural_backend_report_t",
    "momentum_distribution",
    "rho2_from_field",
    "breathing_series",
    "dominant_frequency",
]


@dataclass(frozen=True)
class Grid2D:
    """Symmetric uniform spatial grid; 400 points over [-6, 6] by default."""

    half_width: float = 6.0
    n_points: int = 400

    def __post_init__(self):
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)


def trapezoid_weights(grid: Grid2D) -> np.ndarray:
    w = np.full(grid.n_points, grid.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


@dataclass(frozen=True)
class OneBodyDM:
    """rho(x, x') on grid x grid, Hermitian by construction."""

    grid: Grid2D
    matrix: np.ndarray
    trace_weight: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.real(np.sum(np.diag(self.matrix) * self.trace_weight)))

    @property
    def density(self) -> np.ndarray:
        """Diagonal rho(x, x): the one-body density."""
        return np.real(np.diag(self.matrix))


@dataclass(frozen=True)
class NaturalDecomposition:
    """Descending natural populations and grid-sampled orbitals (rows)."""

    grid: Grid2D
    populations: np.ndarray
    orbitals: np.ndarray


@dataclass(frozen=True)
class MomentumDistribution:
    p_points: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class TwoBodyDensity:
    grid: Grid2D
    values: np.ndarray


DEFAULT_MOMENTUM_POINTS = np.linspace(-6.0, 6.0, 241)


def stationary_field(state: TwoBodyState, grid: Grid2D, evaluator: str = "closed"):
    """Psi(x1, x2) of a stationary two-body state sampled on grid x grid.

    Uses the 2n-1 distinct values of the rotated coordinates on a uniform grid.
    """
    pts = grid.points
    n = pts.size
    h = grid.dx
    diffs = np.arange(-(n - 1), n) * (h / math.sqrt(2.0))
    sums = (2.0 * pts[0] + np.arange(2 * n - 1) * h) / math.sqrt(2.0)
    if evaluator == "closed" and not state.rel.snapped:
        rel = eval_rel_closed(state.rel, diffs)
    else:
        rel = eval_rel_series(state.rel, diffs)
    cm = cm_ground(sums)
    idx = np.arange(n)
    return cm[np.add.outer(idx, idx)] * rel[np.subtract.outer(idx, idx) + (n - 1)]


def rho1_from_field(psi: np.ndarray, grid: Grid2D) -> OneBodyDM:
    """rho(x, x') = int psi(x, y) psi*(x', y) dy with trapezoidal weights.

    The result is averaged with its adjoint, making Hermiticity exact.
    """
    w = trapezoid_weights(grid)
    m = (psi * w) @ psi.conj().T
    m = 0.5 * (m + m.conj().T)
    return OneBodyDM(grid=grid, matrix=m, trace_weight=w)


def natural_decomposition(dm: OneBodyDM) -> NaturalDecomposition:
    """Eigendecomposition of the weighted kernel, descending populations.

    The symmetrized problem sqrt(w) rho sqrt(w) keeps the discrete orbitals
    orthonormal under the grid quadrature; each orbital's phase is fixed so its
    largest-magnitude sample is real and positive.
    """
    w = dm.trace_weight
    sq = np.sqrt(w)
    kernel = dm.matrix * np.outer(sq, sq)
    vals, vecs = np.linalg.eigh(kernel)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    orbitals = (vecs / sq[:, None]).T
    for k in range(orbitals.shape[0]):
        j = int(np.argmax(np.abs(orbitals[k])))
        ref = orbitals[k, j]
        if ref != 0:
            orbitals[k] = orbitals[k] * (np.conj(ref) / abs(ref))
    if np.isrealobj(dm.matrix):
        orbitals = np.real(orbitals)
    return NaturalDecomposition(grid=dm.grid, populations=vals, orbitals=orbitals)


def _log_binom(two_n: np.ndarray, k: int) -> np.ndarray:
    return gammaln(two_n + 1.0) - gammaln(k + 1.0) - gammaln(two_n - k + 1.0)


def _paper_populations(coeffs: np.ndarray, k_max: int) -> np.ndarray:
    n = np.arange(coeffs.size)
    two_n = 2.0 * n
    c2 = coeffs**2
    logc2 = np.where(c2 > 0, np.log(np.maximum(c2, 1e-300)), -np.inf)
    out = np.empty(k_max + 1)
    for k in range(k_max + 1):
        valid = two_n >= k
        ln_term = (
            _log_binom(two_n[valid], k) - two_n[valid] * math.log(2.0) + logc2[valid]
        )
        out[k] = float(np.sum(np.exp(ln_term)))
    return out


def _paper_orbitals(
    coeffs: np.ndarray, k_max: int, grid: Grid2D, momentum: bool
) -> tuple[np.ndarray, np.ndarray]:
    pts = grid.points
    n = np.arange(coeffs.size)
    two_n = 2 * n
    sgn = np.sign(coeffs)
    logc = np.where(coeffs != 0, np.log(np.maximum(np.abs(coeffs), 1e-300)), -np.inf)
    if momentum:
        sgn = sgn * np.where(n % 2 == 0, 1.0, -1.0)
    pops = _paper_populations(coeffs, k_max)
    basis = ho_values_grid(2 * (coeffs.size - 1), pts)
    orbitals = np.zeros((k_max + 1, pts.size))
    for k in range(k_max + 1):
        valid = two_n >= k
        ln_w = (
            logc[valid]
            - n[valid] * math.log(2.0)
            + 0.5 * (gammaln(two_n[valid] + 1.0) - gammaln(two_n[valid] - k + 1.0))
            - 0.5 * gammaln(k + 1.0)
            - 0.5 * math.log(max(pops[k], 1e-300))
        )
        weights = sgn[valid] * np.exp(ln_w)
        orbitals[k] = weights @ basis[two_n[valid] - k]
    return pops, orbitals


def natural_populations_paper(state: RelEigenstate, k_max: int) -> np.ndarray:
    """Analytic natural populations lambda_k = sum_n 4^-n C(2n,k) |c_n|^2.

    Completeness is inherited from the binomial theorem: summing over k gives
    exactly sum_n |c_n|^2.
    """
    return _paper_populations(state.coeffs, k_max)


def natural_orbitals_paper(
    state: RelEigenstate, k_max: int, grid: Grid2D, momentum: bool = False
) -> NaturalDecomposition:
    """Analytic natural orbitals from the binomial Hermite split.

    beta_k(x) = (k! s_k)^(-1/2) sum_{2n>=k} c_n 2^-n sqrt((2n)!/(2n-k)!)
                phi_{2n-k}(x), with s_k the analytic population.
    With momentum=True the alternating variant that represents the Fourier
    transform (up to a global phase) is evaluated instead.
    """
    pops, orbitals = _paper_orbitals(state.coeffs, k_max, grid, momentum)
    return NaturalDecomposition(grid=grid, populations=pops, orbitals=orbitals)


def natural_backend_report(
    state: RelEigenstate, grid: Grid2D, k_max: int = 20
) -> dict:
    """Compare the analytic and grid natural-orbital backends for one state.

    Returns ranked-population differences and the worst deviation of the
    analytic orbitals from grid orthonormality; consumers decide what to do
    with disagreements.
    """
    two_body = TwoBodyState(rel=state)
    psi = stationary_field(two_body, grid)
    grid_dec = natural_decomposition(rho1_from_field(psi, grid))
    paper = natural_orbitals_paper(state, k_max, grid)
    order = np.argsort(paper.populations)[::-1]
    ranked_paper = paper.populations[order]
    count = min(k_max + 1, grid_dec.populations.size)
    ranked_grid = grid_dec.populations[:count]
    diff = np.abs(ranked_paper[:count] - ranked_grid)
    w = trapezoid_weights(grid)
    gram = (paper.orbitals * w) @ paper.orbitals.T
    ortho_dev = float(np.max(np.abs(gram - np.eye(k_max + 1))))
    return {
        "populations_paper_ranked": ranked_paper[:count],
        "populations_grid": ranked_grid,
        "max_population_diff": float(np.max(diff)),
        "paper_orthonormality_deviation": ortho_dev,
    }


def natural_orbitals_paper_t(
    scenario: QuenchScenario,
    table: OverlapTable,
    grid: Grid2D,
    t: float,
    k_max: int = 20,
) -> NaturalDecomposition:
    """Verbatim analytic time-dependent backend (second natural-orbital route).

    Populations lambda_k = (sum_f sqrt(lambda_k^{2nu_f}))^2 over the retained
    postquench states and orbitals beta_k(t) = sum_f e^{-i E_f t} C_f
    beta_k^{2nu_f}.  For an entangled evolved state the populations of the true
    density matrix generally depend on t, so this backend is kept strictly for
    comparison against grid diagonalization; see natural_backend_report_t.
    """
    energies, _, _, coeff = _postquench_basis(
        scenario.g_f, scenario.n_f, scenario.basis_size
    )
    lam_sqrt = np.zeros(k_max + 1)
    orbitals = np.zeros((k_max + 1, grid.n_points), dtype=complex)
    phases = table.coeffs * np.exp(-1j * energies * t)
    for f in range(scenario.n_f):
        pops_f, orb_f = _paper_orbitals(coeff[f], k_max, grid, momentum=False)
        lam_sqrt += np.sqrt(np.clip(pops_f, 0.0, None))
        orbitals += phases[f] * orb_f
    return NaturalDecomposition(grid=grid, populations=lam_sqrt**2, orbitals=orbitals)


def natural_backend_report_t(
    scenario: QuenchScenario,
    table: OverlapTable,
    grid: Grid2D,
    t: float,
    k_max: int = 12,
) -> dict:
    """Compare grid-diagonalized and verbatim analytic populations at time t."""
    psi = wavefunction_t(scenario, table, grid, t)
    grid_dec = natural_decomposition(rho1_from_field(psi, grid))
    paper = natural_orbitals_paper_t(scenario, table, grid, t, k_max)
    order = np.argsort(paper.populations)[::-1]
    ranked_paper = paper.populations[order][: k_max + 1]
    ranked_grid = grid_dec.populations[: k_max + 1]
    return {
        "populations_paper_ranked": ranked_paper,
        "populations_grid": ranked_grid,
        "max_population_diff": float(
            np.max(np.abs(ranked_paper - ranked_grid[: ranked_paper.size]))
        ),
        "paper_population_sum": float(np.sum(paper.populations)),
        "grid_population_sum": float(np.sum(grid_dec.populations)),
    }


def momentum_distribution(
    decomp: NaturalDecomposition, p_points=None
) -> MomentumDistribution:
    """n(p) = sum_k lambda_k |beta_k(p)|^2 with the orbitals Fourier-transformed
    by direct oscillatory quadrature (1/sqrt(2pi) convention).

    Direct quadrature avoids the periodization artifacts a fast transform
    would introduce at this grid size.
    """
    if p_points is None:
        p_points = DEFAULT_MOMENTUM_POINTS
    p_points = np.asarray(p_points, dtype=float)
    x = decomp.grid.points
    w = trapezoid_weights(decomp.grid)
    kernel = np.exp(-1j * np.outer(p_points, x)) * w[None, :]
    lam = np.clip(decomp.populations, 0.0, None)
    keep = lam > 1e-14
    beta_p = decomp.orbitals[keep] @ kernel.T / math.sqrt(2.0 * math.pi)
    values = lam[keep] @ (np.abs(beta_p) ** 2)
    return MomentumDistribution(p_points=p_points, values=values)


def rho2_from_field(psi: np.ndarray, grid: Grid2D) -> TwoBodyDensity:
    """Diagonal two-body density |psi(x1, x2)|^2."""
    return TwoBodyDensity(grid=grid, values=np.abs(psi) ** 2)


def breathing_series(
    scenario: QuenchScenario, table: OverlapTable, grid: Grid2D, times
) -> np.ndarray:
    """Second moment <x^2>(t) of the one-body density; oscillates after a quench."""
    times = np.asarray(times, dtype=float)
    w = trapezoid_weights(grid)
    x2w = grid.points**2 * w
    out = np.empty(times.size)
    for j, t in enumerate(times):
        psi = wavefunction_t(scenario, table, grid, t)
        density = (np.abs(psi) ** 2) @ w
        out[j] = float(density @ x2w)
    return out


def dominant_frequency(times: np.ndarray, values: np.ndarray) -> float:
    """Strongest nonzero angular frequency, refined by parabolic interpolation
    of the discrete spectrum around its peak bin."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = times[1] - times[0]
    spec = np.abs(np.fft.rfft(values - values.mean()))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(values.size, d=dt)
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < spec.size - 1 and spec[k] > 0:
        lm, l0, lp = (math.log(max(s, 1e-300)) for s in spec[k - 1 : k + 2])
        denom = lm - 2.0 * l0 + lp
        shift = 0.5 * (lm - lp) / denom if denom != 0 else 0.0
        return float(freqs[k] + shift * (freqs[1] - freqs[0]))
    return float(freqs[k])
