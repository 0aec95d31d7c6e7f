"""Even-parity relative-motion energy levels of the contact-interacting pair.

The eigenvalues at coupling g solve Gamma(-E/2+3/4)/Gamma(-E/2+1/4) = -g/2.
Odd levels never feel the contact interaction and stay at 2nu + 3/2.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError
from .specfun import gamma_ratio

__all__ = [
    "ZERO_COUPLING_TOL",
    "EvenLevel",
    "SpectrumTable",
    "busch_residual",
    "solve_even_energy",
    "solve_even_energies",
    "spectrum_scan",
    "sum_identity_check",
    "odd_level_energy",
]

# Couplings below this magnitude snap to the exact non-interacting levels.
ZERO_COUPLING_TOL = 1e-10

# Relative tolerance on the final root bracket width.
_BRACKET_RTOL = 1e-12


@dataclass(frozen=True)
class EvenLevel:
    """One even relative-motion level: quantum number 2*nu, energy in hbar*omega."""

    g: float
    nu: int
    energy: float

    @property
    def epsilon(self) -> float:
        return 0.5 * self.energy - 0.25


@dataclass(frozen=True)
class SpectrumTable:
    """Level energies over a coupling scan; even levels vary, odd ones do not."""

    g_values: np.ndarray
    even_levels: np.ndarray  # shape (levels, steps)
    odd_levels: np.ndarray  # shape (levels,)


def odd_level_energy(nu: int) -> float:
    """E_{2nu+1} = 2nu + 3/2, independent of the coupling."""
    return 2.0 * nu + 1.5


def busch_residual(E: float, g: float) -> float:
    """Gamma(-E/2+3/4)/Gamma(-E/2+1/4) + g/2; zero exactly at the even levels.

    Returns a signed infinity at the poles of the numerator (E = 3/2 + 2m).
    """
    return gamma_ratio(-0.5 * E + 0.75, -0.5 * E + 0.25) + 0.5 * g


def _bracket(g: float, nu: int):
    """Sign-change bracket for level nu at coupling g, from the pole structure."""
    if g > 0:
        # Root between the ratio zero at 2nu+1/2 and the pole at 2nu+3/2.
        lo = 2.0 * nu + 0.5 + 1e-13
        hi = 2.0 * nu + 1.5 - 1e-9 * max(1.0, 2.0 * nu + 1.5)
        return lo, hi
    if nu >= 1:
        lo = 2.0 * nu - 0.5 + 1e-9 * max(1.0, 2.0 * nu + 0.5)
        hi = 2.0 * nu + 0.5 - 1e-13
        return lo, hi
    # Attractive bound branch: free-space binding -g^2/2 bounds the search.
    lo = min(-g * g, -1.0)
    hi = 0.5 - 1e-9
    for _ in range(64):
        if busch_residual(lo, g) > 0.0:
            return lo, hi
        lo *= 2.0
    raise BracketError(f"bound-state bracket expansion failed for g={g}")


def solve_even_energy(g: float, nu: int) -> EvenLevel:
    """Solve the transcendental level equation for one even level."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    g = float(g)
    if abs(g) < ZERO_COUPLING_TOL:
        return EvenLevel(g=g, nu=nu, energy=2.0 * nu + 0.5)
    lo, hi = _bracket(g, nu)
    f = lambda E: busch_residual(E, g)
    flo, fhi = f(lo), f(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
        raise BracketError(
            f"no sign change for g={g}, nu={nu} on [{lo}, {hi}] "
            f"(residuals {flo}, {fhi})"
        )
    energy = brentq(f, lo, hi, xtol=1e-13, rtol=_BRACKET_RTOL)
    return EvenLevel(g=g, nu=nu, energy=float(energy))


def solve_even_energies(g: float, count: int) -> list[EvenLevel]:
    """Levels nu = 0..count-1, strictly increasing in energy."""
    if count < 1:
        raise ValueError("count must be >= 1")
    levels = []
    for nu in range(count):
        try:
            levels.append(solve_even_energy(g, nu))
        except BracketError as exc:
            raise BracketError(f"nu={nu}: {exc}") from exc
    return levels


def _max_workers() -> int:
    raw = os.environ.get("QUENCH_DUO_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def spectrum_scan(
    g_min: float, g_max: float, steps: int, levels: int
) -> SpectrumTable:
    """Even-level energies on a uniform coupling grid, plus the constant odd levels.

    Columns are independent, so they are farmed out to a thread pool (capped by
    QUENCH_DUO_THREADS) and written back by index; output does not depend on
    scheduling.
    """
    if not g_min < g_max:
        raise ValueError("g_min must be < g_max")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    gs = np.linspace(g_min, g_max, steps)
    even = np.empty((levels, steps))

    def column(j):
        return [solve_even_energy(gs[j], nu).energy for nu in range(levels)]

    workers = min(_max_workers(), steps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for j, col in enumerate(pool.map(column, range(steps))):
                even[:, j] = col
    else:
        for j in range(steps):
            even[:, j] = column(j)
    odd = np.array([odd_level_energy(nu) for nu in range(levels)])
    return SpectrumTable(g_values=gs, even_levels=even, odd_levels=odd)


def sum_identity_check(E: float, n_terms: int) -> tuple[float, float]:
    """Diagnostic: sum_n phi_{2n}(0)^2/(E_2n - E) against its gamma closed form.

    The sum converges like n^(-1/2), so expect slow agreement; both sides are
    returned for the caller to compare.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    n = np.arange(n_terms)
    # phi_{2n}(0)^2 = C(2n, n)/(4^n sqrt(pi)), via a stable running product.
    ph2 = np.empty(n_terms)
    ph2[0] = 1.0 / math.sqrt(math.pi)
    if n_terms > 1:
        ratio = (2.0 * n[1:] - 1.0) / (2.0 * n[1:])
        ph2[1:] = ph2[0] * np.cumprod(ratio)
    partial = float(np.sum(ph2 / (2.0 * n + 0.5 - E)))
    closed = gamma_ratio(-0.5 * E + 0.25, -0.5 * E + 0.75) / 2.0
    return partial, closed
