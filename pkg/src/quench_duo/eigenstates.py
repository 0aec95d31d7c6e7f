"""Interacting relative eigenstates: oscillator series, gamma/U closed form,
normalization, and the full two-body wavefunction with the center-of-mass
ground state.

Phase convention: every state is scaled so its value at x = 0 is positive.
The literal series/closed forms give psi(0) = -A/g, so a sign -sgn(g) is
attached to both representations; A itself is stored positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sc

from .errors import DegenerateCouplingError, InvariantError
from .spectrum import ZERO_COUPLING_TOL, EvenLevel, solve_even_energy
from .specfun import (
    digamma,
    ho_at_origin,
    ho_values_grid,
    ln_gamma_signed,
    tricomi_u_half,
)

__all__ = [
    "RelEigenstate",
    "TwoBodyState",
    "normalization_constant",
    "build_rel_eigenstate",
    "eval_rel_series",
    "eval_rel_closed",
    "rel_profile_closed",
    "eval_total",
    "cm_ground",
]

DEFAULT_BASIS_SIZE = 1000


@dataclass(frozen=True)
class RelEigenstate:
    """One even relative eigenstate at coupling g, expanded over even oscillator modes.

    coeffs[n] multiplies phi_{2n}; tail estimates the truncated sum of squared
    coefficients beyond basis_size.  snapped marks the exact non-interacting
    limit, where the closed form degenerates and coeffs is a unit vector.
    """

    level: EvenLevel
    norm_A: float
    basis_size: int
    coeffs: np.ndarray
    phase: int
    tail: float
    snapped: bool

    @property
    def energy(self) -> float:
        return self.level.energy


@dataclass(frozen=True)
class TwoBodyState:
    """Relative eigenstate paired with the center-of-mass ground state."""

    rel: RelEigenstate
    cm_label: str = "ground"

    @property
    def total_energy(self) -> float:
        return self.rel.energy + 0.5


def cm_ground(X):
    """Center-of-mass ground state pi^(-1/4) exp(-X^2/2)."""
    X = np.asarray(X, dtype=float)
    return math.pi ** -0.25 * np.exp(-0.5 * X * X)


def normalization_constant(level: EvenLevel) -> float:
    """Closed-form normalization A of the oscillator-series expansion, A > 0.

    A^2 = 4 Gamma(1/2-eps) / (Gamma(-eps) [psi(1/2-eps) - psi(-eps)]),
    eps = E/2 - 1/4.
    """
    if abs(level.g) < ZERO_COUPLING_TOL:
        raise DegenerateCouplingError(
            "normalization constant degenerates at g=0; use the oscillator state"
        )
    eps = level.epsilon
    lg_half = ln_gamma_signed(0.5 - eps)
    lg_full = ln_gamma_signed(-eps)
    bracket = digamma(0.5 - eps) - digamma(-eps)
    a2 = (
        4.0
        * lg_half.sign
        * lg_full.sign
        * math.exp(lg_half.log_abs - lg_full.log_abs)
        / bracket
    )
    if not a2 > 0:
        raise InvariantError(
            f"normalization formula produced A^2 = {a2} at g={level.g}, nu={level.nu}"
        )
    return math.sqrt(a2)


def _norm_a_squared_vec(eps: np.ndarray) -> np.ndarray:
    """Vectorized A^2 over an array of eps values (scipy-backed)."""
    num = _sc.gammaln(0.5 - eps)
    den = _sc.gammaln(-eps)
    sign = _sc.gammasgn(0.5 - eps) * _sc.gammasgn(-eps)
    bracket = _sc.psi(0.5 - eps) - _sc.psi(-eps)
    return 4.0 * sign * np.exp(num - den) / bracket


def _tail_estimate(norm_a: float, basis_size: int) -> float:
    # |c_n|^2 ~ A^2/(4 pi) n^(-5/2), so the truncated weight is ~ A^2/(6 pi N^1.5).
    return norm_a * norm_a / (6.0 * math.pi * basis_size ** 1.5)


def build_rel_eigenstate(
    g: float, nu: int, basis_size: int = DEFAULT_BASIS_SIZE
) -> RelEigenstate:
    """Solve the level and assemble its series coefficients.

    c_n = phase * A * phi_{2n}(0) / (E_2n - E), with E_2n = 2n + 1/2 and the
    positive-at-origin phase.  |g| below the snap tolerance returns the exact
    oscillator state instead.
    """
    if basis_size < 1:
        raise ValueError("basis_size must be >= 1")
    level = solve_even_energy(g, nu)
    if abs(g) < ZERO_COUPLING_TOL:
        coeffs = np.zeros(basis_size)
        if nu >= basis_size:
            raise ValueError("basis_size too small for the requested oscillator mode")
        coeffs[nu] = 1.0
        coeffs.setflags(write=False)
        return RelEigenstate(
            level=level,
            norm_A=0.0,
            basis_size=basis_size,
            coeffs=coeffs,
            phase=1,
            tail=0.0,
            snapped=True,
        )
    norm_a = normalization_constant(level)
    phase = -1 if g > 0 else 1
    phi0 = ho_at_origin(2 * (basis_size - 1))
    n = np.arange(basis_size)
    coeffs = phase * norm_a * phi0 / (2.0 * n + 0.5 - level.energy)
    coeffs.setflags(write=False)
    return RelEigenstate(
        level=level,
        norm_A=norm_a,
        basis_size=basis_size,
        coeffs=coeffs,
        phase=phase,
        tail=_tail_estimate(norm_a, basis_size),
        snapped=False,
    )


def eval_rel_series(state: RelEigenstate, x):
    """Sum of the oscillator series at x (scalar or array); exactly even in x.

    Slow cusp-limited convergence within |x| < 0.1; the closed form is the
    accurate representation there.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    basis = ho_values_grid(2 * (state.basis_size - 1), xs)[::2]
    out = state.coeffs @ basis
    return out if np.ndim(x) else float(out[0])


def _closed_prefactor(state: RelEigenstate) -> float:
    eps = state.level.epsilon
    lg = ln_gamma_signed(-eps)
    return (
        state.phase
        * state.norm_A
        / (2.0 * math.sqrt(math.pi))
        * lg.sign
        * math.exp(lg.log_abs)
    )


def rel_profile_closed(state: RelEigenstate, x):
    """psi(x) * exp(+x^2/2): the Gaussian-free profile, stable at large |x|.

    Gauss-Hermite overlap sums use this so the weight carries the exponential.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if state.snapped:
        # Normalized-Hermite polynomial part of phi_{2nu}: same recurrence as
        # the oscillator functions with the Gaussian divided out.
        nu = state.level.nu
        h = np.full(xs.shape, math.pi ** -0.25)
        hm = np.zeros_like(h)
        for n in range(2 * nu):
            h, hm = xs * math.sqrt(2.0 / (n + 1)) * h - math.sqrt(n / (n + 1.0)) * hm, h
        return h if np.ndim(x) else float(h[0])
    eps = state.level.epsilon
    pref = _closed_prefactor(state)
    out = np.array([pref * tricomi_u_half(-eps, xx * xx) for xx in xs])
    return out if np.ndim(x) else float(out[0])


def eval_rel_closed(state: RelEigenstate, x):
    """Closed-form evaluation (A/(2 sqrt(pi))) Gamma(-eps) U(-eps,1/2,x^2) e^(-x^2/2).

    Raises DegenerateCouplingError for snapped states; use the series there.
    """
    if state.snapped:
        raise DegenerateCouplingError(
            "closed form degenerates at g=0; evaluate the series instead"
        )
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    prof = rel_profile_closed(state, xs)
    out = prof * np.exp(-0.5 * xs * xs)
    return out if np.ndim(x) else float(out[0])


def eval_total(state: TwoBodyState, x1, x2, evaluator: str = "closed"):
    """Two-body wavefunction Psi(x1, x2) = cm_ground(X) * psi_rel(x).

    X = (x1+x2)/sqrt2, x = (x1-x2)/sqrt2; symmetric under particle exchange.
    evaluator selects the relative-state representation: 'series' or 'closed'.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    big_x = (x1 + x2) / math.sqrt(2.0)
    rel_x = (x1 - x2) / math.sqrt(2.0)
    scalar = np.ndim(big_x) == 0
    if evaluator == "series" or (state.rel.snapped and evaluator == "closed"):
        rel_vals = eval_rel_series(state.rel, np.atleast_1d(rel_x).ravel())
    elif evaluator == "closed":
        rel_vals = eval_rel_closed(state.rel, np.atleast_1d(rel_x).ravel())
    else:
        raise ValueError(f"unknown evaluator {evaluator!r}")
    rel_vals = np.asarray(rel_vals).reshape(np.shape(rel_x) if not scalar else (1,))
    out = cm_ground(big_x) * (rel_vals if not scalar else rel_vals[0])
    return out if not scalar else float(out)
