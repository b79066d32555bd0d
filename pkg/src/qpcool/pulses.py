"""Coupling pulses and their frequency-domain filter functions.

A cooling cycle applies T unitary layers whose system-bath coupling is
scaled by weights f_tau normalized to sum(f_tau) = 1.  Transition rates
at Bohr frequency eps are weighted by |F(eps)|^2 with the finite Fourier
sum

    F(eps) = pi * sum_tau f_tau exp(i tau (eps - pi h)).

Two pulse families are provided:

* step pulse ("scp"): f_tau = 1/T, a sharp sinc-like peak at eps = pi h
  with width 2 pi / T and only algebraic suppression of heating,
* modulated pulse ("mcp"): f_tau ~ sin(pi (tau - T/2)/2) / sinh(pi (tau
  - T/2)/beta) with h = 1/2, whose filter approaches a Fermi-step with
  thermal broadening 1/beta, so heating at Bohr frequency eps is
  suppressed as exp(-eps beta).

Note on normalization: with sum(f_tau) = 1 the discrete filter satisfies
F(pi h) = pi exactly, so its pass-band plateau is pi.  The closed-form
step limit `mcp_filter_asymptotic` follows the customary convention with
plateau 2*pi and the exact reflection identity F(e) + F(-e) = 2*pi;
compare it against twice the discrete sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

#: weights of constructed pulses sum to one within this
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class Pulse:
    """Time-domain coupling weights plus the auxiliary quasienergy pi*h."""

    kind: str                 # "scp" | "mcp"
    T: int                    # layers per cooling cycle
    h: float                  # auxiliary field; filter peak sits at eps = pi h
    weights: np.ndarray       # f_tau for tau = 1..T
    beta: Optional[float] = None   # step broadening parameter (mcp only)
    norm_constant: Optional[float] = None  # A with f = w/(A beta) (mcp only)

    def __post_init__(self):
        if abs(float(np.sum(self.weights)) - 1.0) > NORMALIZATION_TOL:
            raise ValueError("pulse weights must sum to 1")


def make_scp(T: int, h: float) -> Pulse:
    """Constant pulse f_tau = 1/T with auxiliary quasienergy pi*h."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return Pulse(kind="scp", T=int(T), h=float(h), weights=np.full(T, 1.0 / T))


def make_mcp(T: int, beta: float) -> Pulse:
    """Sign-modulated pulse with Fermi-step filter; h is fixed at 1/2.

    f_tau = sin(pi (tau - tau0)/2) / (A beta sinh(pi (tau - tau0)/beta))
    with tau0 = T/2 and A fixed by sum(f) = 1.  For even T the point
    tau = tau0 lies on the grid and takes the limit value beta/2 of the
    unnormalized weight.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    if beta <= 0:
        raise ValueError("beta must be positive")
    tau = np.arange(1, T + 1, dtype=float)
    x = tau - T / 2.0
    w = np.empty_like(x)
    on_node = np.abs(x) < 1e-12
    xs = np.where(on_node, 1.0, x)
    w = np.sin(np.pi * xs / 2.0) / np.sinh(np.pi * xs / beta)
    w[on_node] = beta / 2.0
    a = float(np.sum(w)) / beta
    f = w / (a * beta)
    return Pulse(kind="mcp", T=int(T), h=0.5, weights=f, beta=float(beta), norm_constant=a)


def filter_value(pulse: Pulse, eps) -> np.ndarray:
    """Exact finite Fourier sum F(eps) = pi sum_tau f_tau e^{i tau (eps - pi h)}."""
    eps = np.asarray(eps, dtype=float)
    tau = np.arange(1, pulse.T + 1)
    phases = np.exp(1j * np.multiply.outer(eps, tau) * 1.0
                    - 1j * np.multiply.outer(np.full_like(eps, math.pi * pulse.h), tau))
    return math.pi * (phases @ pulse.weights)


def filter_abs2(pulse: Pulse, eps) -> np.ndarray:
    """|F(eps)|^2, the weight entering every transition rate."""
    return np.abs(filter_value(pulse, eps)) ** 2


def scp_filter_closed_form(T: int, h: float, eps) -> np.ndarray:
    """Dirichlet-kernel form (pi/T) sin((eps-pi h)T/2) / sin((eps-pi h)/2).

    Equals the exact sum for the step pulse in magnitude; the removable
    singularities at eps - pi h = 2 pi m take the peak value pi.
    """
    eps = np.asarray(eps, dtype=float)
    w = eps - math.pi * h
    half = 0.5 * w
    den = np.sin(half)
    num = np.sin(half * T)
    out = np.full_like(eps, float(math.pi))
    ok = np.abs(den) > 1e-12
    out = np.where(ok, (math.pi / T) * np.divide(num, np.where(ok, den, 1.0)), out)
    return out


def mcp_filter_asymptotic(beta: float, eps) -> np.ndarray:
    """Large-T Fermi-step filter, plateau-2*pi convention.

    For eps >= 0: pi [tanh(eps beta/2) - tanh((eps - pi) beta/2)] / tanh(pi beta/4);
    for eps < 0 the value is defined through the exact reflection identity
    F(eps) + F(-eps) = 2*pi.  The discrete sum with sum(f) = 1 approaches
    half of this function on the pass band.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    eps = np.asarray(eps, dtype=float)

    def positive_branch(e):
        return math.pi * (np.tanh(e * beta / 2.0) - np.tanh((e - math.pi) * beta / 2.0)) \
            / math.tanh(math.pi * beta / 4.0)

    pos = positive_branch(np.abs(eps))
    return np.where(eps >= 0, pos, 2.0 * math.pi - pos)


def suppression_ratio(pulse: Pulse, eps: float) -> float:
    """|F(+eps)| / |F(-eps)| from the exact sum; +inf when F(-eps) = 0."""
    num = abs(complex(filter_value(pulse, +eps)))
    den = abs(complex(filter_value(pulse, -eps)))
    if den == 0.0:
        return math.inf
    return num / den


def ringing_bound(pulse: Pulse) -> float:
    """Finite-T truncation envelope exp(-pi T / beta) / A for the modulated pulse."""
    if pulse.kind != "mcp":
        raise ValueError("ringing bound applies to the modulated pulse only")
    return math.exp(-math.pi * pulse.T / pulse.beta) / pulse.norm_constant


@dataclass(frozen=True)
class FilterProfile:
    """Filter values sampled on a quasienergy grid."""

    pulse: Pulse
    grid: np.ndarray
    values: np.ndarray


def filter_profile(pulse: Pulse, n_points: int = 2048,
                   lo: float = -math.pi, hi: float = math.pi) -> FilterProfile:
    grid = np.linspace(lo, hi, n_points)
    return FilterProfile(pulse=pulse, grid=grid, values=filter_value(pulse, grid))
