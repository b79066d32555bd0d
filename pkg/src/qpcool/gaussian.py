"""Exact edge-cooling simulator on the Majorana covariance matrix.

With auxiliaries only at the chain ends, the whole cooling cycle is a
Gaussian channel: the state is fully described by the real antisymmetric
covariance matrix Gamma_ij = (i/4) <[a_i, a_j]>, evolving under each
unitary layer as Gamma -> K Gamma K^T with an orthogonal one-layer map
K = K_theta(tau) K_B K_S, and the auxiliary reset restores the fixed
bath block while zeroing the bath-system cross blocks.

Index layout follows the physical chain: left auxiliary Majoranas first,
then the 2N system Majoranas, then (optionally) the right auxiliary.
The coupling generator ties the leading auxiliary pair to the first
system site exactly like the displayed four-Majorana block, with the
layer angle theta * f_tau.

Because nothing non-Gaussian happens inside a cycle, the T layer maps
compose into a single per-cycle orthogonal matrix, and the cycle map on
the system block is affine: Gamma_SS -> A Gamma_SS A^T + C.  Its unique
fixed point solves a discrete Lyapunov (Stein) equation, which gives the
steady state without iterating hundreds of millions of cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from .errors import BasisMismatch
from .pulses import Pulse
from .spectrum import FloquetSpectrum, ModelParams, build_k_matrix


@dataclass(frozen=True)
class EdgeLayout:
    """Index bookkeeping for the bath/system Majorana blocks."""

    n_sites: int
    edges: str = "both"   # "left" | "both"

    def __post_init__(self):
        if self.edges not in ("left", "both"):
            raise ValueError("edges must be 'left' or 'both'")

    @property
    def n_aux(self) -> int:
        return 2 if self.edges == "both" else 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_sites + self.n_aux)

    @property
    def system_slice(self) -> slice:
        return slice(2, 2 + 2 * self.n_sites)

    def bath_pairs(self):
        pairs = [(0, 1)]
        if self.edges == "both":
            d = self.dim
            pairs.append((d - 2, d - 1))
        return pairs


_BATH_BLOCK = 0.5 * np.array([[0.0, -1.0], [1.0, 0.0]])


def init_covariance(n_sites: int, edges: str = "both") -> np.ndarray:
    """Maximally mixed system (zero block) with reset auxiliaries."""
    lay = EdgeLayout(n_sites, edges)
    gamma = np.zeros((lay.dim, lay.dim))
    for (a, b) in lay.bath_pairs():
        gamma[a : b + 1, a : b + 1] = _BATH_BLOCK
    return gamma


def reset(gamma: np.ndarray, layout: EdgeLayout) -> np.ndarray:
    """Restore the bath block, zero bath-system correlations, keep the system."""
    out = np.zeros_like(gamma)
    s = layout.system_slice
    out[s, s] = gamma[s, s]
    for (a, b) in layout.bath_pairs():
        out[a : b + 1, a : b + 1] = _BATH_BLOCK
    return out


def _plane_rotation(k: np.ndarray, i: int, j: int, angle: float):
    """exp of the generator with entries (i,j)=+angle, (j,i)=-angle."""
    c, s = np.cos(angle), np.sin(angle)
    col_i = k[:, i].copy()
    col_j = k[:, j].copy()
    # right-multiplication by the plane rotation
    k[:, i] = c * col_i - s * col_j
    k[:, j] = s * col_i + c * col_j


def cycle_generator(params: ModelParams, pulse: Pulse, theta: float, tau: int,
                    edges: str = "both") -> np.ndarray:
    """One-layer orthogonal map K = K_theta(tau) K_B K_S (tau is 1-based)."""
    if not (1 <= tau <= pulse.T):
        raise ValueError("layer index out of range")
    lay = EdgeLayout(params.n_sites, edges)
    dim = lay.dim
    k = np.eye(dim)
    s = lay.system_slice
    k[s, s] = build_k_matrix(params)

    # bath precession by pi*h on each auxiliary pair
    kb = np.eye(dim)
    for (a, b) in lay.bath_pairs():
        _plane_rotation(kb, a, b, np.pi * pulse.h)

    # coupling: for the adjacent chain pair (first, second) the generator
    # carries +theta on (first_1, second_2) and -theta on (first_2, second_1)
    ang = np.pi * theta * pulse.weights[tau - 1]
    kt = np.eye(dim)
    _plane_rotation(kt, 0, 3, ang)      # left aux is "first", site 1 "second"
    _plane_rotation(kt, 1, 2, -ang)
    if lay.edges == "both":
        d = lay.dim
        qs1, qs2 = d - 4, d - 3        # site N Majoranas
        _plane_rotation(kt, qs1, d - 1, ang)   # site N is "first", right aux "second"
        _plane_rotation(kt, qs2, d - 2, -ang)
    return kt @ kb @ k


def step(gamma: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Unitary-layer update Gamma -> K Gamma K^T."""
    return k @ gamma @ k.T


def cycle_matrix(params: ModelParams, pulse: Pulse, theta: float,
                 edges: str = "both") -> np.ndarray:
    """Composition of the T layer maps: K_cycle = K(T) ... K(1)."""
    out = np.eye(EdgeLayout(params.n_sites, edges).dim)
    for tau in range(1, pulse.T + 1):
        out = cycle_generator(params, pulse, theta, tau, edges) @ out
    return out


def occupations(gamma: np.ndarray, spec: FloquetSpectrum,
                layout: Optional[EdgeLayout] = None) -> np.ndarray:
    """Mode occupations n_k = 1/2 - i psi_k^T Gamma_SS conj(psi_k)."""
    lay = layout if layout is not None else EdgeLayout(spec.params.n_sites)
    if gamma.shape[0] != lay.dim:
        raise BasisMismatch(
            f"covariance dimension {gamma.shape[0]} != layout dimension {lay.dim}")
    gss = gamma[lay.system_slice, lay.system_slice]
    psi = spec.eigenvectors
    vals = 0.5 - 1j * np.einsum("ik,ij,jk->k", psi, gss, psi.conj())
    n = vals.real
    if np.max(np.abs(vals.imag)) > 1e-9:
        raise BasisMismatch("occupations came out complex; spectrum mismatch")
    return np.clip(n, 0.0, 1.0)


def physicality_deviation(gamma: np.ndarray) -> float:
    """How far the eigenvalues of 2i*Gamma leave [-1, 1]."""
    w = np.linalg.eigvalsh(2j * gamma)
    return float(max(0.0, np.max(np.abs(w)) - 1.0))


@dataclass
class Trajectory:
    cycles: np.ndarray
    occupations: np.ndarray   # (n_samples, n_modes)


def run_protocol(params: ModelParams, pulse: Pulse, theta: float, cycles: int,
                 spec: FloquetSpectrum, edges: str = "both",
                 sample_cycles=None) -> Trajectory:
    """Iterate the full cooling channel from the maximally mixed state."""
    lay = EdgeLayout(params.n_sites, edges)
    kc = cycle_matrix(params, pulse, theta, edges)
    gamma = init_covariance(params.n_sites, edges)
    wanted = sorted(set(int(c) for c in (sample_cycles if sample_cycles is not None
                                         else range(cycles + 1))))
    out_c, out_n = [], []
    if wanted and wanted[0] == 0:
        out_c.append(0)
        out_n.append(occupations(gamma, spec, lay))
        wanted = wanted[1:]
    for nu in range(1, cycles + 1):
        gamma = reset(kc @ gamma @ kc.T, lay)
        if wanted and nu == wanted[0]:
            out_c.append(nu)
            out_n.append(occupations(gamma, spec, lay))
            wanted = wanted[1:]
    return Trajectory(cycles=np.array(out_c), occupations=np.array(out_n))


def steady_state_covariance(params: ModelParams, pulse: Pulse, theta: float,
                            edges: str = "both") -> np.ndarray:
    """Fixed point of the cycle map from the Stein equation.

    With the post-reset block structure, one cycle acts on the system
    block as Gamma_SS -> A Gamma_SS A^T + C with A the system-system block
    of the cycle matrix and C = K_SB Gamma_B K_SB^T; the fixed point is
    the solution of the discrete Lyapunov equation.
    """
    lay = EdgeLayout(params.n_sites, edges)
    kc = cycle_matrix(params, pulse, theta, edges)
    s = lay.system_slice
    bath_idx = [i for pair in lay.bath_pairs() for i in pair]
    a = kc[s, s]
    gamma_b = np.zeros((len(bath_idx), len(bath_idx)))
    for off in range(0, len(bath_idx), 2):
        gamma_b[off : off + 2, off : off + 2] = _BATH_BLOCK
    ksb = kc[s, bath_idx]
    c = ksb @ gamma_b @ ksb.T
    gss = solve_discrete_lyapunov(a, c)
    gss = 0.5 * (gss - gss.T)
    full = init_covariance(params.n_sites, edges)
    full[s, s] = gss
    return full
