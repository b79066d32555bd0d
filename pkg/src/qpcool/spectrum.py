"""Floquet transverse-field Ising chain: quasienergies and Bogoliubov data.

One drive period acts on the 2*N Majorana operators of the open chain as a
real orthogonal matrix K = K_J @ K_g, the product of a banded coupling
rotation (angle pi*J on every bond pair) and a banded field rotation
(angle pi*g on every site pair).  Eigenphases of K come in conjugate pairs
exp(-/+ i eps_k); the positive-frequency eigenvectors psi_k carry the
standing-wave Bogoliubov coefficients

    u_jk = (psi_{k,2j-1} + i psi_{k,2j}) / sqrt(2),
    v_jk = (psi*_{k,2j-1} + i psi*_{k,2j}) / sqrt(2),

which control every transition rate downstream.  Quasienergies satisfy

    cos(eps_k) = cos(pi J) cos(pi g) - sin(pi J) sin(pi g) cos(k_m),

with quasimomenta quantized roughly as k_m ~ pi (m-1)/N by the open
boundary.  For g < J (AFM side) one near-zero edge mode exists whose
splitting decays exponentially with N; it is tagged separately because it
toggles between the two symmetry-broken vacua instead of behaving like a
band quasiparticle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import schur

from .errors import CriticalPoint, DegenerateSpectrum

#: an AFM mode is tagged as the Majorana edge mode when its quasienergy
#: falls below this fraction of the band minimum pi*|J-g| (the splitting is
#: exponentially small in n_sites, so any in-gap mode is the edge mode)
MAJORANA_BAND_FRACTION = 0.5

#: relative spacing below which two quasienergies count as degenerate
DEGENERACY_TOL = 1e-9

#: residual allowed in K psi = exp(-i eps) psi
EIGEN_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Chain parameters: Ising coupling J, transverse field g, size n_sites.

    The region of interest is 0 <= J, g < 1/2 with J != g; the boundary
    values J = 0 or g = 0 are admitted for the decoupled limits even
    though they make the spectrum degenerate.
    """

    J: float
    g: float
    n_sites: int

    def __post_init__(self):
        if not (0.0 <= self.J < 0.5) or not (0.0 <= self.g < 0.5):
            raise ValueError(f"J and g must lie in [0, 1/2), got J={self.J}, g={self.g}")
        if abs(self.J - self.g) < 1e-12:
            raise CriticalPoint(f"J = g = {self.J}: gap closes at the critical point")
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError(f"n_sites must be a positive integer, got {self.n_sites}")

    @property
    def phase(self) -> str:
        """'PM' for g > J (magnon quasiparticles), 'AFM' for g < J (domain walls)."""
        return "PM" if self.g > self.J else "AFM"


@dataclass(frozen=True)
class GapInfo:
    eps_min: float      # single-particle band minimum, pi*|J - g|
    delta_paper: float  # many-body first-excitation convention, 2*pi*|J - g|


@dataclass
class FloquetSpectrum:
    """Diagonalized single-period data for one parameter point.

    ``eigenvectors`` holds the positive-frequency modes psi_k as columns
    (shape 2N x N), sorted by ascending quasienergy.  ``majorana_index``
    is the position of the tagged near-zero AFM edge mode, or None.
    """

    params: ModelParams
    quasienergies: np.ndarray
    quasimomenta: np.ndarray
    eigenvectors: np.ndarray
    bogoliubov_u: np.ndarray
    bogoliubov_v: np.ndarray
    majorana_index: Optional[int] = None
    _residual: float = field(default=0.0, repr=False)

    @property
    def n_modes(self) -> int:
        return self.params.n_sites

    @property
    def band_indices(self) -> np.ndarray:
        """Indices of the ordinary band modes (Majorana mode excluded)."""
        idx = np.arange(self.n_modes)
        if self.majorana_index is None:
            return idx
        return idx[idx != self.majorana_index]


def quasienergy(k, params: ModelParams):
    """Principal dispersion eps(k) = arccos(cos piJ cos pig - sin piJ sin pig cos k)."""
    cj, sj = math.cos(math.pi * params.J), math.sin(math.pi * params.J)
    cg, sg = math.cos(math.pi * params.g), math.sin(math.pi * params.g)
    arg = np.clip(cj * cg - sj * sg * np.cos(k), -1.0, 1.0)
    return np.arccos(arg)


def gap(params: ModelParams) -> GapInfo:
    """Band minimum pi|J-g| and the 2*pi|J-g| convention used in beta products."""
    if abs(params.J - params.g) < 1e-12:
        raise CriticalPoint("gap undefined at J = g")
    d = abs(params.J - params.g)
    return GapInfo(eps_min=math.pi * d, delta_paper=2.0 * math.pi * d)


def build_k_matrix(params: ModelParams) -> np.ndarray:
    """Single-period Majorana rotation K = K_J @ K_g (2N x 2N, orthogonal).

    K_J leaves the two boundary Majoranas a_1, a_2N untouched and rotates
    each bond pair (a_{2i}, a_{2i+1}) by pi*J; K_g rotates each site pair
    (a_{2i-1}, a_{2i}) by pi*g.
    """
    n = params.n_sites
    cj, sj = math.cos(math.pi * params.J), math.sin(math.pi * params.J)
    cg, sg = math.cos(math.pi * params.g), math.sin(math.pi * params.g)

    kj = np.eye(2 * n)
    for i in range(n - 1):
        r = 2 * i + 1
        kj[r, r] = cj
        kj[r, r + 1] = -sj
        kj[r + 1, r] = sj
        kj[r + 1, r + 1] = cj

    kg = np.zeros((2 * n, 2 * n))
    for i in range(n):
        r = 2 * i
        kg[r, r] = cg
        kg[r, r + 1] = sg
        kg[r + 1, r] = -sg
        kg[r + 1, r + 1] = cg

    return kj @ kg


def _modes_from_schur(kmat: np.ndarray):
    """Extract (eps_k, psi_k) pairs with eps in [0, pi] from a real orthogonal matrix.

    Works off the real Schur form, so the psi_k are orthonormal and satisfy
    psi^T psi' = 0 by construction even when an AFM edge splitting underflows
    and the +1 eigenvalue pair is numerically degenerate.
    """
    tmat, zmat = schur(kmat, output="real")
    dim = kmat.shape[0]
    modes = []
    stray = []
    i = 0
    while i < dim:
        if i + 1 < dim and abs(tmat[i + 1, i]) > 1e-12:
            c = 0.5 * (tmat[i, i] + tmat[i + 1, i + 1])
            s = 0.5 * (abs(tmat[i, i + 1]) + abs(tmat[i + 1, i]))
            eps = math.atan2(s, c)
            sgn = 1.0 if tmat[i, i + 1] >= 0 else -1.0
            psi = (zmat[:, i] - 1j * sgn * zmat[:, i + 1]) / np.sqrt(2.0)
            modes.append((eps, psi))
            i += 2
        else:
            stray.append(i)
            i += 1

    # 1x1 blocks appear only when a conjugate pair collapses onto the real
    # axis (underflowed Majorana splitting); pair them up by eigenvalue sign.
    plus = [i for i in stray if tmat[i, i] > 0]
    minus = [i for i in stray if tmat[i, i] <= 0]
    for group, eps in ((plus, 0.0), (minus, math.pi)):
        if len(group) % 2:
            raise DegenerateSpectrum("unpaired unit-modulus eigenvalue in Schur form")
        for a, b in zip(group[0::2], group[1::2]):
            psi = (zmat[:, a] - 1j * zmat[:, b]) / np.sqrt(2.0)
            modes.append((eps, psi))

    modes.sort(key=lambda m: m[0])
    return modes


def diagonalize(params: ModelParams) -> FloquetSpectrum:
    """Full positive-frequency eigendata of the single-period rotation."""
    kmat = build_k_matrix(params)
    modes = _modes_from_schur(kmat)
    n = params.n_sites
    if len(modes) != n:
        raise DegenerateSpectrum(f"expected {n} positive-frequency modes, got {len(modes)}")

    eps = np.array([m[0] for m in modes])
    psi = np.column_stack([m[1] for m in modes])

    # deterministic global phase per mode: largest component real positive
    for k in range(n):
        imax = int(np.argmax(np.abs(psi[:, k])))
        ph = psi[imax, k]
        psi[:, k] *= np.conj(ph) / abs(ph)

    residual = 0.0
    for k in range(n):
        r = np.max(np.abs(kmat @ psi[:, k] - np.exp(-1j * eps[k]) * psi[:, k]))
        residual = max(residual, float(r))
    if residual > EIGEN_RESIDUAL_TOL:
        raise DegenerateSpectrum(f"eigenvector residual {residual:.2e} above tolerance")

    spacing = np.diff(eps)
    if n > 1 and np.min(spacing) < DEGENERACY_TOL * np.pi:
        raise DegenerateSpectrum(
            f"quasienergy spacing {np.min(spacing):.2e} below degeneracy tolerance"
        )

    majorana = None
    band_min = math.pi * abs(params.J - params.g)
    if params.phase == "AFM" and eps[0] < MAJORANA_BAND_FRACTION * band_min:
        majorana = 0

    u = (psi[0::2, :] + 1j * psi[1::2, :]) / np.sqrt(2.0)
    v = (np.conj(psi[0::2, :]) + 1j * np.conj(psi[1::2, :])) / np.sqrt(2.0)

    # recover quasimomenta by inverting the dispersion; the Majorana mode
    # lies off the band (imaginary k) and gets NaN
    cj, sj = math.cos(math.pi * params.J), math.sin(math.pi * params.J)
    cg, sg = math.cos(math.pi * params.g), math.sin(math.pi * params.g)
    km = np.full(n, np.nan)
    if sj * sg > 0:
        cosk = (cj * cg - np.cos(eps)) / (sj * sg)
        km = np.arccos(np.clip(cosk, -1.0, 1.0))
    if majorana is not None:
        km[majorana] = np.nan

    return FloquetSpectrum(
        params=params,
        quasienergies=eps,
        quasimomenta=km,
        eigenvectors=psi,
        bogoliubov_u=u,
        bogoliubov_v=v,
        majorana_index=majorana,
        _residual=residual,
    )


def edge_overlap_profile(spec: FloquetSpectrum) -> np.ndarray:
    """Boundary Bogoliubov weights per mode: columns (eps_k, |u_1k|^2, |v_1k|^2)."""
    u1 = np.abs(spec.bogoliubov_u[0, :]) ** 2
    v1 = np.abs(spec.bogoliubov_v[0, :]) ** 2
    return np.column_stack([spec.quasienergies, u1, v1])
