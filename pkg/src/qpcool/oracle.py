"""Brute-force dense simulator of the cooling channel on a few qubits.

Everything here works with explicit 2^n-dimensional matrices: the chain
unitary, the auxiliary-reset channel, first-order noise, Jordan-Wigner
Majorana operators along the physical qubit order, and eigenstates built
constructively by applying mode-creation operators to the vacuum.  It is
the ground truth that pins the sign conventions of the fermionization,
the Gaussian covariance simulator, and the kinetic rate normalizations;
sizes are capped around ten qubits.

Qubit conventions: |0> is spin-up, Z|0> = +|0>, and sigma^- = |1><0| maps
onto the fermion creation operator through the string of Z's starting at
the left end of the chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import LabelAmbiguity, NonPositive, TooLarge
from .pulses import Pulse
from .spectrum import FloquetSpectrum, ModelParams

MAX_QUBITS = 10

_ID = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SP = np.array([[0, 1], [0, 0]], dtype=complex)   # sigma^+ = |0><1|
_SM = np.array([[0, 0], [1, 0]], dtype=complex)   # sigma^- = |1><0|


def _check_size(n_qubits: int):
    if n_qubits > MAX_QUBITS:
        raise TooLarge(f"{n_qubits} qubits exceeds the dense cap of {MAX_QUBITS}")


def embed(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Single-qubit operator at position `site` (0-based) in an n-qubit register."""
    out = np.eye(1, dtype=complex)
    for i in range(n_qubits):
        out = np.kron(out, op if i == site else _ID)
    return out


def embed_many(ops: Sequence[np.ndarray], sites: Sequence[int], n_qubits: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    table = dict(zip(sites, ops))
    for i in range(n_qubits):
        out = np.kron(out, table.get(i, _ID))
    return out


def build_floquet_unitary(params: ModelParams, n_qubits: Optional[int] = None,
                          offset: int = 0) -> np.ndarray:
    """Dense chain unitary exp(-i pi J/2 sum XX) exp(i pi g/2 sum Z).

    The XX factors commute, so each bond contributes an exact two-qubit
    rotation cos(pi J/2) - i sin(pi J/2) X_i X_{i+1}.
    """
    n = params.n_sites
    nq = n_qubits if n_qubits is not None else n
    _check_size(nq)
    dim = 2 ** nq
    ug = np.eye(dim, dtype=complex)
    for i in range(n):
        zi = embed(_Z, offset + i, nq)
        ug = ug @ (np.cos(np.pi * params.g / 2) * np.eye(dim)
                   + 1j * np.sin(np.pi * params.g / 2) * zi)
    uj = np.eye(dim, dtype=complex)
    for i in range(n - 1):
        xx = embed_many([_X, _X], [offset + i, offset + i + 1], nq)
        uj = uj @ (np.cos(np.pi * params.J / 2) * np.eye(dim)
                   - 1j * np.sin(np.pi * params.J / 2) * xx)
    return uj @ ug


def bath_unitary(h: float, aux_sites: Sequence[int], n_qubits: int) -> np.ndarray:
    dim = 2 ** n_qubits
    ub = np.eye(dim, dtype=complex)
    for s in aux_sites:
        zi = embed(_Z, s, n_qubits)
        ub = ub @ (np.cos(np.pi * h / 2) * np.eye(dim)
                   + 1j * np.sin(np.pi * h / 2) * zi)
    return ub


def coupling_unitary(angle: float, pairs: Sequence[tuple], n_qubits: int) -> np.ndarray:
    """exp(-i angle V) with V = pi sum (s+_Q s-_A + s-_Q s+_A) over coupled pairs.

    Each term acts in the 2-dimensional |01>,|10> subspace, so the
    exponential is an exact rotation by pi*angle there.
    """
    dim = 2 ** n_qubits
    u = np.eye(dim, dtype=complex)
    for (qs, as_) in pairs:
        v = (embed_many([_SP, _SM], [qs, as_], n_qubits)
             + embed_many([_SM, _SP], [qs, as_], n_qubits))
        # v^2 projects onto the swap subspace
        u = u @ (np.eye(dim) + (np.cos(np.pi * angle) - 1) * (v @ v)
                 - 1j * np.sin(np.pi * angle) * v)
    return u


def chain_majoranas(n_chain: int, n_qubits: Optional[int] = None) -> list:
    """Dense Majorana operators a_1..a_{2n} along the given chain order.

    a_{2i-1} = (prod_{l<i} Z_l) X_i and a_{2i} = (prod_{l<i} Z_l) Y_i.
    """
    nq = n_qubits if n_qubits is not None else n_chain
    _check_size(nq)
    ops = []
    string = np.eye(2 ** nq, dtype=complex)
    for i in range(n_chain):
        xi = embed(_X, i, nq)
        yi = embed(_Y, i, nq)
        ops.append(string @ xi)
        ops.append(string @ yi)
        string = string @ embed(_Z, i, nq)
    return ops


def ptrace(rho: np.ndarray, keep: Iterable[int], n_qubits: int) -> np.ndarray:
    """Partial trace keeping the listed qubits (order preserved)."""
    keep = list(keep)
    drop = [q for q in range(n_qubits) if q not in keep]
    t = rho.reshape([2] * (2 * n_qubits))
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    dim = 2 ** len(keep)
    return t.reshape(dim, dim)


# --------------------------------------------------------------------------
# cooling channel


@dataclass
class DenseChannel:
    """One cooling cycle on the dense system+bath register.

    layout "edge": chain order (A_left, Q_1..Q_N[, A_right]); layout
    "bulk": system qubits first, one auxiliary per site appended.
    """

    params: ModelParams
    pulse: Pulse
    theta: float
    layout: str = "edge"
    edges: str = "both"
    jw_sign_flip: bool = False  # test hook: corrupt one Majorana sign

    def __post_init__(self):
        n = self.params.n_sites
        if self.layout == "edge":
            self.n_aux = 2 if self.edges == "both" else 1
            self.aux_sites = [0] + ([n + 1] if self.n_aux == 2 else [])
            self.system_sites = list(range(1, n + 1))
            self.pairs = [(1, 0)] + ([(n, n + 1)] if self.n_aux == 2 else [])
        elif self.layout == "bulk":
            self.n_aux = n
            self.system_sites = list(range(n))
            self.aux_sites = list(range(n, 2 * n))
            self.pairs = [(i, n + i) for i in range(n)]
        else:
            raise ValueError(f"unknown layout {self.layout!r}")
        self.n_qubits = n + self.n_aux
        _check_size(self.n_qubits)
        offset = self.system_sites[0]
        self.u_s = build_floquet_unitary(self.params, self.n_qubits, offset=offset)
        self.u_b = bath_unitary(self.pulse.h, self.aux_sites, self.n_qubits)
        self.u_bs = self.u_b @ self.u_s
        self.layers = [
            coupling_unitary(self.theta * f, self.pairs, self.n_qubits) @ self.u_bs
            for f in self.pulse.weights
        ]
        self.rho_bath = self._bath_state()

    def _bath_state(self) -> np.ndarray:
        up = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        out = np.eye(1, dtype=complex)
        for _ in range(self.n_aux):
            out = np.kron(out, up)
        return out

    def embed_system(self, rho_s: np.ndarray) -> np.ndarray:
        """Tensor the reset bath state around the system density matrix."""
        n = self.params.n_sites
        if self.layout == "bulk":
            return np.kron(rho_s, self.rho_bath)
        up = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        out = np.kron(up, rho_s)
        if self.n_aux == 2:
            out = np.kron(out, up)
        return out

    def apply_cycle(self, rho_s: np.ndarray, noise=None) -> np.ndarray:
        """T layers, optional per-layer noise, then trace out and reset bath."""
        rho = self.embed_system(rho_s)
        for u in self.layers:
            rho = u @ rho @ u.conj().T
            if noise is not None:
                rho = apply_noise_channel(rho, noise, self.system_sites,
                                          self.n_qubits, check=False)
        return ptrace(rho, self.system_sites, self.n_qubits)

    def cycle_rho_full(self, rho_s: np.ndarray) -> np.ndarray:
        """Full register state after the T layers (before trace/reset)."""
        rho = self.embed_system(rho_s)
        for u in self.layers:
            rho = u @ rho @ u.conj().T
        return rho

    def covariance(self, rho: np.ndarray) -> np.ndarray:
        """Majorana covariance (i/4)<[a_i, a_j]> along the physical chain order."""
        if self.layout != "edge":
            raise ValueError("covariance extraction is defined for the edge chain")
        if not hasattr(self, "_pair_products"):
            ops = chain_majoranas(self.n_qubits)
            if self.jw_sign_flip:
                ops[2] = -ops[2]
            m = len(ops)
            self._pair_products = [
                (i, j, ops[i] @ ops[j]) for i in range(m) for j in range(i + 1, m)
            ]
            self._n_majorana = m
        gamma = np.zeros((self._n_majorana, self._n_majorana))
        for i, j, prod in self._pair_products:
            val = 0.5j * np.einsum("ij,ji->", rho, prod)
            gamma[i, j] = val.real
            gamma[j, i] = -val.real
        return gamma


def apply_noise_channel(rho: np.ndarray, noise, system_sites: Sequence[int],
                        n_qubits: int, check: bool = True) -> np.ndarray:
    """First-order dissipator with decay (sigma^+) and dephasing (Z) jumps.

    rho += sum_j gamma_d (L rho L+ - 1/2 {L+L, rho}) + (gamma_phi/2)(Z rho Z - rho).
    """
    out = rho.copy()
    for j in system_sites:
        if noise.gamma_d:
            l_op = embed(_SP, j, n_qubits)
            ll = l_op.conj().T @ l_op
            out = out + noise.gamma_d * (
                l_op @ rho @ l_op.conj().T - 0.5 * (ll @ rho + rho @ ll)
            )
        if noise.gamma_phi:
            z = embed(_Z, j, n_qubits)
            out = out + 0.5 * noise.gamma_phi * (z @ rho @ z - rho)
    if check:
        lo = float(np.min(np.linalg.eigvalsh(0.5 * (out + out.conj().T))))
        if lo < -1e-10:
            raise NonPositive(f"first-order noise broke positivity ({lo:.2e})")
    return out


# --------------------------------------------------------------------------
# eigenmodes and constructive eigenstates (system register only)


class DenseModes:
    """Dense eta_k operators and few-quasiparticle states for one spectrum."""

    def __init__(self, spec: FloquetSpectrum, jw_sign_flip: bool = False):
        n = spec.params.n_sites
        _check_size(n)
        self.spec = spec
        self.n_qubits = n
        majos = chain_majoranas(n)
        if jw_sign_flip:
            majos[2] = -majos[2]
        psi = spec.eigenvectors
        self.eta = [
            sum(psi[i, k].conj() * majos[i] for i in range(2 * n)) / np.sqrt(2.0)
            for k in range(n)
        ]
        self.majos = majos
        number = sum(op.conj().T @ op for op in self.eta)
        w, v = np.linalg.eigh(number)
        if n > 1 and w[1] - w[0] < 1e-8:
            raise LabelAmbiguity("vacuum is not separated in total mode number")
        self.vacuum = v[:, 0]
        self.vacuum_number = float(w[0])

    def state(self, modes: Sequence[int]) -> np.ndarray:
        """eta_k1^dag ... eta_km^dag |vac>, unit norm for distinct modes."""
        psi = self.vacuum
        for k in reversed(list(modes)):
            psi = self.eta[k].conj().T @ psi
        return psi

    def occupations(self, rho: np.ndarray) -> np.ndarray:
        return np.array([
            float(np.real(np.trace(rho @ (op.conj().T @ op)))) for op in self.eta
        ])

    def gge_density(self, n_vec: np.ndarray) -> np.ndarray:
        """Product density matrix with the given mode occupations."""
        dim = 2 ** self.n_qubits
        rho = np.eye(dim, dtype=complex)
        for k, nk in enumerate(n_vec):
            num = self.eta[k].conj().T @ self.eta[k]
            rho = rho @ (nk * num + (1.0 - nk) * (np.eye(dim) - num))
        return rho


def sigma_minus_site(j: int, n_qubits: int) -> np.ndarray:
    """Dense sigma^-_j (1-based site), the spin lowering operator."""
    return embed(_SM, j - 1, n_qubits)


def z_site(j: int, n_qubits: int) -> np.ndarray:
    return embed(_Z, j - 1, n_qubits)


def eigenstate_matrix_elements(spec: FloquetSpectrum, family: str) -> np.ndarray:
    """Element moduli |.|^2 straight from dense states, for oracle checks.

    family: 'single_minus'  -> |<vac| sigma^-_j |k>|^2            (N, M)
            'single_plus'   -> |<vac| sigma^+_j |k>|^2            (N, M)
            'pair_minus'    -> |<vac+| sigma^-_j |k,q on vac->|^2 (N, M, M)
            'pair_plus'     -> as above for sigma^+
            'scatter_minus' -> |<bra k on vac+| sigma^-_j |q on vac->|^2
            'z_pair'        -> |<vac| Z_j |k,q>|^2 (Majorana column = vac-toggle)
            'z_scatter'     -> |<k| Z_j |q>|^2
    """
    modes = DenseModes(spec)
    n = spec.params.n_sites
    m = spec.n_modes
    nq = modes.n_qubits
    maj = spec.majorana_index
    vac = modes.vacuum

    def sig(j, dagger):
        op = sigma_minus_site(j, nq)
        return op if dagger else op.conj().T

    if family in ("single_minus", "single_plus"):
        out = np.zeros((n, m))
        for j in range(1, n + 1):
            op = sig(j, family == "single_minus")
            for k in range(m):
                out[j - 1, k] = abs(np.vdot(vac, op @ modes.state([k]))) ** 2
        return out

    if family in ("pair_minus", "pair_plus", "scatter_minus"):
        if maj is None:
            return np.zeros((n, m, m))
        out = np.zeros((n, m, m))
        for j in range(1, n + 1):
            op = sig(j, family != "pair_plus")
            for k in range(m):
                if k == maj:
                    continue
                for q in range(m):
                    if q == maj or q == k:
                        continue
                    if family.startswith("pair"):
                        ket = modes.state([k, q, maj])
                        out[j - 1, k, q] = abs(np.vdot(vac, op @ ket)) ** 2
                    else:
                        bra = modes.state([k])
                        ket = modes.state([q, maj])
                        out[j - 1, k, q] = abs(np.vdot(bra, op @ ket)) ** 2
        return out

    if family in ("z_pair", "z_scatter"):
        out = np.zeros((n, m, m))
        for j in range(1, n + 1):
            op = z_site(j, nq)
            for k in range(m):
                for q in range(m):
                    if q == k:
                        continue
                    if family == "z_pair":
                        out[j - 1, k, q] = abs(np.vdot(vac, op @ modes.state([k, q]))) ** 2
                    else:
                        out[j - 1, k, q] = abs(
                            np.vdot(modes.state([k]), op @ modes.state([q]))
                        ) ** 2
        return out

    raise ValueError(f"unknown family {family!r}")
