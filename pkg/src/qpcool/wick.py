"""Spin-operator matrix elements between few-quasiparticle states.

Z_j = 1 - 2 c_j^dag c_j is quadratic in the chain fermions, so its
elements reduce to closed forms in the Bogoliubov coefficients.  The
raising/lowering operators carry the full parity string

    sigma^-_j = (prod_{i<j} Z_i) c_j^dag,   Z_i = -i a_{2i-1} a_{2i},

so their elements are vacuum expectation values of long Majorana
products, evaluated by Wick's theorem as the Pfaffian of the skew matrix
of ordered pairwise contractions; only |Pf|^2 = |det| is ever consumed.

Every operator entering an element is a linear combination
b = sum_k (p_k eta_k + q_k eta_k^dag) of the eigenmodes, so the vacuum
contraction of an ordered pair is just <b b'> = p(b) . q(b').

Two evaluation routes are kept deliberately:

* ``_dense_modulus_squared`` assembles the full contraction matrix per
  element and takes a determinant -- transparent, used for spot values,
  cross-checks, and as a fallback;
* the table builder block-diagonalizes the fixed part of the
  contraction matrix once per site (unitary congruence to 2x2 blocks
  [[0, s], [-s, 0]]) and then reads off every mode pair from rank-2
  border updates, which turns the O(N^7) table into O(N^4) and stays
  stable when the fixed-part Pfaffian underflows deep in the bulk.

Phase selection rules: sigma^+- changes fermion parity, so two-particle
families exist only on the AFM side, where the near-zero edge mode
toggles between the two vacua; requesting them in the PM phase raises
``WrongPhase``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import NotSkewSymmetric, WrongPhase
from .spectrum import FloquetSpectrum

#: elements below this are clamped to zero (determinant round-off floor)
ELEMENT_FLOOR = 1e-16

#: singular values of a fixed block below this count as its kernel
_KERNEL_CUT = 1e-12

#: allowed residual of the block-diagonalization, relative to matrix norm
_CONGRUENCE_TOL = 1e-8


def wick_modulus_squared(sigma: np.ndarray) -> float:
    """|Pf(Sigma)|^2 of a skew-symmetric contraction matrix, via |det|."""
    sigma = np.asarray(sigma)
    n = sigma.shape[0]
    if sigma.ndim != 2 or sigma.shape[1] != n or n % 2:
        raise NotSkewSymmetric(f"need an even square matrix, got shape {sigma.shape}")
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if np.max(np.abs(sigma + sigma.T)) > 1e-12 * scale:
        raise NotSkewSymmetric("matrix is not skew-symmetric")
    if n == 0:
        return 1.0
    return float(abs(np.linalg.det(sigma)))


class _OperatorBasis:
    """(p, q) mode-expansion rows of the operators used in elements."""

    def __init__(self, spec: FloquetSpectrum):
        self.spec = spec
        psi = spec.eigenvectors                      # (2N, M)
        self.p_majorana = np.sqrt(2.0) * psi          # row i: a_{i+1}
        self.q_majorana = self.p_majorana.conj()
        self.p_c = spec.bogoliubov_u                  # row j: c_{j+1}
        self.q_c = spec.bogoliubov_v
        self.p_cdag = spec.bogoliubov_v.conj()
        self.q_cdag = spec.bogoliubov_u.conj()
        self.n_modes = spec.n_modes

    def mode_vector(self, k: int) -> np.ndarray:
        e = np.zeros(self.n_modes)
        e[k] = 1.0
        return e

    def fixed_block(self, j: int, dagger: bool, majorana: Optional[int]):
        """(P, Q) rows for [a_1 .. a_{2j-2}, c_j^(dag), (eta_maj^dag)]."""
        rows_p = [self.p_majorana[: 2 * (j - 1)]]
        rows_q = [self.q_majorana[: 2 * (j - 1)]]
        if dagger:
            rows_p.append(self.p_cdag[j - 1 : j])
            rows_q.append(self.q_cdag[j - 1 : j])
        else:
            rows_p.append(self.p_c[j - 1 : j])
            rows_q.append(self.q_c[j - 1 : j])
        if majorana is not None:
            rows_p.append(np.zeros((1, self.n_modes)))
            rows_q.append(self.mode_vector(majorana)[None, :])
        return np.vstack(rows_p), np.vstack(rows_q)


def _skew_from_rows(p_rows: np.ndarray, q_rows: np.ndarray) -> np.ndarray:
    """Ordered-contraction skew matrix A_{lm} = p_l . q_m (l < m)."""
    s = p_rows @ q_rows.T
    a = np.triu(s, 1)
    return a - a.T


def _dense_modulus_squared(p_rows: np.ndarray, q_rows: np.ndarray) -> float:
    """|<b_1 ... b_L>|^2 for the ordered operator list given by its (p, q) rows."""
    L = p_rows.shape[0]
    if L % 2:
        return 0.0
    if L == 0:
        return 1.0
    val = float(abs(np.linalg.det(_skew_from_rows(p_rows, q_rows))))
    return 0.0 if val < ELEMENT_FLOOR else val


class _YoulaForm:
    """Unitary congruence D = U^dag A conj(U) with D block-diagonal.

    Blocks are [[0, s_i], [-s_i, 0]] with s_i >= 0 (columns 2i, 2i+1 of U),
    followed by kernel columns u with A conj(u) = 0.
    """

    def __init__(self, a: np.ndarray):
        L = a.shape[0]
        self.dim = L
        if L == 0:
            self.s = np.zeros(0)
            self.u = np.zeros((0, 0), dtype=complex)
            self.n_kernel = 0
            self.ok = True
            return
        scale = max(1.0, float(np.linalg.norm(a, ord="fro")))
        p = -(a @ a.conj())
        p = 0.5 * (p + p.conj().T)
        lam, vecs = np.linalg.eigh(p)
        order = np.argsort(lam)[::-1]
        lam, vecs = lam[order], vecs[:, order]

        pair_cols = []
        s_list = []
        kernel_cols = []
        cut = _KERNEL_CUT * scale

        # singular values of a skew matrix carry even multiplicity, so the
        # squared map has exactly degenerate eigenvalue pairs; the antilinear
        # pairing v -> A conj(v) is done by explicit deflation inside each
        # degenerate cluster.  The tolerance merges only true degeneracies:
        # merging distinct eigenvalues would break block-diagonality at
        # O(delta lambda).
        gap_tol = 1e-9 * max(1.0, float(lam[0]))
        start = 0
        while start < L:
            stop = start + 1
            while stop < L and lam[stop - 1] - lam[stop] <= gap_tol:
                stop += 1
            block = vecs[:, start:stop]
            while block.shape[1]:
                v = block[:, 0]
                w = a @ v.conj()
                s = float(np.linalg.norm(w))
                if s <= cut:
                    kernel_cols.append(v)
                    removed = v[:, None]
                else:
                    u1 = w / s
                    u1 = u1 - v * (np.vdot(v, u1))
                    u1 = u1 / np.linalg.norm(u1)
                    pair_cols.extend([u1, v])
                    s_list.append(s)
                    removed = np.column_stack([v, u1])
                if block.shape[1] <= removed.shape[1]:
                    break
                rest = block - removed @ (removed.conj().T @ block)
                uu, sv, _ = np.linalg.svd(rest, full_matrices=False)
                block = uu[:, sv > 0.5]
            start = stop

        cols = pair_cols + kernel_cols
        self.u = np.column_stack(cols) if cols else np.zeros((L, 0), dtype=complex)
        self.n_kernel = len(kernel_cols)
        m = len(s_list)

        # recompute s from the congruence itself and validate the structure
        d = self.u.conj().T @ a @ self.u.conj()
        target = np.zeros_like(d)
        s_exact = np.zeros(m)
        for i in range(m):
            s_exact[i] = d[2 * i, 2 * i + 1].real
            target[2 * i, 2 * i + 1] = d[2 * i, 2 * i + 1]
            target[2 * i + 1, 2 * i] = d[2 * i + 1, 2 * i]
        self.s = s_exact
        resid = float(np.max(np.abs(d - target))) if d.size else 0.0
        self.ok = (
            self.u.shape[1] == L
            and resid <= _CONGRUENCE_TOL * scale
            and np.all(s_exact > 0)
        )

    def transform_end_borders(self, x_cols: np.ndarray) -> np.ndarray:
        """Border columns x_l = <b_l x> in the block basis (U^dag x)."""
        return self.u.conj().T @ x_cols

    def partial_products(self):
        """P_i = prod_{i' != i} s_i' and the full product, with underflow -> 0."""
        m = self.s.size
        if m == 0:
            return np.zeros(0), 1.0
        logs = np.log(self.s)
        total = float(np.sum(logs))
        with np.errstate(under="ignore", over="ignore"):
            partials = np.exp(total - logs)
            full = np.exp(total)
        return partials, float(full)


def _pair_amplitudes(form: _YoulaForm, y_end_a: np.ndarray, y_end_b: np.ndarray):
    """Pfaffian of the fixed block bordered by two trailing columns.

    Returns the antisymmetric matrix amp[k, q] for border columns
    (y_end_a[:, k], y_end_b[:, q]); relative signs across blocks are
    uniform, the irrelevant global sign is dropped.
    """
    m = form.s.size
    partials, full = form.partial_products()
    n = y_end_a.shape[1]
    amp = np.zeros((n, n), dtype=complex)
    if m:
        yo_a = y_end_a[0 : 2 * m : 2, :]
        ye_a = y_end_a[1 : 2 * m : 2, :]
        yo_b = y_end_b[0 : 2 * m : 2, :]
        ye_b = y_end_b[1 : 2 * m : 2, :]
        amp += (yo_a * partials[:, None]).T @ ye_b - (ye_a * partials[:, None]).T @ yo_b
    if form.n_kernel == 2:
        k0, k1 = 2 * m, 2 * m + 1
        amp += full * (
            np.outer(y_end_a[k0], y_end_b[k1]) - np.outer(y_end_a[k1], y_end_b[k0])
        )
    return amp


def _front_end_amplitudes(form: _YoulaForm, z_front: np.ndarray, y_end: np.ndarray):
    """Same as `_pair_amplitudes` with one leading and one trailing border."""
    m = form.s.size
    partials, full = form.partial_products()
    n = z_front.shape[1]
    amp = np.zeros((n, n), dtype=complex)
    if m:
        zo = z_front[0 : 2 * m : 2, :]
        ze = z_front[1 : 2 * m : 2, :]
        yo = y_end[0 : 2 * m : 2, :]
        ye = y_end[1 : 2 * m : 2, :]
        amp += (zo * partials[:, None]).T @ ye - (ze * partials[:, None]).T @ yo
    if form.n_kernel == 2:
        k0, k1 = 2 * m, 2 * m + 1
        amp += full * (
            np.outer(z_front[k0], y_end[k1]) - np.outer(z_front[k1], y_end[k0])
        )
    return amp


def _single_amplitudes(form: _YoulaForm, y_end: np.ndarray) -> np.ndarray:
    """Pfaffian of an odd fixed block bordered by one trailing column."""
    _, full = form.partial_products()
    if form.n_kernel != 1:
        return np.zeros(y_end.shape[1], dtype=complex)
    return full * y_end[-1, :]


# --------------------------------------------------------------------------
# spot evaluations (direct determinant route)


def _require_afm(spec: FloquetSpectrum, what: str) -> int:
    if spec.params.phase != "AFM" or spec.majorana_index is None:
        raise WrongPhase(f"{what} vanishes by parity in the PM phase")
    return spec.majorana_index


def sigma_single(spec: FloquetSpectrum, j: int, k: int, dagger: bool = True) -> float:
    """|<vac| string c_j^(dag) eta_k^dag |vac>|^2, the one-quasiparticle element."""
    basis = _OperatorBasis(spec)
    p, q = basis.fixed_block(j, dagger, None)
    pk = np.vstack([p, np.zeros((1, basis.n_modes))])
    qk = np.vstack([q, basis.mode_vector(k)[None, :]])
    return _dense_modulus_squared(pk, qk)


def sigma_pair(spec: FloquetSpectrum, j: int, k: int, q: int, dagger: bool = True) -> float:
    """|<vac+| string c_j^(dag) eta_k^dag eta_q^dag |vac->|^2 (AFM only)."""
    maj = _require_afm(spec, "two-particle element")
    if k == q:
        return 0.0
    basis = _OperatorBasis(spec)
    p0, q0 = basis.fixed_block(j, dagger, None)
    zrow = np.zeros((1, basis.n_modes))
    pk = np.vstack([p0, zrow, zrow, zrow])
    qk = np.vstack(
        [q0, basis.mode_vector(k)[None, :], basis.mode_vector(q)[None, :],
         basis.mode_vector(maj)[None, :]]
    )
    return _dense_modulus_squared(pk, qk)


def sigma_scatter(spec: FloquetSpectrum, j: int, k: int, q: int, dagger: bool = True) -> float:
    """|<k| string c_j^(dag) eta_q^dag (eta_maj^dag) |vac->|^2 (AFM only).

    Bra mode k, ket mode q; the diagonal k = q is the persistence
    amplitude and is evaluated like any other element.
    """
    maj = _require_afm(spec, "scattering element")
    basis = _OperatorBasis(spec)
    p0, q0 = basis.fixed_block(j, dagger, None)
    zrow = np.zeros((1, basis.n_modes))
    pk = np.vstack([basis.mode_vector(k)[None, :], p0, zrow, zrow])
    qk = np.vstack([zrow, q0, basis.mode_vector(q)[None, :], basis.mode_vector(maj)[None, :]])
    return _dense_modulus_squared(pk, qk)


@dataclass
class ZElements:
    """Quadratic-operator element moduli for one site."""

    pair: np.ndarray      # |<vac| Z_j |k, q>|^2, symmetric, zero diagonal
    scatter: np.ndarray   # |<k| Z_j |q>|^2 for k != q, symmetric in |.|^2


def z_elements(spec: FloquetSpectrum, j: int) -> ZElements:
    """Closed-form pair/scatter moduli of Z_j from the Bogoliubov data.

    pair[k, q]    = 4 |v*_{jk} u_{jq} - v*_{jq} u_{jk}|^2
    scatter[k, q] = 4 |u*_{jk} u_{jq} - v_{jk} v*_{jq}|^2   (k != q)
    """
    u = spec.bogoliubov_u[j - 1]
    v = spec.bogoliubov_v[j - 1]
    m1 = np.outer(v.conj(), u)
    pair = 4.0 * np.abs(m1 - m1.T) ** 2
    m2 = np.outer(u.conj(), u) - np.outer(v, v.conj())
    scatter = 4.0 * np.abs(m2) ** 2
    np.fill_diagonal(pair, 0.0)
    np.fill_diagonal(scatter, 0.0)
    pair[pair < ELEMENT_FLOOR] = 0.0
    scatter[scatter < ELEMENT_FLOOR] = 0.0
    return ZElements(pair=pair, scatter=scatter)


# --------------------------------------------------------------------------
# dense fallbacks for sites where the congruence check fails


def _batched_abs_det(stack: np.ndarray) -> np.ndarray:
    with np.errstate(under="ignore"):
        return np.abs(np.linalg.det(stack))


def _pair_table_dense(basis, j, dagger, maj):
    """|pair amplitude|^2 for all (k, q) at one site via stacked determinants."""
    p0, q0 = basis.fixed_block(j, dagger, None)
    a0 = _skew_from_rows(p0, q0)
    L = a0.shape[0]
    n = basis.n_modes
    xm = p0[:, maj]
    out = np.zeros((n, n))
    pairs = [(k, q) for k in range(n) for q in range(k + 1, n) if maj not in (k, q)]
    chunk = max(1, int(2e8 / (16 * (L + 3) ** 2)))
    for lo in range(0, len(pairs), chunk):
        batch = pairs[lo : lo + chunk]
        mats = np.zeros((len(batch), L + 3, L + 3), dtype=complex)
        mats[:, :L, :L] = a0
        for b, (k, q) in enumerate(batch):
            for col, x in zip((L, L + 1, L + 2), (p0[:, k], p0[:, q], xm)):
                mats[b, :L, col] = x
                mats[b, col, :L] = -x
        vals = _batched_abs_det(mats)
        for b, (k, q) in enumerate(batch):
            out[k, q] = out[q, k] = vals[b]
    return out


def _scatter_table_dense(basis, j, dagger, maj):
    """|<bra| sigma |ket>|^2 for all bra != ket at one site, stacked dets."""
    p0, q0 = basis.fixed_block(j, dagger, None)
    a0 = _skew_from_rows(p0, q0)
    L = a0.shape[0]
    n = basis.n_modes
    xm = p0[:, maj]
    out = np.zeros((n, n))
    pairs = [(a, b) for a in range(n) for b in range(n)
             if a != b and maj not in (a, b)]
    chunk = max(1, int(2e8 / (16 * (L + 3) ** 2)))
    for lo in range(0, len(pairs), chunk):
        batch = pairs[lo : lo + chunk]
        mats = np.zeros((len(batch), L + 3, L + 3), dtype=complex)
        # row/col 0: leading eta_bra; rows 1..L: fixed; L+1: eta_ket^dag; L+2: eta_maj^dag
        mats[:, 1 : L + 1, 1 : L + 1] = a0
        for i, (bra, ket) in enumerate(batch):
            z = q0[:, bra]
            mats[i, 0, 1 : L + 1] = z
            mats[i, 1 : L + 1, 0] = -z
            for col, x in zip((L + 1, L + 2), (p0[:, ket], xm)):
                mats[i, 1 : L + 1, col] = x
                mats[i, col, 1 : L + 1] = -x
        vals = _batched_abs_det(mats)
        for i, (bra, ket) in enumerate(batch):
            out[bra, ket] = vals[i]
    return out


# --------------------------------------------------------------------------
# full table (batched route)


@dataclass
class ElementTable:
    """All element moduli |.|^2 for one spectrum, indexed [j-1, k(, q)].

    sigma families follow the convention: ``plus`` carries c_j (elements of
    sigma^+), ``minus`` carries c_j^dag (elements of sigma^-).  Scatter
    arrays are laid out [j, bra, ket].  In the PM phase the pair and
    scatter sigma families are identically zero; on the AFM side the
    Majorana rows/columns of the two-particle families are zeroed, its
    physics living in the single-particle (vacuum-toggling) family and in
    the Majorana column of the Z pair table.
    """

    spec: FloquetSpectrum
    single_plus: np.ndarray
    single_minus: np.ndarray
    pair_plus: np.ndarray
    pair_minus: np.ndarray
    scatter_minus: np.ndarray
    z_pair: np.ndarray
    z_scatter: np.ndarray

    @property
    def scatter_plus(self) -> np.ndarray:
        """|<q| sigma^+_j |k>|^2 = |<k| sigma^-_j |q>|^2."""
        return np.swapaxes(self.scatter_minus, 1, 2)

    @cached_property
    def single_plus_sum(self) -> np.ndarray:
        return self.single_plus.sum(axis=0)

    @cached_property
    def single_minus_sum(self) -> np.ndarray:
        return self.single_minus.sum(axis=0)

    @cached_property
    def pair_plus_sum(self) -> np.ndarray:
        return self.pair_plus.sum(axis=0)

    @cached_property
    def pair_minus_sum(self) -> np.ndarray:
        return self.pair_minus.sum(axis=0)

    @cached_property
    def scatter_minus_sum(self) -> np.ndarray:
        return self.scatter_minus.sum(axis=0)

    @cached_property
    def z_pair_sum(self) -> np.ndarray:
        return self.z_pair.sum(axis=0)

    @cached_property
    def z_scatter_sum(self) -> np.ndarray:
        return self.z_scatter.sum(axis=0)


def _zero_majorana(arr: np.ndarray, maj: Optional[int]):
    if maj is not None:
        arr[:, maj, :] = 0.0
        arr[:, :, maj] = 0.0


def element_table(spec: FloquetSpectrum) -> ElementTable:
    """Build every element family for one spectrum.

    Cost is O(N^4) overall: one block-diagonalization per (site, dagger)
    pair plus matrix products; a per-site fallback to the direct
    determinant route guards the rare case where the congruence check
    fails.
    """
    basis = _OperatorBasis(spec)
    n = spec.params.n_sites
    m = spec.n_modes
    maj = spec.majorana_index
    afm = spec.params.phase == "AFM" and maj is not None

    single_p = np.zeros((n, m))
    single_m = np.zeros((n, m))
    pair_p = np.zeros((n, m, m))
    pair_m = np.zeros((n, m, m))
    scat_m = np.zeros((n, m, m))
    zp = np.zeros((n, m, m))
    zs = np.zeros((n, m, m))

    for j in range(1, n + 1):
        ze = z_elements(spec, j)
        zp[j - 1] = ze.pair
        zs[j - 1] = ze.scatter

        for dagger, singles_out in ((False, single_p), (True, single_m)):
            p0, q0 = basis.fixed_block(j, dagger, None)
            form = _YoulaForm(_skew_from_rows(p0, q0))
            if form.ok:
                # border column of eta_k^dag is the k-th column of the p-rows
                amps = _single_amplitudes(form, form.transform_end_borders(p0))
                singles_out[j - 1] = np.abs(amps) ** 2
            else:
                for k in range(m):
                    singles_out[j - 1, k] = sigma_single(spec, j, k, dagger=dagger)

        if afm:
            for dagger in (False, True):
                p1, q1 = basis.fixed_block(j, dagger, maj)
                form = _YoulaForm(_skew_from_rows(p1, q1))
                target = pair_p if not dagger else pair_m
                if form.ok:
                    y_end = form.transform_end_borders(p1)
                    amp2 = _pair_amplitudes(form, y_end, y_end)
                    target[j - 1] = np.abs(amp2) ** 2
                    if dagger:
                        z_front = form.transform_end_borders(q1)
                        amp_s = _front_end_amplitudes(form, z_front, y_end)
                        scat_m[j - 1] = np.abs(amp_s) ** 2
                else:
                    target[j - 1] = _pair_table_dense(basis, j, dagger, maj)
                    if dagger:
                        scat_m[j - 1] = _scatter_table_dense(basis, j, dagger, maj)

    for arr in (pair_p, pair_m, scat_m):
        _zero_majorana(arr, maj)
        for j in range(n):
            np.fill_diagonal(arr[j], 0.0)
    for arr in (single_p, single_m, pair_p, pair_m, scat_m, zp, zs):
        arr[arr < ELEMENT_FLOOR] = 0.0

    return ElementTable(
        spec=spec,
        single_plus=single_p,
        single_minus=single_m,
        pair_plus=pair_p,
        pair_minus=pair_m,
        scatter_minus=scat_m,
        z_pair=zp,
        z_scatter=zs,
    )
