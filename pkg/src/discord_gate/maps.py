"""Operator-sum maps, the map induced by a system-bath evolution, and Choi matrices.

A map is stored as stacked operation elements ``lefts[t]``, ``rights[t]``
(each ``out_dim x in_dim``) with real weights ``w[t]``, acting as
``sigma -> sum_t w[t] lefts[t] sigma rights[t]^dag``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, HermiticityError
from .linalg import as_matrix, check_unitary, dagger, is_psd, spectral_decompose, svd
from .states import BlockDecomposition, CQForm, _require_sl

SVD_CUTOFF = 1e-14
KRAUS_CUTOFF = 1e-14
HERMITIAN_MAP_TOL = 1e-10


class Flavor(str, Enum):
    GENERAL = "general"
    HERMITIAN = "hermitian"
    KRAUS = "kraus"


@dataclass(frozen=True)
class OperatorSumMap:
    weights: np.ndarray  # (T,) real
    lefts: np.ndarray  # (T, out_dim, in_dim)
    rights: np.ndarray  # (T, out_dim, in_dim)
    in_dim: int
    out_dim: int
    flavor: Flavor = Flavor.GENERAL

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        L = np.asarray(self.lefts, dtype=complex).reshape(len(w), self.out_dim, self.in_dim)
        R = np.asarray(self.rights, dtype=complex).reshape(len(w), self.out_dim, self.in_dim)
        flavor = Flavor(self.flavor)
        if flavor is not Flavor.GENERAL and not np.array_equal(L, R):
            raise ValueError(f"{flavor.value} maps need identical left and right elements")
        if flavor is Flavor.KRAUS and np.any(w < 0):
            raise ValueError("kraus maps need nonnegative weights")
        for a in (w, L, R):
            a.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "lefts", L)
        object.__setattr__(self, "rights", R)
        object.__setattr__(self, "flavor", flavor)

    def __len__(self):
        return len(self.weights)

    @classmethod
    def from_terms(cls, terms, in_dim: int, out_dim: int, flavor=Flavor.GENERAL):
        """Build from an iterable of ``(weight, left, right)``."""
        terms = list(terms)
        if not terms:
            empty = np.zeros((0, out_dim, in_dim), dtype=complex)
            return cls(np.zeros(0), empty, empty, in_dim, out_dim, flavor)
        w, L, R = zip(*terms)
        return cls(np.array(w, dtype=float), np.array(L), np.array(R), in_dim, out_dim, flavor)

    @classmethod
    def kraus(cls, ops, weights=None):
        ops = np.asarray(ops, dtype=complex)
        w = np.ones(len(ops)) if weights is None else np.asarray(weights, dtype=float)
        return cls(w, ops, ops, ops.shape[2], ops.shape[1], Flavor.KRAUS)

    @classmethod
    def hermitian(cls, ops, weights):
        ops = np.asarray(ops, dtype=complex)
        return cls(np.asarray(weights, dtype=float), ops, ops, ops.shape[2], ops.shape[1], Flavor.HERMITIAN)

    @classmethod
    def identity(cls, dim: int):
        return cls.kraus(np.eye(dim, dtype=complex)[None])

    def terms(self):
        return list(zip(self.weights, self.lefts, self.rights))


def apply_map(m: OperatorSumMap, sigma) -> np.ndarray:
    sigma = as_matrix(sigma, "sigma")
    if sigma.shape != (m.in_dim, m.in_dim):
        raise DimensionError(f"map acts on {m.in_dim}x{m.in_dim}, got {sigma.shape}")
    return np.einsum("t,tab,bc,tdc->ad", m.weights, m.lefts, sigma, m.rights.conj())


def superoperator(m: OperatorSumMap) -> np.ndarray:
    """Images of the matrix units: ``out[i, j] = m(|i><j|)``."""
    return np.einsum("t,tai,tbj->ijab", m.weights, m.lefts, m.rights.conj())


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray
    in_dim: int
    out_dim: int

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def choi_matrix(m: OperatorSumMap) -> ChoiMatrix:
    """``(1/d) sum_ij |i><j| (x) m(|i><j|)`` with row index ``i * out_dim + k``."""
    d, o = m.in_dim, m.out_dim
    M = superoperator(m).transpose(0, 2, 1, 3).reshape(d * o, d * o) / d
    return ChoiMatrix(M, d, o)


@dataclass(frozen=True)
class MapReport:
    hermitian_preserving: bool
    trace_preserving: bool
    hermitian_deviation: float
    trace_deviation: float


def hermitian_basis(dim: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of ``dim x dim`` matrices."""
    out = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1
        out.append(e)
    s = 1 / np.sqrt(2)
    for i in range(dim):
        for j in range(i + 1, dim):
            x = np.zeros((dim, dim), dtype=complex)
            x[i, j] = x[j, i] = s
            y = np.zeros((dim, dim), dtype=complex)
            y[i, j], y[j, i] = -1j * s, 1j * s
            out.extend([x, y])
    return out


def map_properties(m: OperatorSumMap, tol: float = HERMITIAN_MAP_TOL) -> MapReport:
    herm_dev = 0.0
    for h in hermitian_basis(m.in_dim):
        out = apply_map(m, h)
        herm_dev = max(herm_dev, float(np.max(np.abs(out - dagger(out)))) / 2)
    acc = np.einsum("t,tai,taj->ij", m.weights, m.rights.conj(), m.lefts)
    tr_dev = float(np.max(np.abs(acc - np.eye(m.in_dim)))) if m.in_dim == m.out_dim else float("inf")
    return MapReport(herm_dev <= tol, tr_dev <= tol, herm_dev, tr_dev)


def is_cp(m: OperatorSumMap, tol: float = 1e-9) -> tuple[bool, float]:
    """Choi-positivity verdict and the minimum Choi eigenvalue."""
    C = choi_matrix(m).matrix
    dev = float(np.max(np.abs(C - dagger(C)))) if C.size else 0.0
    if dev > HERMITIAN_MAP_TOL:
        raise HermiticityError(f"map is not Hermitian-preserving (Choi anti-Hermitian part {dev:.3e})")
    return is_psd(C, tol)


def _bath_slices(U: np.ndarray, dS: int, dB: int, vec: np.ndarray) -> np.ndarray:
    """``out[k] = (I (x) <k|) U (I (x) |vec>)`` for every bath basis vector ``|k>``."""
    return np.einsum("akcb,b->kac", U.reshape(dS, dB, dS, dB), vec)


def induced_map(d: BlockDecomposition, U) -> OperatorSumMap:
    """The linear map ``rho_S(0) -> rho_S(t)`` fixed by the bath operators of ``d``.

    For every unit-trace block ``phi_ij = sum_a s_a |x_a><y_a|`` and bath
    basis vector ``|k>`` the map carries a term with left element
    ``sqrt(s_a) <k|U|x_a> P_i`` and right element ``sqrt(s_a) <k|U|y_a> P_j``.
    """
    _require_sl(d)
    dS, dB = d.dS, d.dB
    U = check_unitary(U, dS * dB)
    P = [np.outer(d.basis[:, i], d.basis[:, i].conj()) for i in range(dS)]
    lefts, rights = [], []
    for i, j in d.trace_one_pairs():
        x, s, y = svd(d.bath_ops[i, j])
        for a in np.nonzero(s > SVD_CUTOFF)[0]:
            r = np.sqrt(s[a])
            lefts.append(r * _bath_slices(U, dS, dB, x[:, a]) @ P[i])
            rights.append(r * _bath_slices(U, dS, dB, y[:, a]) @ P[j])
    if not lefts:
        empty = np.zeros((0, dS, dS), dtype=complex)
        return OperatorSumMap(np.zeros(0), empty, empty, dS, dS)
    L = np.concatenate(lefts)
    R = np.concatenate(rights)
    return OperatorSumMap(np.ones(len(L)), L, R, dS, dS, Flavor.GENERAL)


def kraus_from_vqd(cq: CQForm, U) -> OperatorSumMap:
    """Kraus elements ``<b_i|U|lambda_j> Pi_a`` weighted by the bath eigenvalues ``lambda_j``."""
    dS, dB = cq.dS, cq.dB
    U = check_unitary(U, dS * dB)
    ops, weights = [], []
    for rb, Pi in zip(cq.bath_states, cq.projectors):
        spec = spectral_decompose(rb)
        for lam, vec in zip(spec.eigenvalues, spec.eigenvectors.T):
            if lam <= KRAUS_CUTOFF:
                continue
            for E in _bath_slices(U, dS, dB, vec):
                ops.append(E @ Pi)
                weights.append(lam)
    if not ops:
        return OperatorSumMap.from_terms([], dS, dS, Flavor.KRAUS)
    return OperatorSumMap.kraus(np.array(ops), np.array(weights))


def cp_difference(m: OperatorSumMap, cutoff: float = 1e-13) -> tuple[OperatorSumMap, OperatorSumMap]:
    """Split a Hermitian-preserving map into ``plus - minus`` with both parts CP."""
    C = choi_matrix(m).matrix
    dev = float(np.max(np.abs(C - dagger(C)))) if C.size else 0.0
    if dev > HERMITIAN_MAP_TOL:
        raise HermiticityError(f"map is not Hermitian-preserving (Choi anti-Hermitian part {dev:.3e})")
    spec = spectral_decompose(C)
    d, o = m.in_dim, m.out_dim
    scale = max(1.0, float(np.max(np.abs(spec.eigenvalues))))
    plus, minus = [], []
    for mu, v in zip(spec.eigenvalues, spec.eigenvectors.T):
        if abs(mu) <= cutoff * scale:
            continue
        K = np.sqrt(abs(mu) * d) * v.reshape(d, o).T
        (plus if mu > 0 else minus).append(K)

    def _pack(ops):
        if not ops:
            return OperatorSumMap.from_terms([], d, o, Flavor.KRAUS)
        return OperatorSumMap.kraus(np.array(ops))

    return _pack(plus), _pack(minus)


def transpose_map(dim: int = 2) -> OperatorSumMap:
    """Transpose as a real-weighted operator sum.

    Diagonal matrix units enter with weight 1; for each ``i < j`` the
    symmetric and antisymmetric swaps of ``i, j`` enter with +1/2 and -1/2.
    """
    ops, weights = [], []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1
        ops.append(e)
        weights.append(1.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            s = np.zeros((dim, dim), dtype=complex)
            s[i, j] = s[j, i] = 1
            a = np.zeros((dim, dim), dtype=complex)
            a[i, j], a[j, i] = 1, -1
            ops.extend([s, a])
            weights.extend([0.5, -0.5])
    return OperatorSumMap.hermitian(np.array(ops), np.array(weights))


def depolarizing_map(dim: int) -> OperatorSumMap:
    """``sigma -> Tr[sigma] I / dim`` via the ``dim^2`` matrix units."""
    ops = []
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1
            ops.append(e)
    return OperatorSumMap.kraus(np.array(ops), np.full(len(ops), 1.0 / dim))
