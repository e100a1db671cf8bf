"""Bipartite states, their block decomposition and classical-quantum structure.

A state on ``H_S (x) H_B`` is written in a declared orthonormal system basis
``{|i>}`` as ``rho = sum_ij r_ij |i><j| (x) phi_ij`` where each bath operator
``phi_ij`` is scaled to unit trace whenever its trace is nonzero. The
decomposition is the input for everything else: the SL test, the block
structure of the supermatrix ``[phi_ij]``, the structural classical-quantum
form, and the induced map in :mod:`discord_gate.maps`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ConfigError, NotSLError, StateInvariantError
from .linalg import (
    RandomSource,
    RNGLike,
    as_generator,
    as_matrix,
    check_unitary,
    dagger,
    haar_state_vector,
    haar_unitary,
    hermiticity_deviation,
    kron,
    partial_trace_bath,
    partial_trace_system,
    random_density,
    random_hermitian,
    spectral_decompose,
    unitarity_deviation,
)

TRACE_ONE_TOL = 1e-10
PHI_EQUAL_TOL = 1e-10
BATH_PSD_TOL = 1e-10
NULL_WEIGHT = 1e-12
DEGENERACY_GAP = 1e-8
EQ7_TOL = 1e-10
MAX_REFINE_RETRIES = 8

# fixed stream for the refinement draws when the caller supplies none
_REFINE_SOURCE = RandomSource(seed=0x5EED, stream=7)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on ``dS * dB`` with a declared system basis.

    The stored matrix is the Hermitian part of the input; construction fails
    with :class:`StateInvariantError` if the input is not a valid state.
    """

    matrix: np.ndarray
    dS: int
    dB: int
    basis: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        dS, dB = int(self.dS), int(self.dB)
        if dS < 1 or dB < 1:
            raise StateInvariantError("dimensions", f"dS={dS}, dB={dB}")
        try:
            m = as_matrix(self.matrix, "state")
        except ValueError as exc:
            raise StateInvariantError("finite-entries", str(exc)) from exc
        if m.shape != (dS * dB, dS * dB):
            raise StateInvariantError("dimensions", f"matrix is {m.shape}, expected {(dS * dB,) * 2}")
        dev = hermiticity_deviation(m)
        if dev > 1e-10:
            raise StateInvariantError("hermitian", f"deviation {dev:.3e} > 1e-10")
        m = 0.5 * (m + dagger(m))
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise StateInvariantError("unit-trace", f"trace {tr!r}")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -1e-9:
            raise StateInvariantError("positive-semidefinite", f"min eigenvalue {lo:.3e}")
        if self.basis is None:
            basis = np.eye(dS, dtype=complex)
        else:
            try:
                basis = as_matrix(self.basis, "basis")
            except ValueError as exc:
                raise StateInvariantError("basis-unitary", str(exc)) from exc
            if basis.shape != (dS, dS):
                raise StateInvariantError("basis-unitary", f"basis is {basis.shape}, expected {(dS, dS)}")
            udev = unitarity_deviation(basis)
            if udev > 1e-12:
                raise StateInvariantError("basis-unitary", f"deviation {udev:.3e} > 1e-12")
        object.__setattr__(self, "dS", dS)
        object.__setattr__(self, "dB", dB)
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "basis", _frozen(basis))

    @property
    def dim(self) -> int:
        return self.dS * self.dB

    def rho_s(self) -> np.ndarray:
        return partial_trace_bath(self.matrix, self.dS, self.dB)

    def rho_b(self) -> np.ndarray:
        return partial_trace_system(self.matrix, self.dS, self.dB)

    def in_basis(self) -> np.ndarray:
        """The matrix with the system factor expressed in the declared basis."""
        V = kron(self.basis, np.eye(self.dB))
        return dagger(V) @ self.matrix @ V

    def with_basis(self, basis) -> "BipartiteState":
        return BipartiteState(self.matrix, self.dS, self.dB, basis, self.label)


class TraceTag(str, Enum):
    ONE = "one"
    ZERO_TRACELESS = "zero-traceless"
    ZERO_BLOCK = "zero-block"


@dataclass(frozen=True)
class BlockDecomposition:
    coeffs: np.ndarray  # (dS, dS)
    bath_ops: np.ndarray  # (dS, dS, dB, dB)
    trace_tags: tuple  # tuple of tuples of TraceTag
    sl: bool
    zero_threshold: float
    basis: np.ndarray
    dS: int
    dB: int

    def tag(self, i: int, j: int) -> TraceTag:
        return self.trace_tags[i][j]

    def nonzero(self, i: int, j: int) -> bool:
        return self.trace_tags[i][j] is not TraceTag.ZERO_BLOCK

    def trace_one_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.dS) for j in range(self.dS) if self.trace_tags[i][j] is TraceTag.ONE]

    def trace_value(self, i: int, j: int) -> float:
        """``t_ij``: 1 for unit-trace blocks, 0 otherwise."""
        return 1.0 if self.trace_tags[i][j] is TraceTag.ONE else 0.0

    def reconstruct(self) -> np.ndarray:
        """``sum_ij r_ij |v_i><v_j| (x) phi_ij`` in the computational frame."""
        dS, dB = self.dS, self.dB
        blocks = self.coeffs[:, :, None, None] * self.bath_ops
        local = blocks.transpose(0, 2, 1, 3).reshape(dS * dB, dS * dB)
        V = kron(self.basis, np.eye(dB))
        return V @ local @ dagger(V)

    def rho_b(self) -> np.ndarray:
        return np.einsum("i,iiab->ab", np.diagonal(self.coeffs), self.bath_ops)


def default_zero_threshold(state: BipartiteState) -> float:
    return 1e-12 * float(np.linalg.norm(state.matrix))


def raw_blocks(state: BipartiteState) -> np.ndarray:
    """``B_ij = (<i| (x) I) rho (|j> (x) I)`` as a ``(dS, dS, dB, dB)`` array."""
    dS, dB = state.dS, state.dB
    return state.in_basis().reshape(dS, dB, dS, dB).transpose(0, 2, 1, 3)


def decompose(state: BipartiteState, zero_threshold: float | None = None) -> BlockDecomposition:
    dS, dB = state.dS, state.dB
    thr = default_zero_threshold(state) if zero_threshold is None else float(zero_threshold)
    B = raw_blocks(state)
    coeffs = np.zeros((dS, dS), dtype=complex)
    ops = np.zeros((dS, dS, dB, dB), dtype=complex)
    tags = []
    for i in range(dS):
        row = []
        for j in range(dS):
            blk = B[i, j]
            tr = np.trace(blk)
            if np.linalg.norm(blk) <= thr:
                row.append(TraceTag.ZERO_BLOCK)
                continue
            if abs(tr) > TRACE_ONE_TOL:
                coeffs[i, j] = tr
                row.append(TraceTag.ONE)
            else:
                # any positive scale works here; Frobenius keeps phi unit norm
                coeffs[i, j] = np.linalg.norm(blk)
                row.append(TraceTag.ZERO_TRACELESS)
            ops[i, j] = blk / coeffs[i, j]
        tags.append(tuple(row))
    sl = not any(t is TraceTag.ZERO_TRACELESS for row in tags for t in row)
    coeffs.setflags(write=False)
    ops.setflags(write=False)
    return BlockDecomposition(coeffs, ops, tuple(tags), sl, thr, state.basis, dS, dB)


def is_sl(d: BlockDecomposition) -> bool:
    return d.sl


def _require_sl(d: BlockDecomposition):
    if not d.sl:
        bad = [(i, j) for i in range(d.dS) for j in range(d.dS) if d.tag(i, j) is TraceTag.ZERO_TRACELESS]
        raise NotSLError(f"state is not SL in its declared basis; traceless nonzero blocks at {bad}")


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def groups(self) -> list[tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return sorted((tuple(g) for g in out.values()), key=lambda g: g[0])


@dataclass(frozen=True)
class BlockPartition:
    blocks: list  # list[tuple[int, ...]]
    constant: list  # list[bool]
    representatives: list  # list[np.ndarray | None]
    projectors: list  # list[np.ndarray], computational frame
    offending: list  # list[tuple[pair, pair] | None] first mismatch per block


def find_blocks(d: BlockDecomposition) -> BlockPartition:
    _require_sl(d)
    uf = UnionFind(d.dS)
    for i, j in itertools.combinations(range(d.dS), 2):
        if d.nonzero(i, j) or d.nonzero(j, i):
            uf.union(i, j)
    blocks = uf.groups()
    constant, reps, projs, offending = [], [], [], []
    for blk in blocks:
        pairs = [(i, j) for i in blk for j in blk if d.nonzero(i, j)]
        ref = pairs[0] if pairs else None
        bad = None
        for p in pairs[1:]:
            if np.linalg.norm(d.bath_ops[p] - d.bath_ops[ref]) > PHI_EQUAL_TOL:
                bad = (ref, p)
                break
        constant.append(bad is None)
        offending.append(bad)
        reps.append(None if ref is None else np.array(d.bath_ops[ref]))
        cols = d.basis[:, list(blk)]
        projs.append(cols @ dagger(cols))
    return BlockPartition(blocks, constant, reps, projs, offending)


@dataclass(frozen=True)
class CQForm:
    """``rho = sum_a p_a rho_S^a (x) rho_B^a`` with the ``rho_S^a`` on orthogonal supports.

    ``refined`` holds, per block, the rank-one projectors onto an eigenbasis of
    ``rho_S^a`` (filled by :func:`is_vqd`), with weights ``refined_weights``.
    """

    weights: list
    system_states: list
    bath_states: list
    projectors: list
    blocks: list
    dS: int
    dB: int
    refined: Optional[list] = None
    refined_weights: Optional[list] = None

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.dS * self.dB,) * 2, dtype=complex)
        for p, rs, rb in zip(self.weights, self.system_states, self.bath_states):
            out += p * kron(rs, rb)
        return out


@dataclass(frozen=True)
class StructuralFailure:
    reason: str
    block: tuple
    pairs: Optional[tuple] = None

    def __bool__(self):
        return False


def structural_cp_form(d: BlockDecomposition, rho_s: np.ndarray | None = None):
    """Return a :class:`CQForm` if every block of ``[phi_ij]`` is constant, else a :class:`StructuralFailure`.

    ``rho_s`` defaults to the reduced system state rebuilt from ``d``.
    """
    part = find_blocks(d)
    for blk, ok, bad, rep in zip(part.blocks, part.constant, part.offending, part.representatives):
        if not ok:
            return StructuralFailure("non-constant-block", blk, bad)
        if rep is None:
            continue
        if abs(np.trace(rep) - 1.0) > TRACE_ONE_TOL:
            return StructuralFailure("representative-not-unit-trace", blk)
        if hermiticity_deviation(rep) > 1e-10 or np.linalg.eigvalsh(0.5 * (rep + dagger(rep)))[0] < -BATH_PSD_TOL:
            return StructuralFailure("representative-not-positive", blk)
    if rho_s is None:
        rho_s = partial_trace_bath(d.reconstruct(), d.dS, d.dB)
    weights, sys_states, bath_states, projs, blocks = [], [], [], [], []
    for blk, rep, P in zip(part.blocks, part.representatives, part.projectors):
        p = float(np.trace(rho_s @ P).real)
        if p <= NULL_WEIGHT or rep is None:
            continue
        rb = 0.5 * (rep + dagger(rep))
        weights.append(p)
        sys_states.append(P @ rho_s @ P / p)
        bath_states.append(rb)
        projs.append(P)
        blocks.append(blk)
    return CQForm(weights, sys_states, bath_states, projs, blocks, d.dS, d.dB)


def _bath_probe(rho: np.ndarray, dS: int, dB: int, gen: np.random.Generator) -> np.ndarray:
    """System operator ``Tr_B[rho (I (x) C)]`` for a random Hermitian ``C``."""
    C = random_hermitian(dB, gen)
    return partial_trace_bath(rho @ kron(np.eye(dS), C), dS, dB)


def _refined_eigvectors(rho_s, W, probe) -> np.ndarray:
    """Eigenvectors of ``rho_s`` inside ``span(W)``; degenerate groups rotated to diagonalize ``probe``."""
    local = dagger(W) @ rho_s @ W
    spec = spectral_decompose(0.5 * (local + dagger(local)))
    vecs = W @ spec.eigenvectors
    vals = spec.eigenvalues
    out = []
    start = 0
    for k in range(1, len(vals) + 1):
        if k == len(vals) or vals[k - 1] - vals[k] >= DEGENERACY_GAP:
            group = vecs[:, start:k]
            if group.shape[1] > 1:
                h = dagger(group) @ probe @ group
                group = group @ spectral_decompose(0.5 * (h + dagger(h))).eigenvectors
            out.append(group)
            start = k
    return np.concatenate(out, axis=1)


def eq7_residual(rho: np.ndarray, projectors, dB: int) -> float:
    """Frobenius distance between ``rho`` and its image under the non-selective measurement."""
    acc = np.zeros_like(rho)
    eye = np.eye(dB)
    for P in projectors:
        Q = kron(P, eye)
        acc += Q @ rho @ Q
    return float(np.linalg.norm(acc - rho))


def is_vqd(d: BlockDecomposition, rng: RNGLike | None = None, state_matrix: np.ndarray | None = None):
    """Vanishing-discord test in the declared basis.

    Returns ``(verdict, cq_form)``; ``cq_form`` carries the rank-one refinement
    on success and is ``None`` on failure.
    """
    form = structural_cp_form(d)
    if not form:
        return False, None
    rho = d.reconstruct() if state_matrix is None else state_matrix
    gen = as_generator(rng if rng is not None else _REFINE_SOURCE)
    for _ in range(MAX_REFINE_RETRIES + 1):
        probe = _bath_probe(rho, d.dS, d.dB, gen)
        refined, ref_w = [], []
        for p, rs, P, blk in zip(form.weights, form.system_states, form.projectors, form.blocks):
            W = d.basis[:, list(blk)]
            vecs = _refined_eigvectors(rs, W, probe)
            ks = [np.outer(v, v.conj()) for v in vecs.T]
            refined.append(ks)
            ref_w.append([float(np.trace(rs @ K).real) for K in ks])
        flat = [K for ks in refined for K in ks]
        if eq7_residual(rho, flat, d.dB) <= EQ7_TOL:
            return True, CQForm(
                form.weights, form.system_states, form.bath_states, form.projectors,
                form.blocks, form.dS, form.dB, refined, ref_w,
            )
    return False, None


def find_cq_basis(state: BipartiteState, rng: RNGLike | None = None) -> np.ndarray | None:
    """Search for a system basis in which the state is classical-quantum.

    The declared basis is tried first, then eigenbases of ``rho_S`` with
    degenerate eigenspaces split by random bath probes.
    """
    d = decompose(state)
    if d.sl and is_vqd(d, rng, state.matrix)[0]:
        return np.array(state.basis)
    gen = as_generator(rng if rng is not None else _REFINE_SOURCE)
    rho_s = state.rho_s()
    eye = np.eye(state.dS, dtype=complex)
    # without degeneracy the eigenbasis is unique up to phases, one pass decides
    degenerate = bool(np.any(np.abs(np.diff(np.linalg.eigvalsh(rho_s))) < DEGENERACY_GAP))
    for _ in range(MAX_REFINE_RETRIES + 1 if degenerate else 1):
        probe = _bath_probe(state.matrix, state.dS, state.dB, gen)
        V = _refined_eigvectors(rho_s, eye, probe)
        # re-orthonormalize to meet the 1e-12 basis check
        q, r = np.linalg.qr(V)
        V = q * (np.diag(r) / np.abs(np.diag(r)))[None, :]
        dc = decompose(state.with_basis(V))
        if dc.sl and is_vqd(dc, gen, state.matrix)[0]:
            return V
    return None


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

KINDS = ("product", "cq", "sl-generic", "separable-discordant", "entangled-pure")


@dataclass
class GenParams:
    dS: int = 2
    dB: int = 2
    # product: ranks of the factors (None = full)
    rank_s: Optional[int] = None
    rank_b: Optional[int] = None
    # cq: sizes of the system blocks (None = random composition of dS)
    block_sizes: Optional[tuple] = None
    local_rotation: bool = False
    # separable-discordant: number of non-orthogonal system pure states
    n_components: int = 2
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.dS < 2 or self.dB < 1:
            raise ConfigError(f"need dS >= 2 and dB >= 1, got dS={self.dS}, dB={self.dB}")
        if self.block_sizes is not None:
            if any(int(s) < 1 for s in self.block_sizes) or sum(self.block_sizes) != self.dS:
                raise ConfigError(f"block sizes {self.block_sizes} must be positive and sum to dS={self.dS}")
        for name, dim in (("rank_s", self.dS), ("rank_b", self.dB)):
            r = getattr(self, name)
            if r is not None and not 1 <= r <= dim:
                raise ConfigError(f"{name}={r} out of range [1, {dim}]")
        if not 2 <= self.n_components:
            raise ConfigError("n_components must be >= 2")


def _random_composition(n: int, gen: np.random.Generator) -> tuple:
    cuts = [c for c in range(1, n) if gen.random() < 0.5]
    edges = [0, *cuts, n]
    return tuple(b - a for a, b in zip(edges, edges[1:]))


def _gen_product(p: GenParams, gen):
    rs = random_density(p.dS, p.rank_s or p.dS, gen)
    rb = random_density(p.dB, p.rank_b or p.dB, gen)
    return kron(rs, rb)


def _gen_cq(p: GenParams, gen):
    sizes = p.block_sizes or _random_composition(p.dS, gen)
    perm = gen.permutation(p.dS)
    # block weights bounded away from zero so every projector carries support
    w = gen.dirichlet(np.ones(len(sizes)))
    w = 0.2 / len(sizes) + 0.8 * w
    rho = np.zeros((p.dS * p.dB,) * 2, dtype=complex)
    start = 0
    for size, wa in zip(sizes, w):
        idx = perm[start:start + size]
        start += size
        local = random_density(size, size, gen)
        rs = np.zeros((p.dS, p.dS), dtype=complex)
        rs[np.ix_(idx, idx)] = local
        rb = random_density(p.dB, p.dB, gen)
        rho += wa * kron(rs, rb)
    if p.local_rotation:
        V = kron(haar_unitary(p.dS, gen), np.eye(p.dB))
        rho = V @ rho @ dagger(V)
    return rho


def _sl_ok(rho, dS, dB) -> bool:
    st = BipartiteState(rho, dS, dB)
    thr = default_zero_threshold(st)
    traces = np.abs(np.einsum("ijaa->ij", raw_blocks(st)))
    return bool(np.all(traces >= 10 * thr) and decompose(st).sl)


def _gen_sl_generic(p: GenParams, gen, max_tries: int = 1000):
    n = p.dS * p.dB
    for tries in range(max_tries):
        rho = random_density(n, n, gen)
        if _sl_ok(rho, p.dS, p.dB):
            return rho, tries
    raise RuntimeError("sl-generic rejection sampling exhausted")


def _gen_separable_discordant(p: GenParams, gen, max_tries: int = 1000):
    m = p.n_components
    for _ in range(max_tries):
        psis = [haar_state_vector(p.dS, gen) for _ in range(m)]
        overlaps = [abs(np.vdot(a, b)) ** 2 for a, b in itertools.combinations(psis, 2)]
        if not all(0.15 <= o <= 0.85 for o in overlaps):
            continue
        baths = [random_density(p.dB, 1, gen) for _ in range(m)]
        if p.dB > 1 and not all(
            abs(np.trace(a @ b).real) <= 0.6 for a, b in itertools.combinations(baths, 2)
        ):
            continue
        w = 0.5 / m + 0.5 * gen.dirichlet(np.ones(m))
        rho = sum(wk * kron(np.outer(s, s.conj()), b) for wk, s, b in zip(w, psis, baths))
        if _sl_ok(rho, p.dS, p.dB):
            return rho
    raise RuntimeError("separable-discordant rejection sampling exhausted")


def _gen_entangled_pure(p: GenParams, gen):
    v = haar_state_vector(p.dS * p.dB, gen)
    return np.outer(v, v.conj())


def sl_generic_with_rejections(params: GenParams, rng: RNGLike) -> tuple[BipartiteState, int]:
    """Draw an sl-generic state and report how many candidates were rejected."""
    params.validate()
    rho, rejected = _gen_sl_generic(params, as_generator(rng))
    return BipartiteState(rho, params.dS, params.dB, label="sl-generic"), rejected


def generate_state(kind: str, params: GenParams | dict | None, rng: RNGLike) -> BipartiteState:
    if params is None:
        params = GenParams()
    elif isinstance(params, dict):
        try:
            params = GenParams(**params)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
    params.validate()
    gen = as_generator(rng)
    if kind == "product":
        rho = _gen_product(params, gen)
    elif kind == "cq":
        rho = _gen_cq(params, gen)
    elif kind == "sl-generic":
        rho, _ = _gen_sl_generic(params, gen)
    elif kind == "separable-discordant":
        rho = _gen_separable_discordant(params, gen)
    elif kind == "entangled-pure":
        rho = _gen_entangled_pure(params, gen)
    else:
        raise ConfigError(f"unknown state kind {kind!r}; expected one of {KINDS}")
    return BipartiteState(rho, params.dS, params.dB, label=kind)


def bell_state() -> BipartiteState:
    v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return BipartiteState(np.outer(v, v.conj()), 2, 2, label="bell")


def werner_state(p: float) -> BipartiteState:
    """``p |Bell><Bell| + (1-p) I/4``; full rank for ``p < 1``."""
    b = bell_state().matrix
    return BipartiteState(p * b + (1 - p) * np.eye(4) / 4, 2, 2, label=f"werner-{p}")


def evolve(state: BipartiteState, U) -> np.ndarray:
    """Reduced system state ``Tr_B[U rho U^dag]``."""
    U = check_unitary(U, state.dim)
    return partial_trace_bath(U @ state.matrix @ dagger(U), state.dS, state.dB)
