import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import direct_image
from discord_gate.errors import DimensionError, HermiticityError, NotSLError, UnitarityError
from discord_gate.linalg import RandomSource, haar_unitary, kron, partial_trace_bath, random_density, random_hermitian
from discord_gate.maps import (
    Flavor,
    OperatorSumMap,
    apply_map,
    choi_matrix,
    cp_difference,
    depolarizing_map,
    hermitian_basis,
    induced_map,
    is_cp,
    kraus_from_vqd,
    map_properties,
    superoperator,
    transpose_map,
)
from discord_gate.states import BipartiteState, bell_state, decompose, evolve, generate_state, is_vqd, structural_cp_form

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)])
sl_kinds = st.sampled_from(["product", "cq", "sl-generic", "separable-discordant"])


def draw(kind, dims_, seed):
    g = RandomSource(seed).generator()
    s = generate_state(kind, dict(dS=dims_[0], dB=dims_[1]), g)
    return s, haar_unitary(s.dim, g), g


def hermitian_residue(m):
    return max(np.max(np.abs(apply_map(m, h) - apply_map(m, h).conj().T)) for h in hermitian_basis(m.in_dim))


# --- representation ------------------------------------------------------

def test_flavor_validation():
    e = np.eye(2)[None]
    with pytest.raises(ValueError):
        OperatorSumMap([1.0], e, 2 * e, 2, 2, Flavor.HERMITIAN)
    with pytest.raises(ValueError):
        OperatorSumMap.kraus(e, [-1.0])
    assert OperatorSumMap([1.0], e, 2 * e, 2, 2).flavor is Flavor.GENERAL


def test_identity_map(rng):
    sigma = random_hermitian(3, rng)
    assert np.allclose(apply_map(OperatorSumMap.identity(3), sigma), sigma)


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_map(OperatorSumMap.identity(2), np.eye(3))


def test_apply_linearity(rng):
    s, U, g = draw("sl-generic", (2, 3), 4)
    m = induced_map(decompose(s), U)
    s1, s2 = random_hermitian(2, g), random_hermitian(2, g)
    a, b = g.standard_normal(2)
    lhs = apply_map(m, a * s1 + b * s2)
    assert np.max(np.abs(lhs - a * apply_map(m, s1) - b * apply_map(m, s2))) <= 1e-12


def test_superoperator_units():
    t = superoperator(transpose_map(2))
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2)); unit[i, j] = 1
            assert np.allclose(t[i, j], unit.T)


# --- Choi ----------------------------------------------------------------

def test_choi_identity_is_bell_projector():
    C = choi_matrix(OperatorSumMap.identity(2))
    assert np.allclose(C.matrix, bell_state().matrix)
    assert C.trace == pytest.approx(1.0)


def test_choi_depolarizing():
    C = choi_matrix(depolarizing_map(2))
    assert np.allclose(C.matrix, np.eye(4) / 4)


def test_choi_transpose_min_eigenvalue():
    # normalized swap: eigenvalues +-1/2
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[i * 2 + j, j * 2 + i] = 1
    C = choi_matrix(transpose_map(2)).matrix
    assert np.allclose(C, swap / 2)
    ok, lo = is_cp(transpose_map(2))
    assert not ok
    assert lo == pytest.approx(np.linalg.eigvalsh(swap / 2)[0]) == pytest.approx(-0.5)


def test_choi_layout():
    # map sending |0><0| to |1><1|, other units to zero
    op = np.zeros((2, 2)); op[1, 0] = 1
    C = choi_matrix(OperatorSumMap.kraus(op[None])).matrix
    expected = np.zeros((4, 4)); expected[0 * 2 + 1, 0 * 2 + 1] = 0.5
    assert np.allclose(C, expected)


@given(seeds, dims, sl_kinds)
def test_choi_trace_one_for_trace_preserving(seed, dims_, kind):
    s, U, _ = draw(kind, dims_, seed)
    m = induced_map(decompose(s), U)
    assert choi_matrix(m).trace == pytest.approx(1.0, abs=1e-10)


@given(seeds, st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=6))
def test_choi_of_kraus_is_psd(seed, dim, n_ops):
    g = RandomSource(seed).generator()
    ops = g.standard_normal((n_ops, dim, dim)) + 1j * g.standard_normal((n_ops, dim, dim))
    assert is_cp(OperatorSumMap.kraus(ops, g.uniform(0, 1, n_ops)), 1e-10)[0]


# --- properties ----------------------------------------------------------

def test_properties_asymmetric_term():
    left = np.array([[1, 0], [0, 0]])
    right = np.array([[0, 1], [0, 0]])
    rep = map_properties(OperatorSumMap([1.0], left[None], right[None], 2, 2))
    assert not rep.hermitian_preserving
    with pytest.raises(HermiticityError):
        is_cp(OperatorSumMap([1.0], left[None], right[None], 2, 2))
    with pytest.raises(HermiticityError):
        cp_difference(OperatorSumMap([1.0], left[None], right[None], 2, 2))


def test_properties_transpose():
    rep = map_properties(transpose_map(3))
    assert rep.hermitian_preserving and rep.trace_preserving


@settings(max_examples=30)
@given(seeds, dims, sl_kinds)
def test_induced_map_properties(seed, dims_, kind):
    s, U, _ = draw(kind, dims_, seed)
    m = induced_map(decompose(s), U)
    rep = map_properties(m)
    assert rep.hermitian_preserving and rep.hermitian_deviation <= 1e-12
    assert rep.trace_preserving
    out = apply_map(m, s.rho_s())
    assert abs(np.trace(out) - 1) <= 1e-10
    assert np.linalg.norm(out - evolve(s, U)) <= 1e-10


# --- induced map ---------------------------------------------------------

@settings(max_examples=30)
@given(seeds, dims, sl_kinds)
def test_induced_matches_direct_unit_images(seed, dims_, kind):
    s, U, _ = draw(kind, dims_, seed)
    d = decompose(s)
    sup = superoperator(induced_map(d, U))
    for i in range(d.dS):
        for j in range(d.dS):
            assert np.max(np.abs(sup[i, j] - direct_image(d, U, i, j))) <= 1e-12


def test_induced_product_direct_formula(rng):
    rs, rb = random_density(2, 2, rng), random_density(3, 3, rng)
    s = BipartiteState(kron(rs, rb), 2, 3)
    U = haar_unitary(6, rng)
    m = induced_map(decompose(s), U)
    sigma = random_hermitian(2, rng)
    expected = partial_trace_bath(U @ kron(sigma, rb) @ U.conj().T, 2, 3)
    assert np.max(np.abs(apply_map(m, sigma) - expected)) <= 1e-12


def test_induced_local_unitary(rng):
    s = BipartiteState(kron(random_density(2, 2, rng), random_density(2, 2, rng)), 2, 2)
    Us, Ub = haar_unitary(2, rng), haar_unitary(2, rng)
    m = induced_map(decompose(s), kron(Us, Ub))
    sigma = random_hermitian(2, rng)
    assert np.allclose(apply_map(m, sigma), Us @ sigma @ Us.conj().T, atol=1e-12)


def test_induced_map_declared_basis(rng):
    V = haar_unitary(2, rng)
    s = generate_state("sl-generic", None, rng).with_basis(V)
    U = haar_unitary(4, rng)
    m = induced_map(decompose(s), U)
    assert np.linalg.norm(apply_map(m, s.rho_s()) - evolve(s, U)) <= 1e-10


def test_induced_errors(rng):
    with pytest.raises(NotSLError):
        induced_map(decompose(bell_state()), np.eye(4))
    s = generate_state("product", None, rng)
    with pytest.raises(UnitarityError):
        induced_map(decompose(s), np.ones((4, 4)))


def test_induced_not_trace_preserving_without_diagonal():
    # phi_11 = 0 leaves (1,1) outside the unit-trace set
    rho = kron(np.diag([1.0, 0.0]), np.eye(2) / 2)
    d = decompose(BipartiteState(rho, 2, 2))
    rep = map_properties(induced_map(d, np.eye(4)))
    assert rep.hermitian_preserving
    assert not rep.trace_preserving


# --- Kraus from VQD ------------------------------------------------------

@settings(max_examples=30)
@given(seeds, dims, st.sampled_from(["product", "cq"]))
def test_kraus_from_vqd(seed, dims_, kind):
    s, U, _ = draw(kind, dims_, seed)
    d = decompose(s)
    ok, form = is_vqd(d)
    assert ok
    k = kraus_from_vqd(form, U)
    assert k.flavor is Flavor.KRAUS
    assert np.linalg.norm(apply_map(k, s.rho_s()) - evolve(s, U)) <= 1e-10
    acc = np.einsum("t,tai,taj->ij", k.weights, k.lefts.conj(), k.lefts)
    assert np.max(np.abs(acc - np.eye(s.dS))) <= 1e-10
    # agrees with the induced map as a superoperator
    assert np.max(np.abs(superoperator(k) - superoperator(induced_map(d, U)))) <= 1e-9
    assert is_cp(k, 1e-10)[0]


def test_kraus_product_identity_evolution(rng):
    s = BipartiteState(kron(random_density(2, 2, rng), random_density(2, 2, rng)), 2, 2)
    form = structural_cp_form(decompose(s))
    assert len(form.blocks) == 1
    k = kraus_from_vqd(form, np.eye(4))
    sigma = random_hermitian(2, rng)
    assert np.allclose(apply_map(k, sigma), sigma, atol=1e-12)


# --- CP difference -------------------------------------------------------

def test_cp_difference_identity():
    plus, minus = cp_difference(OperatorSumMap.identity(2))
    assert len(minus) == 0
    sigma = random_hermitian(2, RandomSource(1))
    assert np.allclose(apply_map(plus, sigma), sigma)


def test_cp_difference_transpose():
    t = transpose_map(2)
    plus, minus = cp_difference(t)
    assert len(plus) == 3 and len(minus) == 1
    for h in hermitian_basis(2):
        assert np.max(np.abs(apply_map(plus, h) - apply_map(minus, h) - h.T)) <= 1e-10


@settings(max_examples=30)
@given(seeds, dims, sl_kinds)
def test_cp_difference_induced(seed, dims_, kind):
    s, U, _ = draw(kind, dims_, seed)
    m = induced_map(decompose(s), U)
    plus, minus = cp_difference(m)
    for h in hermitian_basis(s.dS):
        assert np.max(np.abs(apply_map(plus, h) - apply_map(minus, h) - apply_map(m, h))) <= 1e-10
    assert hermitian_residue(plus) <= 1e-10
