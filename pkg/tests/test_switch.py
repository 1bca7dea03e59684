import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labevents.linalg import choi_matrix, random_cptp, random_pure, random_state, random_unitary
from labevents.switch import (
    SectoredOperator,
    born_probability,
    effect_choi,
    effective_op,
    fine_grained_circuit,
    fine_grained_event,
    fine_grained_op,
    fine_grained_wires,
    one_particle_iso,
    one_particle_projector,
    qs_coarse,
    qs_process_vector,
    recombination_kraus,
    ref_entangled_control,
    relabel_effective_to_routed,
    routed_op,
    sector_leakage,
    state_choi,
    swap,
    to_one_particle,
    vacuum_extend,
    w_sup,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=4)


def _amps(rng):
    v = random_pure(2, rng)
    return v[0], v[1]


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_coarse_switch_matches_direct_products(seed, d):
    rng = np.random.default_rng(seed)
    ua, ub = random_unitary(d, rng), random_unitary(d, rng)
    alpha, beta = _amps(rng)
    psi = random_pure(d, rng)
    got = qs_coarse(ua, ub) @ np.kron([alpha, beta], psi)
    want = np.concatenate([alpha * ub @ ua @ psi, beta * ua @ ub @ psi])
    assert np.allclose(got, want, atol=1e-12)


def test_coarse_switch_frozen_example():
    # [DERIVED] U_A = X, U_B = Z on |+>|0>: (|0>ZX|0> + |1>XZ|0>)/sqrt2 = (|0>(-|1>) + |1>|1>)/sqrt2
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    out = qs_coarse(x, z) @ (np.kron([1, 1], [1, 0]) / np.sqrt(2))
    assert np.allclose(out, np.array([0, -1, 0, 1]) / np.sqrt(2))
    with pytest.raises(ValueError):
        qs_coarse(np.eye(2), np.eye(3))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_w_sup_is_an_isometry_onto_the_one_particle_sector(d):
    w = w_sup(d)
    assert np.allclose(w.conj().T @ w, np.eye(2 * d), atol=1e-12)
    p = one_particle_projector(d)
    assert np.allclose(p @ p, p)
    assert round(np.trace(p).real) == 2 * d


def test_w_sup_frozen_entries():
    # |0>|psi> -> |psi>|vac>, |1>|psi> -> |vac>|psi> with vacuum as the last index (d = 2, wire dim 3)
    w = w_sup(2)
    assert w[0 * 3 + 2, 0] == 1 and w[1 * 3 + 2, 1] == 1
    assert w[2 * 3 + 0, 2] == 1 and w[2 * 3 + 1, 3] == 1


def test_swap_and_vacuum_extension():
    a, b = np.arange(2.0), np.arange(3.0) + 5
    assert np.allclose(swap(2, 3) @ np.kron(a, b), np.kron(b, a))
    u = random_unitary(2, 0)
    ext = vacuum_extend(u)
    assert ext.shape == (3, 3) and ext[2, 2] == 1 and np.allclose(ext[:2, :2], u)


def test_fine_grained_op_acts_only_on_its_time():
    u = random_unitary(2, 4)
    op = fine_grained_op(u, 1)
    assert np.allclose(op.conj().T @ op, np.eye(6))
    v = np.kron([1, 0, 0], [0, 1])  # photon basis 0 at clock t2
    assert np.allclose(op @ v, np.kron(vacuum_extend(u)[:, 0], [0, 1]))
    w = np.kron([1, 0, 0], [1, 0])
    assert np.allclose(op @ w, w)
    with pytest.raises(ValueError):
        fine_grained_op(u, 2)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 3))
def test_fine_grained_circuit_equals_coarse_for_repeated_unitaries(seed, d):
    rng = np.random.default_rng(seed)
    ua, ub = random_unitary(d, rng), random_unitary(d, rng)
    assert np.allclose(fine_grained_circuit(ua, ua, ub, ub), qs_coarse(ua, ub), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 3))
def test_fine_grained_circuit_with_distinct_unitaries(seed, d):
    rng = np.random.default_rng(seed)
    ua1, ua2, ub1, ub2 = (random_unitary(d, rng) for _ in range(4))
    alpha, beta = _amps(rng)
    psi = random_pure(d, rng)
    got = fine_grained_circuit(ua1, ua2, ub1, ub2) @ np.kron([alpha, beta], psi)
    want = np.concatenate([alpha * ub2 @ ua1 @ psi, beta * ua2 @ ub1 @ psi])
    assert np.allclose(got, want, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_equivalence_chain(seed, d):
    rng = np.random.default_rng(seed)
    u1, u2 = random_unitary(d, rng), random_unitary(d, rng)
    v = one_particle_iso(d)
    eff = effective_op(u1, u2)
    assert np.allclose(v.conj().T @ fine_grained_event(u1, u2) @ v, eff, atol=1e-12)
    routed = routed_op(u1, u2)
    assert np.allclose(relabel_effective_to_routed(eff, d), routed.matrix, atol=1e-12)
    assert routed.block_structure_error() <= 1e-12
    assert np.allclose(routed.block("0", "0"), u1) and np.allclose(routed.block("1", "1"), u2)


def test_sectored_operator_detects_wrong_blocks():
    u1, u2 = random_unitary(2, 1), random_unitary(2, 2)
    good = routed_op(u1, u2)
    bad = SectoredOperator(good.space, good.matrix, "C_A", {("0", "0"): u1, ("1", "1"): u1})
    assert bad.block_structure_error() > 0.1


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_fine_grained_wires_never_leave_the_one_particle_sector(seed, d):
    rng = np.random.default_rng(seed)
    wires = fine_grained_wires(*(random_unitary(d, rng) for _ in range(4)))
    state = wires @ random_pure(2 * d, rng)
    assert sector_leakage(state, d) <= 1e-12
    assert sector_leakage(np.outer(state, state.conj()), d) <= 1e-12
    coords = to_one_particle(state, d)
    assert np.linalg.norm(coords) == pytest.approx(1.0)


def test_two_photon_state_is_refused():
    d = 2
    both = np.zeros(9)
    both[0] = 1.0  # photon on both wires
    assert sector_leakage(both, d) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="outside the one-particle sector"):
        to_one_particle(both, d)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_recombination_is_trace_preserving_and_inverts_w_sup(d):
    ks = recombination_kraus(d)
    total = sum(k.conj().T @ k for k in ks)
    assert np.allclose(total, np.eye((d + 1) ** 2))
    assert np.allclose(ks[0] @ w_sup(d), np.eye(2 * d))
    for k in ks[1:]:
        assert np.allclose(k @ w_sup(d), 0)


def test_ref_entangled_control():
    v = ref_entangled_control(0.6, 0.8)
    assert v[0] == 0.6 and v[7] == 0.8 and np.count_nonzero(v) == 2
    with pytest.raises(ValueError):
        ref_entangled_control(1, 1)


@pytest.mark.parametrize("d,norm", [(1, 2.0), (2, 16.0), (3, 54.0)])
def test_process_vector_norm(d, norm):
    # [DERIVED] two orthogonal branches, each a product of three d-dim identity wires: 2 d^3
    w = qs_process_vector(d)
    assert w.norm_sq == pytest.approx(norm, abs=1e-9)
    assert [name for name, _ in w.legs] == ["C_out_c", "C_out_t", "A_in", "A_out", "B_in", "B_out",
                                             "D_in_c", "D_in_t"]


def test_process_matrix_has_rank_one():
    w = qs_process_vector(2)
    assert np.linalg.matrix_rank(w.matrix(), tol=1e-9) == 1
    assert w.party("A").dim_in == 2
    with pytest.raises(KeyError):
        w.party("Z")


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3))
def test_born_rule_is_normalised(seed, d):
    rng = np.random.default_rng(seed)
    w = qs_process_vector(d)
    rho = random_state(2 * d, rng)
    ca = random_cptp(d, d, rng).choi()
    cb = random_cptp(d, d, rng).choi()
    basis = random_unitary(2 * d, rng)
    probs = []
    for k in range(2 * d):
        e = np.outer(basis[:, k], basis[:, k].conj())
        probs.append(born_probability(w, {"C": state_choi(rho), "A": ca, "B": cb, "D": effect_choi(e)}))
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)
    assert min(probs) > -1e-12


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3))
def test_born_rule_matches_circuit_simulation(seed, d):
    rng = np.random.default_rng(seed)
    ua, ub = random_unitary(d, rng), random_unitary(d, rng)
    phi, eta = random_pure(2 * d, rng), random_pure(2 * d, rng)
    chois = {"C": state_choi(np.outer(phi, phi.conj())), "A": choi_matrix([ua], d), "B": choi_matrix([ub], d),
             "D": effect_choi(np.outer(eta, eta.conj()))}
    oracle = abs(np.vdot(eta, qs_coarse(ua, ub) @ phi)) ** 2
    assert born_probability(qs_process_vector(d), chois) == pytest.approx(oracle, abs=1e-9)


def test_born_probability_checks_its_inputs():
    w = qs_process_vector(2)
    with pytest.raises(KeyError):
        born_probability(w, {"C": np.eye(4) / 4})
    with pytest.raises(ValueError):
        born_probability(w, {"C": np.eye(3), "A": np.eye(4), "B": np.eye(4), "D": np.eye(4)})
