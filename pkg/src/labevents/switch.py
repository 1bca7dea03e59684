"""Coarse, fine-grained, effective and routed descriptions of the quantum switch.

Conventions:

* control ``C`` is a qubit, target ``T`` is ``C^d``; composite operators on
  control and target are ordered control ⊗ target;
* a vacuum-extended factor is ``C^d ⊕ |Ω>`` with the vacuum as the last
  basis index (sector marks ``(("photon", d), ("vac", 1))``);
* the two wires leaving the distribution isometry are ordered
  (first-receiver-for-control-0, first-receiver-for-control-1), i.e.
  (Alice's wire, Bob's wire) at the first time step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .linalg import Factor, Space, direct_sum, ket

LEAK_ATOL = 1e-12


def vacuum_factor(label: str, d: int) -> Factor:
    return Factor(label, d + 1, (("photon", d), ("vac", 1)))


def qs_coarse(ua: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """``|0><0| ⊗ U_B U_A + |1><1| ⊗ U_A U_B`` on control ⊗ target."""
    ua = np.asarray(ua, dtype=complex)
    ub = np.asarray(ub, dtype=complex)
    if ua.shape != ub.shape:
        raise ValueError(f"unitaries must share a dimension, got {ua.shape} and {ub.shape}")
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    return np.kron(p0, ub @ ua) + np.kron(p1, ua @ ub)


def w_sup(d: int) -> np.ndarray:
    """Isometry ``C ⊗ T -> (C^d ⊕ Ω) ⊗ (C^d ⊕ Ω)``: ``|0>|ψ> -> |ψ>|Ω>``, ``|1>|ψ> -> |Ω>|ψ>``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    n = d + 1
    vac = d
    w = np.zeros((n * n, 2 * d), dtype=complex)
    for i in range(d):
        w[i * n + vac, i] = 1.0
        w[vac * n + i, d + i] = 1.0
    return w


def vacuum_extend(u: np.ndarray) -> np.ndarray:
    """``U ⊕ 1_Ω``."""
    return direct_sum(np.asarray(u, dtype=complex), np.eye(1))


def fine_grained_op(u: np.ndarray, t: int, n_times: int = 2) -> np.ndarray:
    """``(U ⊕ 1_Ω) ⊗ |t><t| + 1 ⊗ (1 - |t><t|)`` on vacuum-extended factor ⊗ clock.

    On the ``|t>`` clock subspace this is the time-labelled operation; on
    other clock readings it does nothing, so the result is unitary.
    """
    if not 0 <= t < n_times:
        raise ValueError(f"time index {t} out of range for {n_times} times")
    ext = vacuum_extend(u)
    pt = np.diag(ket(t, n_times).real)
    return np.kron(ext, pt) + np.kron(np.eye(ext.shape[0]), np.eye(n_times) - pt)


def fine_grained_event(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Alice's overall fine-grained operation on ``H^{t1} ⊗ H^{t2}`` (fixed time kets dropped)."""
    return np.kron(vacuum_extend(u1), vacuum_extend(u2))


def swap(d1: int, d2: int) -> np.ndarray:
    out = np.zeros((d1 * d2, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            out[j * d1 + i, i * d2 + j] = 1.0
    return out


def one_particle_projector(d: int) -> np.ndarray:
    """Projector onto span{|i>|Ω>, |Ω>|j>} in ``(C^d ⊕ Ω)^{⊗2}``."""
    w = w_sup(d)
    return w @ w.conj().T


def one_particle_iso(d: int) -> np.ndarray:
    """Isometry ``V: C^d ⊗ {t1,t2} -> (C^d ⊕ Ω)^{⊗2}``.

    ``|i,t1> -> |i>|Ω>`` and ``|j,t2> -> |Ω>|j>``. The domain is ordered like
    :func:`effective_op` (target ⊗ time pointer), so ``V† U V`` is directly
    comparable to it.
    """
    n = d + 1
    v = np.zeros((n * n, 2 * d), dtype=complex)
    for i in range(d):
        v[i * n + d, 2 * i + 0] = 1.0
        v[d * n + i, 2 * i + 1] = 1.0
    return v


def sector_leakage(vec_or_rho: np.ndarray, d: int) -> float:
    """Weight outside the one-particle sector."""
    q = np.eye((d + 1) ** 2) - one_particle_projector(d)
    x = np.asarray(vec_or_rho, dtype=complex)
    if x.ndim == 1:
        return float(np.linalg.norm(q @ x) ** 2)
    return float(np.trace(q @ x @ q).real)


def to_one_particle(vec: np.ndarray, d: int, atol: float = LEAK_ATOL) -> np.ndarray:
    """Coordinates of a two-wire vector in ``C^d ⊗ {t1,t2}``; refuses out-of-sector input."""
    leak = sector_leakage(vec, d)
    if leak > atol:
        raise ValueError(f"vector has weight {leak:.3e} outside the one-particle sector")
    return one_particle_iso(d).conj().T @ np.asarray(vec, dtype=complex)


def recombination_kraus(d: int) -> list[np.ndarray]:
    """Kraus operators of the recombination ``(C^d ⊕ Ω)^{⊗2} -> C ⊗ T``.

    The first operator is ``W_sup†`` (unitary on the one-particle sector). The
    rest send each out-of-sector basis vector to ``|0>|0>``, which only makes
    the map trace preserving on the whole space; one-particle inputs never
    reach them.
    """
    w = w_sup(d)
    ops = [w.conj().T]
    q = np.eye((d + 1) ** 2) - w @ w.conj().T
    sink = ket(0, 2 * d)
    for j in range((d + 1) ** 2):
        if q[j, j].real > 0.5:
            ops.append(np.outer(sink, ket(j, (d + 1) ** 2)))
    return ops


def fine_grained_wires(ua1, ua2, ub1, ub2) -> np.ndarray:
    """The four time-labelled operations on the two wires, before recombination.

    Returns the isometry ``C ⊗ T -> (C^d ⊕ Ω)^{⊗2}``: distribute, act at t1,
    exchange wires, act at t2, exchange back.
    """
    mats = [np.asarray(u, dtype=complex) for u in (ua1, ua2, ub1, ub2)]
    if len({m.shape for m in mats}) != 1:
        raise ValueError("all four unitaries must share a dimension")
    d = mats[0].shape[0]
    n = d + 1
    ua1, ua2, ub1, ub2 = mats
    sw = swap(n, n)
    at_t1 = np.kron(vacuum_extend(ua1), vacuum_extend(ub1))
    at_t2 = np.kron(vacuum_extend(ua2), vacuum_extend(ub2))
    return sw @ at_t2 @ sw @ at_t1 @ w_sup(d)


def fine_grained_circuit(ua1, ua2, ub1, ub2) -> np.ndarray:
    """Overall action on control ⊗ target of the fine-grained circuit.

    ``α|0>|Ψ> + β|1>|Ψ> -> α|0> U_B² U_A¹|Ψ> + β|1> U_A² U_B¹|Ψ>``.
    """
    wires = fine_grained_wires(ua1, ua2, ub1, ub2)
    d = np.asarray(ua1).shape[0]
    leak = max(sector_leakage(wires[:, j], d) for j in range(wires.shape[1]))
    if leak > LEAK_ATOL:
        raise ValueError(f"fine-grained circuit leaked {leak:.3e} out of the one-particle sector")
    return w_sup(d).conj().T @ wires


def effective_op(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """``U¹ ⊗ |t1><t1| + U² ⊗ |t2><t2|`` on target ⊗ time pointer."""
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    if u1.shape != u2.shape:
        raise ValueError("unitaries must share a dimension")
    return np.kron(u1, np.diag([1.0, 0.0])) + np.kron(u2, np.diag([0.0, 1.0]))


@dataclass(frozen=True, eq=False)
class SectoredOperator:
    """Operator on a space whose factors carry sector marks, with its block map.

    ``blocks`` maps (output sector, input sector) of ``sector_factor`` to the
    target block; pairs absent from it are declared zero.
    """

    space: Space
    matrix: np.ndarray
    sector_factor: str
    blocks: Mapping[tuple[str, str], np.ndarray]

    def block(self, out_sector: str, in_sector: str) -> np.ndarray:
        f = self.space.factor(self.sector_factor)
        if self.space.labels[0] != self.sector_factor:
            raise NotImplementedError("block extraction expects the sectored factor first")
        rest = self.space.dim // f.dim
        so, si = f.sector_slice(out_sector), f.sector_slice(in_sector)
        m = self.matrix.reshape(f.dim, rest, f.dim, rest)
        return m[so, :, si, :].reshape((so.stop - so.start) * rest, (si.stop - si.start) * rest)

    def block_structure_error(self) -> float:
        """Largest deviation between the declared block map and the numbers."""
        f = self.space.factor(self.sector_factor)
        worst = 0.0
        for so, _ in f.sectors:
            for si, _ in f.sectors:
                actual = self.block(so, si)
                declared = self.blocks.get((so, si), np.zeros_like(actual))
                worst = max(worst, float(np.max(np.abs(actual - declared), initial=0.0)))
        return worst


def routed_op(u1: np.ndarray, u2: np.ndarray) -> SectoredOperator:
    """``|0><0| ⊗ U¹ + |1><1| ⊗ U²`` on control ⊗ target, sector-diagonal in the control."""
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    if u1.shape != u2.shape:
        raise ValueError("unitaries must share a dimension")
    d = u1.shape[0]
    m = np.kron(np.diag([1.0, 0.0]), u1) + np.kron(np.diag([0.0, 1.0]), u2)
    space = Space((Factor("C_A", 2, (("0", 1), ("1", 1))), Factor("T_A", d)))
    return SectoredOperator(space, m, "C_A", {("0", "0"): u1, ("1", "1"): u2})


def relabel_effective_to_routed(op: np.ndarray, d: int) -> np.ndarray:
    """Conjugate a target ⊗ time operator into time ⊗ target order (``t1 -> 0``, ``t2 -> 1``)."""
    s = swap(d, 2)
    return s @ op @ s.T


def ref_entangled_control(alpha: complex, beta: complex) -> np.ndarray:
    """``α|0>|t1>|t1> + β|1>|t2>|t2>`` on control ⊗ R_A ⊗ R_B."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1) > 1e-12:
        raise ValueError(f"amplitudes are not normalised: |α|²+|β|² = {norm}")
    v = np.zeros(8, dtype=complex)
    v[0b000] = alpha
    v[0b111] = beta
    return v


# process-matrix description


@dataclass(frozen=True)
class Party:
    name: str
    inputs: tuple[tuple[str, int], ...]
    outputs: tuple[tuple[str, int], ...]

    @property
    def legs(self) -> tuple[tuple[str, int], ...]:
        return self.inputs + self.outputs

    @property
    def dim_in(self) -> int:
        return int(np.prod([d for _, d in self.inputs], dtype=int))

    @property
    def dim_out(self) -> int:
        return int(np.prod([d for _, d in self.outputs], dtype=int))


@dataclass(frozen=True, eq=False)
class ProcessVector:
    """Pure process ``|w>`` over the parties' input and output legs.

    Legs are ordered party by party, inputs before outputs, so the amplitude
    tensor has one axis per leg in that order.
    """

    parties: tuple[Party, ...]
    tensor: np.ndarray

    @property
    def legs(self) -> list[tuple[str, int]]:
        return [leg for p in self.parties for leg in p.legs]

    @property
    def vector(self) -> np.ndarray:
        return self.tensor.ravel()

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    def matrix(self) -> np.ndarray:
        v = self.vector
        return np.outer(v, v.conj())

    def party(self, name: str) -> Party:
        for p in self.parties:
            if p.name == name:
                return p
        raise KeyError(f"unknown party {name!r}")


def qs_process_vector(d: int) -> ProcessVector:
    """``|w>`` of the quantum switch with parties C (source), A, B and D (sink)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    parties = (
        Party("C", (), (("C_out_c", 2), ("C_out_t", d))),
        Party("A", (("A_in", d),), (("A_out", d),)),
        Party("B", (("B_in", d),), (("B_out", d),)),
        Party("D", (("D_in_c", 2), ("D_in_t", d)), ()),
    )
    eye = np.eye(d)
    c0, c1 = ket(0, 2).real, ket(1, 2).real
    # legs: Cc, Ct, Ai, Ao, Bi, Bo, Dc, Dt
    # control 0: C_t -> A_in, A_out -> B_in, B_out -> D_t
    branch0 = np.einsum("p,q,ia,ob,ct->piaobcqt", c0, c0, eye, eye, eye)
    # control 1: C_t -> B_in, B_out -> A_in, A_out -> D_t
    branch1 = np.einsum("p,q,ib,ca,ot->piaobcqt", c1, c1, eye, eye, eye)
    # einsum output letters: p=Cc, i=Ct, a=Ai, o=Ao, b=Bi, c=Bo, q=Dc, t=Dt
    return ProcessVector(parties, (branch0 + branch1).astype(complex))


def state_choi(rho: np.ndarray) -> np.ndarray:
    """Choi matrix of a preparation (no input): the state itself."""
    return np.asarray(rho, dtype=complex)


def effect_choi(effect: np.ndarray) -> np.ndarray:
    """Choi matrix of ``X -> Tr[E X]`` (no output): ``E^T``."""
    return np.asarray(effect, dtype=complex).T


def born_probability(process: ProcessVector, chois: Mapping[str, np.ndarray]) -> float:
    """``Tr[W (⊗_k M_k)^T]`` for ``W = |w><w|``.

    Each ``M_k`` is the Choi matrix ``sum_ij |i><j| ⊗ M(|i><j|)`` of party k's
    instrument element on its inputs ⊗ outputs. Contracted leg by leg, never
    materialising ``W``.
    """
    missing = [p.name for p in process.parties if p.name not in chois]
    if missing:
        raise KeyError(f"missing Choi matrices for parties {missing}")
    n = len(process.legs)
    bra = list(range(n))
    kets = list(range(n, 2 * n))
    operands: list = [process.tensor.conj(), bra, process.tensor, kets]
    pos = 0
    for party in process.parties:
        dims = [dim for _, dim in party.legs]
        k = len(dims)
        m = np.asarray(chois[party.name], dtype=complex)
        size = int(np.prod(dims, dtype=int))
        if m.shape != (size, size):
            raise ValueError(f"party {party.name!r}: Choi shape {m.shape}, expected {(size, size)}")
        if k:
            # (M^T)[row, col] contracts <w| on rows and |w> on cols
            operands += [m.T.reshape(dims + dims), bra[pos:pos + k] + kets[pos:pos + k]]
        else:
            operands += [m.reshape(()), []]
        pos += k
    value = np.einsum(*operands, [], optimize=True)
    return float(np.real(value))


def unitary_choi(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    w = np.kron(np.eye(u.shape[1]), u) @ np.eye(u.shape[1]).ravel()
    return np.outer(w, w.conj())

