"""Dense complex linear algebra over labelled composite spaces.

All states, channels and verdict metrics in the package are built from the
primitives here. Matrices are plain ``numpy`` arrays; the dataclasses only
attach the factor layout so that partial traces and local operators can be
addressed by label instead of by position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .measurement import ReferenceMeasurement

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
TP_ATOL = 1e-10


class InvariantError(ValueError):
    """A numerical invariant (positivity, completeness, ...) is violated."""


@dataclass(frozen=True)
class Factor:
    label: str
    dim: int
    # (sector label, sub-dimension) pairs; direct-sum structure is metadata only
    sectors: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"factor {self.label!r}: dim must be positive, got {self.dim}")
        if self.sectors and sum(n for _, n in self.sectors) != self.dim:
            raise ValueError(f"factor {self.label!r}: sector dims do not sum to {self.dim}")

    def sector_slice(self, name: str) -> slice:
        start = 0
        for sector, size in self.sectors:
            if sector == name:
                return slice(start, start + size)
            start += size
        raise KeyError(f"factor {self.label!r} has no sector {name!r}")


@dataclass(frozen=True)
class Space:
    """Ordered tensor product of labelled factors."""

    factors: tuple[Factor, ...]

    def __post_init__(self) -> None:
        labels = [f.label for f in self.factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in {labels}")

    @classmethod
    def of(cls, *items: Factor | tuple) -> "Space":
        """Build from ``Factor`` objects or ``(label, dim[, sectors])`` tuples."""
        factors = []
        for item in items:
            if isinstance(item, Factor):
                factors.append(item)
            else:
                label, dim, *rest = item
                sectors = tuple(tuple(s) for s in rest[0]) if rest else ()
                factors.append(Factor(label, int(dim), sectors))
        return cls(tuple(factors))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=int))

    def factor(self, label: str) -> Factor:
        for f in self.factors:
            if f.label == label:
                return f
        raise KeyError(f"unknown factor label {label!r}; space has {self.labels}")

    def index(self, label: str) -> int:
        return self.labels.index(self.factor(label).label)

    def subspace(self, labels: Iterable[str]) -> "Space":
        """Factors with the given labels, in this space's order."""
        wanted = set(labels)
        for label in wanted:
            self.factor(label)
        return Space(tuple(f for f in self.factors if f.label in wanted))

    def without(self, labels: Iterable[str]) -> "Space":
        drop = set(labels)
        for label in drop:
            self.factor(label)
        return Space(tuple(f for f in self.factors if f.label not in drop))

    def replace(self, labels: Sequence[str], new: Sequence[Factor]) -> "Space":
        """Swap the factors ``labels`` for ``new``, inserted where the first one sat."""
        positions = [self.index(label) for label in labels]
        first = min(positions)
        kept = [f for f in self.factors if f.label not in set(labels)]
        insert_at = sum(1 for i, f in enumerate(self.factors) if i < first and f.label not in set(labels))
        return Space(tuple(kept[:insert_at]) + tuple(new) + tuple(kept[insert_at:]))

    def permuted(self, order: Sequence[str]) -> "Space":
        if sorted(order) != sorted(self.labels):
            raise ValueError(f"{list(order)} is not a permutation of {list(self.labels)}")
        return Space(tuple(self.factor(label) for label in order))

    def __str__(self) -> str:
        return " ⊗ ".join(f"{f.label}({f.dim})" for f in self.factors)


def permutation_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """``P`` with ``P @ v`` = ``v`` reshaped to ``dims``, transposed by ``perm``, flattened."""
    n = int(np.prod(dims, dtype=int))
    idx = np.arange(n).reshape(tuple(dims)).transpose(tuple(perm)).ravel()
    return np.eye(n)[idx]


def reorder_matrix(space: Space, order: Sequence[str]) -> np.ndarray:
    perm = [space.index(label) for label in order]
    return permutation_matrix(space.dims, perm)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    return np.outer(v, v.conj())


def direct_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def lift(op: np.ndarray, space: Space, labels: Sequence[str], new_factors: Sequence[Factor] | None = None,
         ) -> tuple[np.ndarray, Space]:
    """Embed ``op`` acting on ``labels`` into the whole of ``space``.

    ``op`` is indexed in the order given by ``labels``. When ``new_factors`` is
    given the operator maps those factors onto the new ones (which take the
    position of the first label); otherwise input and output factors coincide.
    Returns the full matrix and the output space.
    """
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise ValueError(f"repeated labels {labels}")
    sub_in = [space.factor(label) for label in labels]
    new = list(sub_in if new_factors is None else new_factors)
    din = int(np.prod([f.dim for f in sub_in], dtype=int))
    dout = int(np.prod([f.dim for f in new], dtype=int))
    op = np.asarray(op, dtype=complex)
    if op.shape != (dout, din):
        raise ValueError(f"operator shape {op.shape} does not match {(dout, din)} for factors {labels}")
    rest = [f for f in space.factors if f.label not in set(labels)]
    drest = int(np.prod([f.dim for f in rest], dtype=int))

    p_in = reorder_matrix(space, labels + [f.label for f in rest])
    out_space = space.replace(labels, new) if new_factors is not None else space
    staged = Space(tuple(new) + tuple(rest))
    p_out = reorder_matrix(out_space, [f.label for f in staged.factors])
    full = p_out.T @ np.kron(op, np.eye(drest)) @ p_in
    return full, out_space


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A state on a labelled space.

    Construction only checks the shape; call :meth:`validate` to enforce
    the state invariants (unnormalised branches skip that on purpose).
    """

    space: Space
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"matrix shape {m.shape} does not match space {self.space} (dim {self.space.dim})")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vector(cls, space: Space, vec: np.ndarray) -> "DensityOperator":
        vec = np.asarray(vec, dtype=complex).ravel()
        return cls(space, np.outer(vec, vec.conj()))

    @classmethod
    def product(cls, *parts: "DensityOperator") -> "DensityOperator":
        space = Space(tuple(f for p in parts for f in p.space.factors))
        return cls(space, kron_all(p.matrix for p in parts))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self, normalized: bool = True) -> "DensityOperator":
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_ATOL:
            raise InvariantError("state is not Hermitian")
        if normalized and abs(np.trace(m) - 1) > TRACE_ATOL:
            raise InvariantError(f"state trace is {np.trace(m).real:.3e}, expected 1")
        lo = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
        if lo < -PSD_ATOL:
            raise InvariantError(f"state has negative eigenvalue {lo:.3e}")
        return self

    def permuted(self, order: Sequence[str]) -> "DensityOperator":
        p = reorder_matrix(self.space, order)
        return DensityOperator(self.space.permuted(order), p @ self.matrix @ p.T)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    in_space: Space
    out_space: Space
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = []
        for k in self.kraus:
            k = np.array(k, dtype=complex)
            if k.shape != (self.out_space.dim, self.in_space.dim):
                raise ValueError(
                    f"Kraus operator shape {k.shape} does not match {self.in_space} -> {self.out_space}")
            k.setflags(write=False)
            ops.append(k)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        object.__setattr__(self, "kraus", tuple(ops))

    @classmethod
    def unitary(cls, space: Space, u: np.ndarray) -> "KrausChannel":
        return cls(space, space, (u,))

    @classmethod
    def identity(cls, space: Space) -> "KrausChannel":
        return cls(space, space, (np.eye(space.dim),))

    @classmethod
    def local(cls, space: Space, labels: Sequence[str], kraus: Sequence[np.ndarray],
              new_factors: Sequence[Factor] | None = None) -> "KrausChannel":
        """Channel acting on the factors ``labels`` of ``space`` and trivially elsewhere."""
        full = []
        out_space = space
        for k in kraus:
            m, out_space = lift(k, space, labels, new_factors)
            full.append(m)
        return cls(space, out_space, tuple(full))

    @property
    def is_unitary(self) -> bool:
        return len(self.kraus) == 1 and self.in_space.dim == self.out_space.dim and self.completeness_error() <= TP_ATOL

    def completeness(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)

    def completeness_error(self) -> float:
        return float(np.max(np.abs(self.completeness() - np.eye(self.in_space.dim))))

    def is_trace_preserving(self, atol: float = TP_ATOL) -> bool:
        return self.completeness_error() <= atol

    def is_trace_non_increasing(self, atol: float = TP_ATOL) -> bool:
        return float(np.linalg.eigvalsh(self.completeness()).max()) <= 1 + atol

    def validate(self) -> "KrausChannel":
        if not self.is_trace_preserving():
            raise InvariantError(f"channel is not trace preserving (completeness error {self.completeness_error():.3e})")
        return self

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Sequential composition: ``self`` first, then ``other``."""
        if other.in_space != self.out_space:
            raise ValueError(f"cannot compose {self.out_space} into {other.in_space}")
        return KrausChannel(self.in_space, other.out_space, tuple(b @ a for b in other.kraus for a in self.kraus))

    def choi(self) -> np.ndarray:
        """``sum_ij |i><j| ⊗ M(|i><j|)`` on input ⊗ output."""
        return choi_matrix(self.kraus, self.in_space.dim)

    def permuted(self, in_order: Sequence[str], out_order: Sequence[str]) -> "KrausChannel":
        pi = reorder_matrix(self.in_space, in_order)
        po = reorder_matrix(self.out_space, out_order)
        return KrausChannel(self.in_space.permuted(in_order), self.out_space.permuted(out_order),
                            tuple(po @ k @ pi.T for k in self.kraus))


def choi_matrix(kraus: Sequence[np.ndarray], din: int) -> np.ndarray:
    """Choi matrix ``(id ⊗ M)(|1>><<1|)`` with ``|1>> = sum_i |ii>`` (input factor first)."""
    vec_identity = np.eye(din).ravel()
    out = 0
    for k in kraus:
        w = np.kron(np.eye(din), k) @ vec_identity
        out = out + np.outer(w, w.conj())
    return np.asarray(out, dtype=complex)


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    """Reduced state on ``keep``; kept factors stay in the space's order."""
    keep = list(keep)
    space = rho.space
    for label in keep:
        space.factor(label)
    kept_space = space.subspace(keep)
    n = len(space.factors)
    keep_idx = [space.index(f.label) for f in kept_space.factors]
    t = rho.matrix.reshape(space.dims + space.dims)
    row = list(range(n))
    col = [i + n if i in keep_idx else i for i in range(n)]
    out_idx = keep_idx + [i + n for i in keep_idx]
    reduced = np.einsum(t, row + col, out_idx)
    d = kept_space.dim
    return DensityOperator(kept_space, reduced.reshape(d, d))


def trace_out(rho: DensityOperator, drop: Iterable[str]) -> DensityOperator:
    drop = set(drop)
    return partial_trace(rho, [label for label in rho.space.labels if label not in drop])


def dephase(rho: DensityOperator, measurement: ReferenceMeasurement) -> DensityOperator:
    """Measure-and-forget in the projector family on its factor."""
    out = np.zeros_like(rho.matrix)
    for p in measurement.projectors:
        full, _ = lift(p, rho.space, [measurement.factor])
        out += full @ rho.matrix @ full
    return DensityOperator(rho.space, out)


def sandwich(rho: DensityOperator, op: np.ndarray, labels: Sequence[str]) -> DensityOperator:
    full, _ = lift(op, rho.space, labels)
    return DensityOperator(rho.space, full @ rho.matrix @ full.conj().T)


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Half the trace norm of ``rho - sigma``; also accepts unnormalised operators."""
    if rho.space.dims != sigma.space.dims:
        raise ValueError(f"dimension mismatch: {rho.space} vs {sigma.space}")
    diff = rho.matrix - sigma.matrix
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def controlled_unitary(measurement: ReferenceMeasurement, unitaries: Mapping[str, np.ndarray]) -> np.ndarray:
    """``sum_λ Π_λ ⊗ U_λ`` on reference ⊗ target."""
    missing = [lab for lab in measurement.labels if lab not in unitaries]
    if missing:
        raise KeyError(f"no unitary supplied for labels {missing}")
    dims = {np.asarray(unitaries[lab]).shape for lab in measurement.labels}
    if len(dims) != 1:
        raise ValueError(f"conditioned unitaries have differing shapes {sorted(dims)}")
    return sum(np.kron(p, np.asarray(unitaries[lab], dtype=complex))
               for lab, p in zip(measurement.labels, measurement.projectors))


def apply_channel(channel: KrausChannel, rho: DensityOperator) -> DensityOperator:
    if rho.space.dims != channel.in_space.dims:
        raise ValueError(f"channel expects {channel.in_space}, got {rho.space}")
    out = sum(k @ rho.matrix @ k.conj().T for k in channel.kraus)
    return DensityOperator(channel.out_space, out)


def random_unitary(dim: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with the phase fix)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if dim == 1:
        return np.ones((1, 1), dtype=complex)
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, seed: int | np.random.Generator | None = None, rank: int | None = None) -> np.ndarray:
    """Random density matrix (induced measure from a ``dim x rank`` Ginibre matrix)."""
    rng = np.random.default_rng(seed)
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_pure(dim: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_cptp(din: int, dout: int, seed: int | np.random.Generator | None = None,
                n_kraus: int | None = None) -> KrausChannel:
    """Random channel from a Stinespring isometry cut out of a Haar unitary."""
    if din < 1 or dout < 1:
        raise ValueError("dims must be >= 1")
    rng = np.random.default_rng(seed)
    k = din * dout if n_kraus is None else n_kraus
    u = random_unitary(dout * k, rng)
    v = u[:, :din]  # isometry din -> dout ⊗ env
    kraus = tuple(v.reshape(dout, k, din)[:, j, :] for j in range(k))
    return KrausChannel(Space.of(("in", din)), Space.of(("out", dout)), kraus)


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return u.shape[0] == u.shape[1] and np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol


def unitary_deviation(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1]), 2))


def operator_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Spectral-norm distance."""
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b), 2))

