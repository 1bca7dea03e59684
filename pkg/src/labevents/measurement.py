"""Projective reference measurements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PROJECTOR_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class ReferenceMeasurement:
    """Complete orthogonal projector family ``{Π_λ}`` on one factor.

    ``labels`` is the reference information set: one outcome label per
    projector, in order.
    """

    factor: str
    labels: tuple[str, ...]
    projectors: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        labels = tuple(str(x) for x in self.labels)
        projectors = []
        for p in self.projectors:
            p = np.array(p, dtype=complex)
            p.setflags(write=False)
            projectors.append(p)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "projectors", tuple(projectors))
        if not labels:
            raise ValueError("a reference measurement needs at least one outcome")
        if len(labels) != len(projectors):
            raise ValueError(f"{len(labels)} labels for {len(projectors)} projectors")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels {labels}")
        shapes = {p.shape for p in projectors}
        if len(shapes) != 1 or projectors[0].ndim != 2 or projectors[0].shape[0] != projectors[0].shape[1]:
            raise ValueError(f"projectors must be square matrices of one size, got shapes {sorted(shapes)}")

    @classmethod
    def computational(cls, factor: str, labels: Sequence[str]) -> "ReferenceMeasurement":
        """Rank-1 projectors onto the basis states, one label each."""
        n = len(labels)
        return cls(factor, tuple(labels), tuple(np.diag(np.eye(n)[i]) for i in range(n)))

    @classmethod
    def trivial(cls, factor: str, dim: int = 1, label: str = "T_A") -> "ReferenceMeasurement":
        return cls(factor, (label,), (np.eye(dim),))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def projector(self, label: str) -> np.ndarray:
        try:
            return self.projectors[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"unknown outcome label {label!r}; known {self.labels}") from None

    def invariant_violations(self, atol: float = PROJECTOR_ATOL) -> list[str]:
        """Names of broken projector-family invariants (empty when valid)."""
        problems = []
        for lab, p in zip(self.labels, self.projectors):
            if np.max(np.abs(p - p.conj().T)) > atol:
                problems.append(f"projector {lab!r} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > atol:
                problems.append(f"projector {lab!r} is not idempotent")
        for i, (a, pa) in enumerate(zip(self.labels, self.projectors)):
            for b, pb in list(zip(self.labels, self.projectors))[i + 1:]:
                if np.max(np.abs(pa @ pb)) > atol:
                    problems.append(f"projectors {a!r} and {b!r} are not orthogonal")
        total = sum(self.projectors)
        err = float(np.max(np.abs(total - np.eye(self.dim))))
        if err > atol:
            problems.append(f"completeness: projectors sum to identity only within {err:.3e}")
        return problems

    def validate(self, atol: float = PROJECTOR_ATOL) -> "ReferenceMeasurement":
        from .linalg import InvariantError

        problems = self.invariant_violations(atol)
        if problems:
            raise InvariantError("; ".join(problems))
        return self

    def conjugated(self, u: np.ndarray) -> "ReferenceMeasurement":
        """Same family seen in a rotated basis: ``Π -> U Π U†``."""
        return ReferenceMeasurement(self.factor, self.labels, tuple(u @ p @ u.conj().T for p in self.projectors))
