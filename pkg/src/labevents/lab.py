"""Labs, relative events and the two verdict checks.

A :class:`Lab` names a reference factor with its projective measurement and
one or more target factors. An :class:`Event` is a sequence of steps on those
factors. A :class:`Context` fixes the initial state of the whole space
(reference, target and environment) and the channel that runs after the
event. The checks compare states after the continuation with the reference
discarded. With ``strict_local=True`` they compare right after the event
instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .linalg import (
    DensityOperator,
    Factor,
    InvariantError,
    KrausChannel,
    Space,
    apply_channel,
    dephase,
    sandwich,
    trace_distance,
    trace_out,
)
from .measurement import ReferenceMeasurement

DEFAULT_TOLERANCE = 1e-9

ConditionedOp = Union[np.ndarray, KrausChannel]


@dataclass(frozen=True, eq=False)
class ConditionedStep:
    """Apply ``ops[λ]`` to the target on the ``Π_λ`` subspace of the reference.

    Values are unitaries or :class:`KrausChannel` objects (Kraus lists are
    zero-padded and paired across labels, which keeps the control coherent).
    """

    measurement: ReferenceMeasurement
    ops: Mapping[str, ConditionedOp]

    def __post_init__(self) -> None:
        missing = [lab for lab in self.measurement.labels if lab not in self.ops]
        extra = [lab for lab in self.ops if lab not in self.measurement.labels]
        if missing or extra:
            raise ValueError(f"conditioned step labels mismatch: missing {missing}, unknown {extra}")
        object.__setattr__(self, "ops", dict(self.ops))

    def kraus_lists(self) -> dict[str, list[np.ndarray]]:
        out = {}
        for lab in self.measurement.labels:
            op = self.ops[lab]
            if isinstance(op, KrausChannel):
                out[lab] = [np.asarray(k) for k in op.kraus]
            else:
                out[lab] = [np.asarray(op, dtype=complex)]
        return out

    def target_dim(self) -> int:
        dims = {k.shape for ks in self.kraus_lists().values() for k in ks}
        if len(dims) != 1:
            raise ValueError(f"conditioned operations act on differing dims {sorted(dims)}")
        (shape,) = dims
        if shape[0] != shape[1]:
            raise ValueError("conditioned operations must map the target to itself")
        return shape[0]

    def kraus(self) -> list[np.ndarray]:
        lists = self.kraus_lists()
        n = max(len(ks) for ks in lists.values())
        dt = self.target_dim()
        ops = []
        for j in range(n):
            k = np.zeros((self.measurement.dim * dt,) * 2, dtype=complex)
            for lab, p in zip(self.measurement.labels, self.measurement.projectors):
                if j < len(lists[lab]):
                    k += np.kron(p, lists[lab][j])
            ops.append(k)
        return ops


@dataclass(frozen=True, eq=False)
class ReferenceDynamics:
    """Unitary on the reference alone, e.g. a clock tick ``|t1> -> |t2>``."""

    unitary: np.ndarray

    def __post_init__(self) -> None:
        u = np.array(self.unitary, dtype=complex)
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)


Step = Union[ConditionedStep, ReferenceDynamics]


@dataclass(frozen=True, eq=False)
class Event:
    steps: tuple[Step, ...]
    name: str = "O_A"

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("an event needs at least one step")

    @property
    def has_reference_dynamics(self) -> bool:
        return any(isinstance(s, ReferenceDynamics) for s in self.steps)

    def conditioned_steps(self) -> list[ConditionedStep]:
        return [s for s in self.steps if isinstance(s, ConditionedStep)]


@dataclass(frozen=True, eq=False)
class Lab:
    """Reference factor with its measurement, target factors, allowed events."""

    measurement: ReferenceMeasurement
    target: tuple[str, ...]
    operations: Mapping[str, Event] = field(default_factory=dict)
    name: str = "A"

    def __post_init__(self) -> None:
        target = (self.target,) if isinstance(self.target, str) else tuple(self.target)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "operations", dict(self.operations))
        if not target:
            raise ValueError("a lab needs a target factor")
        if self.reference in target:
            raise ValueError(f"reference {self.reference!r} cannot also be a target")
        for event in self.operations.values():
            check_event_scope(self, event)

    @property
    def reference(self) -> str:
        return self.measurement.factor

    @property
    def info_set(self) -> tuple[str, ...]:
        return self.measurement.labels

    def event_space(self, space: Space) -> Space:
        return Space((space.factor(self.reference),) + tuple(space.factor(t) for t in self.target))


@dataclass(frozen=True, eq=False)
class Context:
    """Initial condition on reference ⊗ target ⊗ environment plus what follows the event.

    ``continuation`` maps the context space to an output space that must still
    carry the reference factor; ``None`` means the identity.
    """

    initial: DensityOperator
    continuation: KrausChannel | None = None

    def __post_init__(self) -> None:
        if self.continuation is not None and self.continuation.in_space.dims != self.initial.space.dims:
            raise ValueError(
                f"continuation expects {self.continuation.in_space}, initial state lives on {self.initial.space}")

    @property
    def space(self) -> Space:
        return self.initial.space

    @property
    def output_space(self) -> Space:
        return self.space if self.continuation is None else self.continuation.out_space

    def validate(self) -> "Context":
        self.initial.validate()
        if self.continuation is not None:
            self.continuation.validate()
        return self


@dataclass(frozen=True)
class MeasurabilityVerdict:
    measurable: bool
    distance: float
    tolerance: float
    strict_local: bool = False

    @property
    def label(self) -> str:
        return "Yes" if self.measurable else "No"


@dataclass(frozen=True)
class LocalisationVerdict:
    """``status`` is ``localised``, ``degenerate-localised`` or ``non-localised``."""

    status: str
    labels: tuple[str, ...]
    distances: Mapping[str, float]
    branch_traces: Mapping[str, float]
    tolerance: float
    strict_local: bool = False

    @property
    def localised(self) -> bool:
        return self.status != "non-localised"

    @property
    def label(self) -> str:
        if self.status == "localised":
            return f"{self.labels[0]}-localised"
        if self.status == "degenerate-localised":
            return "degenerate-localised(" + ",".join(self.labels) + ")"
        return "non-localised"


def check_event_scope(lab: Lab, event: Event) -> None:
    for step in event.steps:
        if isinstance(step, ConditionedStep):
            if step.measurement.factor != lab.reference:
                raise ValueError(
                    f"event {event.name!r} conditions on {step.measurement.factor!r}, lab reference is {lab.reference!r}")


def event_channel(lab: Lab, event: Event, space: Space) -> KrausChannel:
    """The event as a channel on reference ⊗ targets (factor order: reference, then targets).

    Single Kraus operator iff every step is unitary.
    """
    check_event_scope(lab, event)
    local = lab.event_space(space)
    dref = local.factors[0].dim
    dtarget = local.dim // dref
    channel = KrausChannel.identity(local)
    for step in event.steps:
        if isinstance(step, ConditionedStep):
            if step.measurement.dim != dref:
                raise ValueError(f"measurement dim {step.measurement.dim} does not match reference dim {dref}")
            if step.target_dim() != dtarget:
                raise ValueError(
                    f"conditioned operations act on dim {step.target_dim()}, lab target has dim {dtarget}")
            kraus = step.kraus()
        else:
            if step.unitary.shape != (dref, dref):
                raise ValueError(f"reference dynamics shape {step.unitary.shape} does not match reference dim {dref}")
            kraus = [np.kron(step.unitary, np.eye(dtarget))]
        channel = channel.then(KrausChannel(local, local, tuple(kraus)))
    return channel


def _lifted_event(lab: Lab, event: Event, space: Space) -> KrausChannel:
    local = event_channel(lab, event, space)
    if not local.is_trace_preserving():
        raise InvariantError(
            f"event {event.name!r} is not trace preserving; verdicts need deterministic operations")
    labels = [lab.reference, *lab.target]
    return KrausChannel.local(space, labels, local.kraus)


def _finish(ctx: Context, lab: Lab, rho: DensityOperator, strict_local: bool) -> DensityOperator:
    if not strict_local and ctx.continuation is not None:
        rho = apply_channel(ctx.continuation, rho)
    return trace_out(rho, [lab.reference])


def _check_inputs(lab: Lab, ctx: Context) -> None:
    space = ctx.space
    for label in (lab.reference, *lab.target):
        space.factor(label)
    if ctx.continuation is not None:
        ctx.output_space.factor(lab.reference)
    if lab.measurement.dim != space.factor(lab.reference).dim:
        raise ValueError("reference measurement dim does not match the reference factor")


def check_relative_measurability(lab: Lab, ctx: Context, event: Event | str, *,
                                 tolerance: float = DEFAULT_TOLERANCE,
                                 strict_local: bool = False) -> MeasurabilityVerdict:
    """Does dephasing the reference before the event leave the (reference-discarded) output unchanged?"""
    event = lab.operations[event] if isinstance(event, str) else event
    _check_inputs(lab, ctx)
    ev = _lifted_event(lab, event, ctx.space)
    plain = _finish(ctx, lab, apply_channel(ev, ctx.initial), strict_local)
    measured = _finish(ctx, lab, apply_channel(ev, dephase(ctx.initial, lab.measurement)), strict_local)
    dist = trace_distance(plain, measured)
    return MeasurabilityVerdict(dist <= tolerance, dist, tolerance, strict_local)


def check_localisation(lab: Lab, ctx: Context, event: Event | str, *,
                       tolerance: float = DEFAULT_TOLERANCE,
                       strict_local: bool = False) -> LocalisationVerdict:
    """Which ``λ`` (if any) leaves the output unchanged when ``Π_λ`` brackets the event."""
    event = lab.operations[event] if isinstance(event, str) else event
    _check_inputs(lab, ctx)
    ev = _lifted_event(lab, event, ctx.space)
    full = _finish(ctx, lab, apply_channel(ev, ctx.initial), strict_local)
    distances = {}
    traces = {}
    for lab_name, p in zip(lab.measurement.labels, lab.measurement.projectors):
        before = sandwich(ctx.initial, p, [lab.reference])
        after = apply_channel(ev, before)
        branch = sandwich(after, p, [lab.reference])
        out = _finish(ctx, lab, branch, strict_local)
        distances[lab_name] = trace_distance(full, out)
        traces[lab_name] = out.trace
    passing = tuple(k for k, v in distances.items() if v <= tolerance)
    if not passing:
        status = "non-localised"
    elif len(passing) == 1:
        status = "localised"
    else:
        status = "degenerate-localised"
    return LocalisationVerdict(status, passing, distances, traces, tolerance, strict_local)


def relevant_labels(lab: Lab, ctx: Context, event: Event | str, atol: float = 1e-9) -> tuple[str, ...]:
    """Labels whose projector carries weight on the reference before or after the event."""
    event = lab.operations[event] if isinstance(event, str) else event
    ev = _lifted_event(lab, event, ctx.space)
    before = ctx.initial
    after = apply_channel(ev, before)
    out = []
    for name, p in zip(lab.measurement.labels, lab.measurement.projectors):
        w_in = sandwich(before, p, [lab.reference]).trace
        w_out = sandwich(after, p, [lab.reference]).trace
        if max(w_in, w_out) > atol:
            out.append(name)
    return tuple(out)


def change_basis(lab: Lab, ctx: Context, event: Event, frames: Mapping[str, np.ndarray],
                 ) -> tuple[Lab, Context, Event]:
    """Rewrite a (lab, context, event) triple in rotated bases.

    ``frames`` maps factor labels to unitaries ``V``; every state, projector
    and operator on that factor is conjugated consistently. Factors only
    present in the continuation output are rotated too when listed.
    """
    def frame_for(space: Space, labels: Sequence[str]) -> np.ndarray:
        v = np.eye(1, dtype=complex)
        for label in labels:
            f = space.factor(label)
            v = np.kron(v, frames.get(label, np.eye(f.dim)))
        return v

    space = ctx.space
    full_in = frame_for(space, space.labels)
    initial = DensityOperator(space, full_in @ ctx.initial.matrix @ full_in.conj().T)
    cont = None
    if ctx.continuation is not None:
        out_space = ctx.continuation.out_space
        full_out = frame_for(out_space, out_space.labels)
        cont = KrausChannel(space, out_space,
                            tuple(full_out @ k @ full_in.conj().T for k in ctx.continuation.kraus))

    vr = frames.get(lab.reference, np.eye(lab.measurement.dim))
    vt = frame_for(space, lab.target)
    measurement = lab.measurement.conjugated(vr)

    def rotate_event(ev: Event) -> Event:
        steps = []
        for step in ev.steps:
            if isinstance(step, ConditionedStep):
                ops = {}
                for name, op in step.ops.items():
                    if isinstance(op, KrausChannel):
                        ops[name] = KrausChannel(op.in_space, op.out_space,
                                                 tuple(vt @ k @ vt.conj().T for k in op.kraus))
                    else:
                        ops[name] = vt @ np.asarray(op) @ vt.conj().T
                steps.append(ConditionedStep(step.measurement.conjugated(vr), ops))
            else:
                steps.append(ReferenceDynamics(vr @ step.unitary @ vr.conj().T))
        return Event(tuple(steps), ev.name)

    new_lab = Lab(measurement, lab.target, {k: rotate_event(v) for k, v in lab.operations.items()}, lab.name)
    return new_lab, Context(initial, cont), rotate_event(event)


def permute_context(lab: Lab, ctx: Context, in_order: Sequence[str], out_order: Sequence[str] | None = None,
                    ) -> Context:
    """Same context with the factors stored in another order."""
    initial = ctx.initial.permuted(in_order)
    cont = None
    if ctx.continuation is not None:
        out_order = ctx.continuation.out_space.labels if out_order is None else out_order
        cont = ctx.continuation.permuted(in_order, out_order)
    return Context(initial, cont)


def target_is_vacuum_extended(lab: Lab, space: Space) -> bool:
    """True when every target factor carries a one-dimensional ``vac`` sector."""
    def extended(f: Factor) -> bool:
        return any(name == "vac" and size == 1 for name, size in f.sectors)
    return all(extended(space.factor(t)) for t in lab.target)


def reference_purity(lab: Lab, ctx: Context) -> float:
    rho_r = trace_out(ctx.initial, [x for x in ctx.space.labels if x != lab.reference]).matrix
    return float(np.trace(rho_r @ rho_r).real / np.trace(rho_r).real ** 2)


def conditioned_ops_differ(event: Event, atol: float = 1e-9) -> bool:
    """Whether some conditioned step acts differently on different reference labels."""
    for step in event.conditioned_steps():
        lists = list(step.kraus_lists().values())
        first = lists[0]
        for other in lists[1:]:
            if len(other) != len(first) or any(np.max(np.abs(a - b)) > atol for a, b in zip(first, other)):
                return True
    return False
