"""Quantum-switch and double-slit scenarios as (lab, context, event) triples.

Every verdict reported here comes from the checks in :mod:`labevents.lab`;
this module only builds models and aggregates what the checks return.

Spacetime references (clock time, position, acceleration, proper time) are
two-level pointer factors. What distinguishes them is how the pointer is
correlated with the switch's control qubit, and that is all the checks see.
By default the pointer basis is turned by a seeded Haar rotation. This is a
gauge choice and leaves every verdict unchanged. It keeps round-off visible
in the witnessed distances instead of letting exact zeros hide it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lab as labcalc
from .lab import ConditionedStep, Context, Event, Lab, ReferenceDynamics
from .linalg import (
    DensityOperator,
    KrausChannel,
    Space,
    apply_channel,
    ket,
    kron_all,
    partial_trace,
    random_pure,
    random_unitary,
)
from .measurement import ReferenceMeasurement
from .switch import recombination_kraus, ref_entangled_control, vacuum_extend, vacuum_factor, w_sup

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


class ScenarioId(str, enum.Enum):
    QS_CT = "QS_CT"
    QS_QT = "QS_QT"
    QS_G = "QS_G"
    DOUBLE_SLIT = "DoubleSlit"


class AssumptionClass(str, enum.Enum):
    FINE = "Fine"
    EFFECTIVE = "Effective"
    COARSE = "Coarse"
    UNRESOLVED = "Unresolved"


class UnsupportedChoice(ValueError):
    pass


class OpenModelError(UnsupportedChoice):
    """No physically meaningful model is known for this lab."""


@dataclass(frozen=True)
class LabChoice:
    agent: str
    reference: str
    event: str = "A"

    def __str__(self) -> str:
        return f"{self.agent}/{self.reference}/{self.event}"


# pointer outcome labels per reference kind
POINTER_LABELS = {
    "t": ("t1", "t2"),
    "x": ("x_A", "x_B"),
    "(x,t)": ("(x,t)1", "(x,t)2"),
    "a": ("a1", "a2"),
    "tau": ("tau_*", "tau_o"),
    "singleton": ("T_A",),
    "t_arr": ("t1", "t2"),
}

_FINE = ("A", "A1", "A2")
SUPPORTED: dict[tuple[ScenarioId, str, str], tuple[str, ...]] = {
    (ScenarioId.QS_CT, "Alice", "t"): _FINE,
    (ScenarioId.QS_CT, "Alice", "x"): _FINE,
    (ScenarioId.QS_CT, "Alice", "(x,t)"): _FINE,
    (ScenarioId.QS_CT, "Alice", "t_arr"): ("A",),
    (ScenarioId.QS_CT, "Alice", "singleton"): ("A",),
    (ScenarioId.QS_QT, "Alice", "(x,t)"): ("A",),
    (ScenarioId.QS_QT, "Alice", "a"): ("A",),
    (ScenarioId.QS_QT, "Alice", "tau"): ("A",),
    (ScenarioId.QS_QT, "Alice", "singleton"): ("A",),
    (ScenarioId.QS_QT, "Claire", "t"): _FINE,
    (ScenarioId.QS_QT, "Claire", "(x,t)"): _FINE,
    (ScenarioId.QS_G, "Alice", "a"): ("A",),
    (ScenarioId.QS_G, "Alice", "tau"): ("A",),
    (ScenarioId.QS_G, "Alice", "singleton"): ("A",),
    (ScenarioId.DOUBLE_SLIT, "Claire", "x"): ("A",),
    (ScenarioId.DOUBLE_SLIT, "Quinn", "x"): ("A",),
}
# labs that are meaningful but have no model to build
OPEN: dict[tuple[ScenarioId, str, str], str] = {
    (ScenarioId.QS_G, "Claire", "(x,t)"):
        "fine-grained description for a distant observer of the gravitational switch is an open question",
}


def supported_matrix() -> list[str]:
    return [f"{s.value}: {agent} with {ref} -> events {', '.join(evs)}" for (s, agent, ref), evs in SUPPORTED.items()]


@dataclass(frozen=True)
class ModelParams:
    d: int = 2
    seed: int = 0
    alpha: complex = 1 / np.sqrt(2)
    beta: complex = 1 / np.sqrt(2)
    rotate_frame: bool = True

    def __post_init__(self) -> None:
        if not 1 <= self.d <= 4:
            raise ValueError(f"target dimension must be in [1, 4], got {self.d}")
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1) > 1e-12:
            raise ValueError("control amplitudes must be normalised")

    def unitaries(self) -> dict[str, np.ndarray]:
        rng = np.random.default_rng([self.seed, 0])
        return {name: random_unitary(self.d, rng) for name in ("UA1", "UA2", "UB1", "UB2")}

    def target_state(self) -> np.ndarray:
        return random_pure(self.d, np.random.default_rng([self.seed, 1]))

    def frame(self, dim: int) -> np.ndarray:
        return random_unitary(dim, np.random.default_rng([self.seed, 2]))


def _state(space: Space, vec: np.ndarray) -> DensityOperator:
    return DensityOperator.from_vector(space, vec)


def _op(space: Space, labels: Sequence[str], m: np.ndarray) -> np.ndarray:
    return KrausChannel.local(space, labels, [m]).kraus[0]


def _chain(space: Space, *ops: np.ndarray) -> np.ndarray:
    out = np.eye(space.dim, dtype=complex)
    for op in ops:
        out = op @ out
    return out


def _controlled(ctrl: np.ndarray, target_op: np.ndarray, on: int) -> np.ndarray:
    """``|on><on| ⊗ U + |other><other| ⊗ 1`` for a qubit control."""
    p_on, p_off = (P0, P1) if on == 0 else (P1, P0)
    return np.kron(p_on, target_op) + np.kron(p_off, np.eye(target_op.shape[0]))


def _pointer(labels: Sequence[str]) -> ReferenceMeasurement:
    return ReferenceMeasurement.computational("R_A", labels)


def _fine_grained(params: ModelParams, labels: Sequence[str], event_name: str, clocked: bool, agent: str,
                  ) -> tuple[Lab, Context, Event]:
    """Vacuum-extended wires at Alice's two time slots; the reference is a clock or a fixed position."""
    d = params.d
    u = params.unitaries()
    space = Space.of(("R_A", 2), vacuum_factor("A1", d), vacuum_factor("A2", d))
    m = _pointer(labels)
    l1, l2 = m.labels
    ext = {k: vacuum_extend(v) for k, v in u.items()}
    eye_w = np.eye(d + 1)

    # distribute the photon; Bob acts on his wire at t1, which then feeds Alice's t2 slot
    control = params.alpha * ket(0, 2) + params.beta * ket(1, 2)
    wires = w_sup(d) @ np.kron(control, params.target_state())
    wires = np.kron(eye_w, ext["UB1"]) @ wires
    if event_name == "A2":
        wires = np.kron(ext["UA1"], eye_w) @ wires
    start = 1 if (clocked and event_name == "A2") else 0
    initial = _state(space, np.kron(ket(start, 2), wires))

    if event_name == "A":
        target = ("A1", "A2")
        if clocked:
            steps = [
                ConditionedStep(m, {l1: np.kron(ext["UA1"], eye_w), l2: np.eye((d + 1) ** 2)}),
                ReferenceDynamics(X),
                ConditionedStep(m, {l1: np.eye((d + 1) ** 2), l2: np.kron(eye_w, ext["UA2"])}),
            ]
        else:
            steps = [ConditionedStep(m, {l1: np.kron(ext["UA1"], ext["UA2"]), l2: np.eye((d + 1) ** 2)})]
    elif event_name == "A1":
        target = ("A1",)
        steps = [ConditionedStep(m, {l1: ext["UA1"], l2: eye_w})]
    elif event_name == "A2":
        target = ("A2",)
        if clocked:
            steps = [ConditionedStep(m, {l1: eye_w, l2: ext["UA2"]})]
        else:
            steps = [ConditionedStep(m, {l1: ext["UA2"], l2: eye_w})]
    else:
        raise UnsupportedChoice(f"unknown event {event_name!r}")
    event = Event(tuple(steps), event_name)

    later = []
    if event_name == "A1":
        later.append(_op(space, ["A2"], ext["UA2"]))
    later.append(_op(space, ["A1"], ext["UB2"]))
    tail = KrausChannel(space, space, (_chain(space, *later),))
    recombine = KrausChannel.local(space, ["A1", "A2"], recombination_kraus(d),
                                   new_factors=Space.of(("C", 2), ("T", d)).factors)
    readout = KrausChannel.local(recombine.out_space, ["C"], [HADAMARD])
    continuation = tail.then(recombine).then(readout)
    lab = Lab(m, target, {event_name: event}, name=agent)
    return lab, Context(initial, continuation), event


def _effective(params: ModelParams, labels: Sequence[str], agent: str) -> tuple[Lab, Context, Event]:
    """Non-vacuum target, reference pointer entangled with the control as in the ancilla construction."""
    d = params.d
    u = params.unitaries()
    space = Space.of(("C", 2), ("R_A", 2), ("R_B", 2), ("T", d))
    m = _pointer(labels)
    l1, l2 = m.labels
    initial = _state(space, np.kron(ref_entangled_control(params.alpha, params.beta), params.target_state()))

    # Bob's pointer shares Alice's value in each branch, but Bob acts second where Alice acts first
    bob_eff = np.kron(P0, u["UB2"]) + np.kron(P1, u["UB1"])  # on R_B ⊗ T
    bob_first = _op(space, ["C", "R_B", "T"], _controlled(P0, bob_eff, on=1))
    initial = DensityOperator(space, bob_first @ initial.matrix @ bob_first.conj().T)

    event = Event((ConditionedStep(m, {l1: u["UA1"], l2: u["UA2"]}),), "A")
    cont = _chain(
        space,
        _op(space, ["C", "R_B", "T"], _controlled(P0, bob_eff, on=0)),
        _op(space, ["C", "R_A"], _controlled(P0, X, on=1)),
        _op(space, ["C", "R_B"], _controlled(P0, X, on=1)),
        _op(space, ["C"], HADAMARD),
    )
    lab = Lab(m, ("T",), {"A": event}, name=agent)
    return lab, Context(initial, KrausChannel(space, space, (cont,))), event


def _coarse(params: ModelParams, labels: Sequence[str], agent: str, trajectory_in_superposition: bool,
            ) -> tuple[Lab, Context, Event]:
    """Single operationally relevant reference value; Alice applies one unitary in either order."""
    d = params.d
    u = params.unitaries()
    ua, ub = u["UA1"], u["UB1"]
    m = _pointer(labels)
    dr = len(labels)
    if trajectory_in_superposition:
        # Alice's position rides along with the control and is recombined at the end
        space = Space.of(("C", 2), ("X_A", 2), ("R_A", dr), ("T", d))
        cx = params.alpha * np.kron(ket(0, 2), ket(0, 2)) + params.beta * np.kron(ket(1, 2), ket(1, 2))
    else:
        space = Space.of(("C", 2), ("R_A", dr), ("T", d))
        cx = params.alpha * ket(0, 2) + params.beta * ket(1, 2)
    initial = _state(space, kron_all([cx[:, None], ket(0, dr)[:, None], params.target_state()[:, None]]).ravel())
    bob_first = _op(space, ["C", "T"], _controlled(P0, ub, on=1))
    initial = DensityOperator(space, bob_first @ initial.matrix @ bob_first.conj().T)

    ops = {labels[0]: ua}
    for other in labels[1:]:
        ops[other] = np.eye(d)
    event = Event((ConditionedStep(m, ops),), "A")
    later = [_op(space, ["C", "T"], _controlled(P0, ub, on=0))]
    if trajectory_in_superposition:
        later.append(_op(space, ["C", "X_A"], _controlled(P0, X, on=1)))
    later.append(_op(space, ["C"], HADAMARD))
    lab = Lab(m, ("T",), {"A": event}, name=agent)
    return lab, Context(initial, KrausChannel(space, space, (_chain(space, *later),))), event


def _double_slit(params: ModelParams, agent: str, phase: float = np.pi) -> tuple[Lab, Context, Event]:
    """Path qubit through two slits; the agent's pointer is either fixed (Claire) or path-entangled (Quinn)."""
    space = Space.of(("R_A", 2), ("P", 2))
    if agent == "Claire":
        m = _pointer(("x_L", "x_R"))
        path = params.alpha * ket(0, 2) + params.beta * ket(1, 2)
        vec = np.kron(ket(0, 2), path)
    elif agent == "Quinn":
        m = _pointer(("q_L", "q_R"))
        vec = params.alpha * np.kron(ket(0, 2), ket(0, 2)) + params.beta * np.kron(ket(1, 2), ket(1, 2))
    else:
        raise UnsupportedChoice(f"double slit has no agent {agent!r}")
    l_left, l_right = m.labels
    shift = np.exp(1j * phase)
    event = Event((ConditionedStep(m, {l_left: np.diag([shift, 1.0]), l_right: np.diag([1.0, shift])}),), "A")
    later = []
    if agent == "Quinn":
        # Quinn's two trajectories rejoin before the screen
        later.append(_op(space, ["P", "R_A"], _controlled(P0, X, on=1)))
    later.append(_op(space, ["P"], HADAMARD))
    lab = Lab(m, ("P",), {"A": event}, name=agent)
    return lab, Context(_state(space, vec), KrausChannel(space, space, (_chain(space, *later),))), event


def _lookup(s: ScenarioId, c: LabChoice) -> None:
    key = (ScenarioId(s), c.agent, c.reference)
    if key in OPEN:
        raise OpenModelError(OPEN[key])
    if key not in SUPPORTED or c.event not in SUPPORTED[key]:
        raise UnsupportedChoice(
            f"unsupported combination {ScenarioId(s).value} {c}; supported:\n  " + "\n  ".join(supported_matrix()))


def build_context(s: ScenarioId | str, c: LabChoice, params: ModelParams | None = None,
                  ) -> tuple[Lab, Context, Event]:
    s = ScenarioId(s)
    params = ModelParams() if params is None else params
    _lookup(s, c)
    labels = POINTER_LABELS[c.reference]
    if s is ScenarioId.DOUBLE_SLIT:
        triple = _double_slit(params, c.agent)
    elif c.reference in ("t", "(x,t)") and (s is ScenarioId.QS_CT or c.agent == "Claire"):
        if c.reference == "(x,t)":
            labels = ("(x_A,t1)", "(x_A,t2)")
        triple = _fine_grained(params, labels, c.event, clocked=True, agent=c.agent)
    elif c.reference == "x":
        triple = _fine_grained(params, labels, c.event, clocked=False, agent=c.agent)
    elif c.reference in ("(x,t)", "a", "t_arr"):
        triple = _effective(params, labels, c.agent)
    elif c.reference in ("tau", "singleton"):
        triple = _coarse(params, labels, c.agent, trajectory_in_superposition=s is not ScenarioId.QS_CT)
    else:  # pragma: no cover - guarded by SUPPORTED
        raise UnsupportedChoice(str(c))
    lab, ctx, event = triple
    if params.rotate_frame and lab.measurement.dim > 1:
        lab, ctx, event = labcalc.change_basis(lab, ctx, event, {lab.reference: params.frame(lab.measurement.dim)})
    return lab, ctx, event


@dataclass(frozen=True)
class VerdictRow:
    scenario: ScenarioId
    choice: LabChoice
    measurability: labcalc.MeasurabilityVerdict
    localisation: labcalc.LocalisationVerdict
    info_set_size: int

    @property
    def measurability_label(self) -> str:
        return self.measurability.label

    @property
    def localisation_label(self) -> str:
        if self.info_set_size == 1 and self.localisation.status == "localised":
            return "localised"
        return self.localisation.label

    @property
    def distances(self) -> dict[str, float]:
        out = {"measurability": self.measurability.distance}
        out.update({f"localisation[{k}]": v for k, v in self.localisation.distances.items()})
        return out


def analyze(s: ScenarioId | str, c: LabChoice, params: ModelParams | None = None, *,
            tolerance: float = labcalc.DEFAULT_TOLERANCE, strict_local: bool = False) -> VerdictRow:
    s = ScenarioId(s)
    lab, ctx, event = build_context(s, c, params)
    meas = labcalc.check_relative_measurability(lab, ctx, event, tolerance=tolerance, strict_local=strict_local)
    loc = labcalc.check_localisation(lab, ctx, event, tolerance=tolerance, strict_local=strict_local)
    return VerdictRow(s, c, meas, loc, len(lab.info_set))


@dataclass(frozen=True)
class TableRow:
    """One line of the main table: several analyses reported together."""

    protocols: str
    info_set: str
    event: str
    analyses: tuple[VerdictRow, ...]

    @property
    def measurability(self) -> str:
        labels = {a.measurability_label for a in self.analyses}
        return labels.pop() if len(labels) == 1 else "mixed(" + "/".join(sorted(labels)) + ")"

    @property
    def localisation(self) -> str:
        labels = list(dict.fromkeys(a.localisation_label for a in self.analyses))
        if len(labels) == 1:
            return labels[0]
        suffix = "-localised"
        if all(lab.endswith(suffix) and lab != "non-localised" and "(" not in lab for lab in labels):
            return "/".join(lab[: -len(suffix)] for lab in labels) + suffix
        return "mixed(" + " | ".join(labels) + ")"

    @property
    def max_measurability_distance(self) -> float:
        return max(a.measurability.distance for a in self.analyses)


# which analyses make up each line of the main table
MAIN_ROWS: tuple[tuple[str, str, str, tuple[tuple[ScenarioId, LabChoice], ...]], ...] = (
    ("QS_CT", "{t}", "Alice's (A's) operation", ((ScenarioId.QS_CT, LabChoice("Alice", "t", "A")),)),
    ("QS_CT", "{t}", "A1, A2's operation", (
        (ScenarioId.QS_CT, LabChoice("Alice", "t", "A1")),
        (ScenarioId.QS_CT, LabChoice("Alice", "t", "A2")))),
    ("QS_CT", "{x}", "A, A1, A2 operation", tuple(
        (ScenarioId.QS_CT, LabChoice("Alice", "x", e)) for e in ("A", "A1", "A2"))),
    ("QS_QT", "{(x,t)}", "A's operation", ((ScenarioId.QS_QT, LabChoice("Alice", "(x,t)", "A")),)),
    ("QS_QT, QS_G", "{a}", "A's operation", (
        (ScenarioId.QS_QT, LabChoice("Alice", "a", "A")),
        (ScenarioId.QS_G, LabChoice("Alice", "a", "A")))),
    ("QS_QT, QS_G", "{tau}", "A's operation", (
        (ScenarioId.QS_QT, LabChoice("Alice", "tau", "A")),
        (ScenarioId.QS_G, LabChoice("Alice", "tau", "A")))),
    ("All QS", "|P_A|=1", "A's operation", tuple(
        (s, LabChoice("Alice", "singleton", "A")) for s in (ScenarioId.QS_CT, ScenarioId.QS_QT, ScenarioId.QS_G))),
)


def table_main(params: ModelParams | None = None, *, tolerance: float = labcalc.DEFAULT_TOLERANCE,
               strict_local: bool = False) -> list[TableRow]:
    rows = []
    for protocols, info, ev, members in MAIN_ROWS:
        analyses = tuple(analyze(s, c, params, tolerance=tolerance, strict_local=strict_local) for s, c in members)
        rows.append(TableRow(protocols, info, ev, analyses))
    return rows


def classify_description(lab: Lab, ctx: Context, event: Event, *, tolerance: float = labcalc.DEFAULT_TOLERANCE,
                         strict_local: bool = False) -> AssumptionClass:
    """Place a lab among the fine / effective / coarse assumption sets.

    Coarse: one operationally relevant reference value. Effective: reference
    entangled with the rest (impure marginal), not relatively measurable,
    target without a vacuum sector. Fine: relatively measurable,
    vacuum-extended target, and conditioned operations that really depend on
    the reference value.
    """
    if len(labcalc.relevant_labels(lab, ctx, event)) == 1:
        return AssumptionClass.COARSE
    meas = labcalc.check_relative_measurability(lab, ctx, event, tolerance=tolerance, strict_local=strict_local)
    vacuum = labcalc.target_is_vacuum_extended(lab, ctx.space)
    entangled = labcalc.reference_purity(lab, ctx) < 1 - 1e-9
    if entangled and not meas.measurable and not vacuum:
        return AssumptionClass.EFFECTIVE
    if meas.measurable and vacuum and labcalc.conditioned_ops_differ(event):
        return AssumptionClass.FINE
    raise ValueError("the lab matches none of the fine / effective / coarse assumption sets")


@dataclass(frozen=True)
class ClassificationCell:
    scenario: ScenarioId
    lab_text: str
    choices: tuple[LabChoice, ...]
    classes: tuple[AssumptionClass, ...]
    note: str = ""
    properties: dict = field(default_factory=dict)

    @property
    def assumption_class(self) -> AssumptionClass:
        distinct = set(self.classes)
        if len(distinct) != 1:
            raise ValueError(f"labs in cell {self.lab_text!r} classify differently: {self.classes}")
        return self.classes[0]


# the labs named in the descriptions table, by scenario column
APPENDIX_LABS: tuple[tuple[ScenarioId, str, tuple[LabChoice, ...]], ...] = (
    (ScenarioId.QS_CT, "Alice's Lab with (x,t)", (LabChoice("Alice", "(x,t)"),)),
    (ScenarioId.QS_CT, "Alice's Lab with t_arr", (LabChoice("Alice", "t_arr"),)),
    (ScenarioId.QS_CT, "Any Lab with triv. reference", (LabChoice("Alice", "singleton"),)),
    (ScenarioId.QS_QT, "Claire's Lab with (x,t)", (LabChoice("Claire", "(x,t)"),)),
    (ScenarioId.QS_QT, "Alice's Lab using (x,t), a", (LabChoice("Alice", "(x,t)"), LabChoice("Alice", "a"))),
    (ScenarioId.QS_QT, "Alice's Lab using tau", (LabChoice("Alice", "tau"),)),
    (ScenarioId.QS_G, "Claire_G's Lab with (x,t)", (LabChoice("Claire", "(x,t)"),)),
    (ScenarioId.QS_G, "Alice's Lab using a", (LabChoice("Alice", "a"),)),
    (ScenarioId.QS_G, "Alice's Lab using tau", (LabChoice("Alice", "tau"),)),
)


def classify(s: ScenarioId | str, c: LabChoice, params: ModelParams | None = None, *,
             tolerance: float = labcalc.DEFAULT_TOLERANCE, strict_local: bool = False) -> AssumptionClass:
    try:
        lab, ctx, event = build_context(s, c, params)
    except OpenModelError:
        return AssumptionClass.UNRESOLVED
    return classify_description(lab, ctx, event, tolerance=tolerance, strict_local=strict_local)


def description_properties(s: ScenarioId | str, c: LabChoice, params: ModelParams | None = None, *,
                           tolerance: float = labcalc.DEFAULT_TOLERANCE) -> dict:
    """Computed answers to the structural questions of the descriptions table."""
    try:
        lab, ctx, event = build_context(s, c, params)
    except OpenModelError:
        return {}
    meas = labcalc.check_relative_measurability(lab, ctx, event, tolerance=tolerance)
    return {
        "non_trivial_reference": len(labcalc.relevant_labels(lab, ctx, event)) > 1,
        "acts_on_vacuum": labcalc.target_is_vacuum_extended(lab, ctx.space),
        "relatively_measurable": meas.measurable,
    }


def table_appendix(params: ModelParams | None = None, *, tolerance: float = labcalc.DEFAULT_TOLERANCE,
                   strict_local: bool = False) -> list[ClassificationCell]:
    cells = []
    for s, text, choices in APPENDIX_LABS:
        classes = tuple(classify(s, c, params, tolerance=tolerance, strict_local=strict_local) for c in choices)
        note = OPEN.get((s, choices[0].agent, choices[0].reference), "")
        props = description_properties(s, choices[0], params, tolerance=tolerance)
        cells.append(ClassificationCell(s, text, choices, classes, note, props))
    return cells


def readout_distribution(ctx: Context, lab: Lab, event: Event, factor: str) -> np.ndarray:
    """Outcome probabilities of a computational-basis readout of ``factor`` after the protocol."""
    ev = labcalc._lifted_event(lab, event, ctx.space)
    out = apply_channel(ev, ctx.initial)
    if ctx.continuation is not None:
        out = apply_channel(ctx.continuation, out)
    reduced = partial_trace(out, [factor]).matrix
    return np.clip(np.diag(reduced).real, 0.0, 1.0)


@dataclass(frozen=True)
class DoubleSlitReport:
    row: VerdictRow
    without_intervention: tuple[float, ...]
    with_intervention: tuple[float, ...]


def double_slit(agent: str, params: ModelParams | None = None, *, tolerance: float = labcalc.DEFAULT_TOLERANCE,
                strict_local: bool = False) -> DoubleSlitReport:
    params = ModelParams() if params is None else params
    choice = LabChoice(agent, "x", "A")
    row = analyze(ScenarioId.DOUBLE_SLIT, choice, params, tolerance=tolerance, strict_local=strict_local)
    dists = []
    for phase in (0.0, np.pi):
        lab, ctx, event = _double_slit(params, agent, phase)
        dists.append(tuple(float(p) for p in readout_distribution(ctx, lab, event, "P")))
    return DoubleSlitReport(row, dists[0], dists[1])
