"""User-facing inferences: initialise, progress, simulation, deadlock and
compatibility checks, invariant proving by induction, and bounded planning.

All of them reduce to model expansion on the derived initial/transition
theories (progression is weak: it never looks beyond the next state, so a
successor-free state is reported as a deadlock rather than avoided).
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .solver import ALL, Unsat, minimize, model_expand
from .structure import (
    Chain, PartialStructure, pair_states, project_state, unpair_next_state,
)
from .syntax import (
    Apply, Category, Exists, Formula, Not, SymbolDecl, Theory, fresh_name,
)
from .transform import (
    DerivedVocabularies, derive_initial_theory, derive_transition_theory,
    derive_vocabularies, shift_to_next, time_eliminate,
)
from .truth import TRUE
from .validate import LtcTheory, SentenceKind, classify
from .wellfounded import satisfies


class InferenceError(Exception):
    pass


@dataclass(frozen=True)
class Derivation:
    """An LTC theory with its derived vocabularies and split theories."""

    ltc: LtcTheory
    derived: DerivedVocabularies
    initial: Theory
    transition: Theory


def derive(ltc: LtcTheory) -> Derivation:
    return Derivation(ltc, derive_vocabularies(ltc.vocabulary),
                      derive_initial_theory(ltc), derive_transition_theory(ltc))


def _ensure(t) -> Derivation:
    return t if isinstance(t, Derivation) else derive(t)


# ---------------------------------------------------------------------------
# Progression

def initialise(t, j: PartialStructure, nbmodels=ALL) -> list[PartialStructure]:
    """Initial states agreeing with the time-0 projection of ``j``.

    ``j`` must interpret all non-Time sorts; its dynamic tables may be
    three-valued — certainly-true/false entries at time 0 become
    commitments, everything else stays open."""
    d = _ensure(t)
    j0 = project_state(j, d.derived, 0)
    return model_expand(d.initial, j0, nbmodels)


def progress(t, state: PartialStructure, nbmodels=ALL) -> list[PartialStructure]:
    """All states s2 with (state, s2) satisfying the transition theory.

    ``state`` must be two-valued.  Weak progression: only the next state is
    constrained, so an empty result signals a deadlock."""
    d = _ensure(t)
    bistate = PartialStructure(d.derived.bistate, dict(state.domains),
                               dict(state.preds), dict(state.funcs))
    models = model_expand(d.transition, bistate, nbmodels)
    return [unpair_next_state(m, d.derived) for m in models]


def detect_deadlock(t, state: PartialStructure) -> bool:
    return not progress(t, state, 1)


def is_weakly_compatible(t, chain: Chain) -> bool:
    """Initial state satisfies the initial theory and every adjacent pair the
    transition theory."""
    d = _ensure(t)
    if not satisfies(chain.states[0], d.initial):
        return False
    for a, b in zip(chain.states, chain.states[1:]):
        if not satisfies(pair_states(a, b, d.derived), d.transition):
            return False
    return True


class BudgetExceeded(InferenceError):
    pass


def strong_successors_bounded(t, chain: Chain, lookahead: int,
                              node_budget: int = 10000) -> list[PartialStructure]:
    """Successors surviving ``lookahead`` further progression steps.

    A bounded brute-force approximation of full progression (which may look
    arbitrarily far ahead); with lookahead <= 1 this is exactly weak
    progression.  Test oracle, not a production inference.
    """
    d = _ensure(t)
    budget = [node_budget]

    def extensible(state: PartialStructure, depth: int) -> bool:
        if depth <= 0:
            return True
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetExceeded(f"lookahead search exceeded {node_budget} nodes")
        for nxt in progress(d, state):
            if extensible(nxt, depth - 1):
                return True
        return False

    return [s for s in progress(d, chain.last) if extensible(s, lookahead - 1)]


# ---------------------------------------------------------------------------
# Exogenous grouping

def exogenous_restriction(state: PartialStructure, derived: DerivedVocabularies) -> tuple:
    """Canonical description of a state's exogenous part: sorted true atoms
    and function values of symbols flagged exogenous."""
    items = []
    for sym in derived.source.symbols:
        if sym.category is not Category.DYNAMIC or not sym.exogenous:
            continue
        if sym.is_predicate:
            table = state.pred_table(sym.name)
            for tup in state.grid(sym.state_args):
                if table.value(tup) is TRUE:
                    items.append((sym.name, tup, None))
        else:
            table = state.func_table(sym.name)
            for tup in state.grid(sym.state_args):
                items.append((sym.name, tup, table.value(tup)))
    return tuple(sorted(items, key=lambda it: (it[0], tuple(map(str, it[1])), str(it[2]))))


def restriction_label(restriction: tuple) -> str:
    if not restriction:
        return "(no exogenous action)"
    parts = []
    for name, tup, value in restriction:
        args = f"({', '.join(map(str, tup))})" if tup else ""
        parts.append(f"{name}{args}" + (f" = {value}" if value is not None else ""))
    return ", ".join(parts)


@dataclass(frozen=True)
class SuccessorGroup:
    label: str
    restriction: tuple
    states: tuple[PartialStructure, ...]


def group_by_exogenous(states, derived) -> list[SuccessorGroup]:
    order: list[tuple] = []
    buckets: dict[tuple, list] = {}
    for s in states:
        key = exogenous_restriction(s, derived)
        if key not in buckets:
            buckets[key] = []
            order.append(key)
        buckets[key].append(s)
    return [SuccessorGroup(restriction_label(k), k, tuple(buckets[k])) for k in order]


# ---------------------------------------------------------------------------
# Simulation

class StopReason(enum.Enum):
    END_CONDITION = "end condition met"
    DEADLOCK = "deadlock"
    MAX_STEPS = "max steps reached"
    CHOICES_EXHAUSTED = "scripted choices exhausted"


@dataclass
class SimulationPolicy:
    """How simulation picks among grouped successors.

    mode "random" draws uniformly with the given seed; "scripted" consumes
    the next index from ``script`` (an extra index whenever a chosen group
    has several endogenous completions); "interactive" delegates to
    ``choose(groups, nondeterministic)`` which returns an index.
    """

    mode: str = "random"
    seed: int = 0
    script: list = field(default_factory=list)
    choose: object = None
    show: object = None
    endcheck: object = None
    max_steps: int | None = None
    successor_cap: int | None = None


class HookFailure(InferenceError):
    def __init__(self, chain: Chain | None, cause: Exception):
        self.chain = chain
        self.cause = cause
        super().__init__(f"simulation hook failed: {cause}")


class _ScriptDone(Exception):
    pass


class _Chooser:
    def __init__(self, policy: SimulationPolicy):
        self.policy = policy
        self.rng = random.Random(policy.seed)
        self.cursor = 0

    def pick(self, groups, nondeterministic: bool) -> int:
        mode = self.policy.mode
        if len(groups) == 1 and mode != "interactive":
            return 0
        if mode == "random":
            return self.rng.randrange(len(groups))
        if mode == "scripted":
            if self.cursor >= len(self.policy.script):
                raise _ScriptDone()
            idx = self.policy.script[self.cursor]
            self.cursor += 1
            if not (0 <= idx < len(groups)):
                raise InferenceError(f"scripted choice {idx} out of range 0..{len(groups) - 1}")
            return idx
        if self.policy.choose is None:
            raise InferenceError("interactive policy without a choose hook")
        return self.policy.choose(groups, nondeterministic)


def simulate(t, j: PartialStructure, policy: SimulationPolicy) -> tuple[Chain, StopReason]:
    """Initialise, then repeatedly show / endcheck / progress / choose.

    Returns the full chain and the stop reason; the seed and reason are also
    recorded in the chain metadata for replay.
    """
    d = _ensure(t)
    cap = policy.successor_cap
    chooser = _Chooser(policy)
    chain: Chain | None = None

    def call_hook(hook, *args):
        try:
            return hook(*args)
        except Exception as exc:
            raise HookFailure(chain, exc)

    def pick_state(groups) -> PartialStructure:
        gi = chooser.pick(groups, False)
        group = groups[gi]
        if len(group.states) == 1:
            return group.states[0]
        # several endogenous completions of the same exogenous choice
        singles = [SuccessorGroup(group.label, group.restriction, (s,)) for s in group.states]
        return group.states[chooser.pick(singles, True)]

    candidates = initialise(d, j, cap)
    if not candidates:
        raise InferenceError("no initial state satisfies the theory")
    try:
        state = pick_state(group_by_exogenous(candidates, d.derived))
    except _ScriptDone:
        raise InferenceError("scripted choices exhausted before an initial state was chosen")

    chain = Chain(d.derived, (state,), {"seed": policy.seed})
    reason = None
    while True:
        if policy.show is not None:
            call_hook(policy.show, chain.last)
        if policy.endcheck is not None and call_hook(policy.endcheck, chain.last):
            reason = StopReason.END_CONDITION
            break
        if policy.max_steps is not None and chain.length >= policy.max_steps:
            reason = StopReason.MAX_STEPS
            break
        successors = progress(d, chain.last, cap)
        if not successors:
            reason = StopReason.DEADLOCK
            break
        try:
            state = pick_state(group_by_exogenous(successors, d.derived))
        except _ScriptDone:
            reason = StopReason.CHOICES_EXHAUSTED
            break
        chain = chain.extend(state)
    chain = Chain(chain.derived, chain.states, {**chain.metadata, "reason": reason.value})
    return chain, reason


# ---------------------------------------------------------------------------
# Invariants

class InvariantStatus(enum.Enum):
    PROVEN = "proven by induction"
    BASE_COUNTEREXAMPLE = "base case fails: not provable by induction"
    STEP_COUNTEREXAMPLE = "induction step fails: not provable by induction"
    NOT_APPLICABLE = "not applicable"


@dataclass(frozen=True)
class InvariantVerdict:
    status: InvariantStatus
    witness: PartialStructure | None = None
    obligation: str | None = None    # "base" or "step"
    message: str = ""

    @property
    def proven(self) -> bool:
        return self.status is InvariantStatus.PROVEN


def _statics_only(domain_struct: PartialStructure, voc) -> PartialStructure:
    """Keep only domains and static symbol tables; dynamics stay unknown."""
    preds, funcs = {}, {}
    for sym in voc.symbols:
        if sym.category is not Category.STATIC:
            continue
        if sym.is_predicate and sym.name in domain_struct.preds:
            preds[sym.name] = domain_struct.preds[sym.name]
        elif sym.is_function and sym.name in domain_struct.funcs:
            funcs[sym.name] = domain_struct.funcs[sym.name]
    doms = {name: dom for name, dom in domain_struct.domains.items() if name != "Time"}
    return PartialStructure(voc, doms, preds, funcs)


def check_invariant(t, prop: Formula, domain_struct: PartialStructure) -> InvariantVerdict:
    """Fixed-domain invariant check by induction.

    Single-state properties need an unsatisfiable base refutation (initial
    theory plus the negated property) and an unsatisfiable step refutation
    (transition theory, the property now, its negation next).  Bistate
    properties need only the step.  A counterexample refutes provability by
    induction over this bounded domain, not the invariant itself.
    """
    d = _ensure(t)
    cls = classify(prop)
    if cls.kind is SentenceKind.SINGLE_STATE:
        now = time_eliminate(prop, d.derived)
        nxt = time_eliminate(shift_to_next(prop, cls.time_var), d.derived)
        base_struct = _statics_only(domain_struct, d.derived.single_state)
        base_theory = Theory(d.initial.name + "_base", d.derived.single_state,
                             d.initial.sentences + (Not(now),), d.initial.definitions)
        witnesses = model_expand(base_theory, base_struct, 1)
        if witnesses:
            return InvariantVerdict(InvariantStatus.BASE_COUNTEREXAMPLE, witnesses[0], "base",
                                    "an initial state violates the property")
        step_struct = _statics_only(domain_struct, d.derived.bistate)
        step_theory = Theory(d.transition.name + "_step", d.derived.bistate,
                             d.transition.sentences + (now, Not(nxt)), d.transition.definitions)
        witnesses = model_expand(step_theory, step_struct, 1)
        if witnesses:
            return InvariantVerdict(InvariantStatus.STEP_COUNTEREXAMPLE, witnesses[0], "step",
                                    "a transition leaves the property")
        return InvariantVerdict(InvariantStatus.PROVEN, None, None,
                                "base and step obligations hold on this domain")
    if cls.kind is SentenceKind.BISTATE:
        now = time_eliminate(prop, d.derived)
        step_struct = _statics_only(domain_struct, d.derived.bistate)
        step_theory = Theory(d.transition.name + "_step", d.derived.bistate,
                             d.transition.sentences + (Not(now),), d.transition.definitions)
        witnesses = model_expand(step_theory, step_struct, 1)
        if witnesses:
            return InvariantVerdict(InvariantStatus.STEP_COUNTEREXAMPLE, witnesses[0], "step",
                                    "a transition violates the property")
        return InvariantVerdict(InvariantStatus.PROVEN, None, None,
                                "transition obligation holds on this domain")
    return InvariantVerdict(InvariantStatus.NOT_APPLICABLE, None, None,
                            f"property is {cls.kind.value}, need universal single-state or bistate")


# ---------------------------------------------------------------------------
# Planning

def _bound_time(j: PartialStructure, voc, horizon: int) -> PartialStructure:
    doms = dict(j.domains)
    doms["Time"] = tuple(range(horizon + 1))
    return PartialStructure(voc, doms, dict(j.preds), dict(j.funcs))


def _merge(t: Theory, goal: Theory, name: str) -> Theory:
    return Theory(name, t.vocabulary, t.sentences + goal.sentences,
                  t.definitions + goal.definitions)


def plan(t, goal: Theory, j: PartialStructure, horizon: int) -> Chain | None:
    """A chain of the given horizon satisfying theory and goal, or None."""
    d = _ensure(t)
    merged = _merge(d.ltc.theory, goal, d.ltc.theory.name + "_plan")
    bounded = _bound_time(j, merged.vocabulary, horizon)
    models = model_expand(merged, bounded, 1)
    if not models:
        return None
    from .structure import structure_to_chain
    return structure_to_chain(models[0], d.derived)


def _goal_time_symbol(voc) -> SymbolDecl:
    from .syntax import TIME_SORT
    taken = {s.name for s in voc.symbols}
    name = fresh_name("GoalTime", taken)
    return SymbolDecl(name, (), TIME_SORT, Category.STATIC)


def plan_optimal(t, goal: Theory, j: PartialStructure, horizon: int,
                 cost_term=None, nbmodels: int = 1):
    """Minimal-cost plan; default cost is the earliest time the goal holds.

    The default requires the goal to be a single sentence of the form
    ``?t: ...``; the existential is replaced by a fresh Time-valued constant
    whose value is minimized.  Returns (optimum, chain) or None when no plan
    exists at this horizon.
    """
    d = _ensure(t)
    if cost_term is None:
        if len(goal.sentences) != 1 or goal.definitions:
            raise InferenceError("default cost needs a goal with exactly one sentence")
        sent = goal.sentences[0]
        if not (isinstance(sent, Exists) and sent.var.sort.is_time):
            raise InferenceError("default cost needs a goal of the form '?t: ...'")
        gt_sym = _goal_time_symbol(d.ltc.vocabulary)
        voc = d.ltc.vocabulary.with_symbols((gt_sym,))
        cost_term = Apply(gt_sym, ())
        from .syntax import subst
        pinned = subst(sent.body, {sent.var.name: cost_term})
        base = Theory(d.ltc.theory.name, voc, d.ltc.theory.sentences,
                      d.ltc.theory.definitions)
        merged = _merge(base, Theory(goal.name, voc, (pinned,) + goal.sentences[1:], ()),
                        d.ltc.theory.name + "_plan")
    else:
        merged = _merge(d.ltc.theory, goal, d.ltc.theory.name + "_plan")
        voc = merged.vocabulary
    bounded = _bound_time(j, voc, horizon)
    try:
        optimum, witnesses = minimize(merged, bounded, cost_term, nbmodels)
    except Unsat:
        return None
    from .structure import structure_to_chain
    chain = structure_to_chain(witnesses[0], d.derived)
    return optimum, chain
