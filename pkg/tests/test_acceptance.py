"""Acceptance suite: one test per acceptance criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion with its timing.  Criteria 1-10 cover the engine; the browser
client has its own suite under frontend/.
"""

import glob
import itertools
import os
import random
import time

from conftest import load, program_path
from gen import (
    base_structure, fuzz_sentence, fuzz_structure, fuzz_vocabulary,
    less_precise, random_ltc_theory, small_vocabulary,
)
from oracles import (
    bfs_plan_length, brute_force_successors, classical_eval, state_key,
    structures_equal,
)
from ltc.ground import geval, ground, instantiate_definition
from ltc.inference import (
    InvariantStatus, SimulationPolicy, StopReason, check_invariant, derive,
    detect_deadlock, initialise, is_weakly_compatible, plan, plan_optimal,
    progress, simulate,
)
from ltc.kleene import kleene_eval
from ltc.parser import parse
from ltc.printer import print_program, print_theory, print_vocabulary
from ltc.structure import Chain, PartialStructure, PredTable, chain_to_partial, pair_states
from ltc.syntax import Category, Theory, alpha_equal
from ltc.transform import shift_to_next, time_eliminate
from ltc.truth import FALSE, TRUE, UNKNOWN, precision_le
from ltc.validate import check_ltc_theory, classify
from ltc.wellfounded import (
    definition_value, eval_theory, satisfies, well_founded_model,
)


def report(n, description, started):
    print(f"\nACCEPTANCE {n} PASS: {description} ({time.time() - started:.2f}s)")


# ---------------------------------------------------------------------------
# 1. Golden derivation

def test_criterion_1_golden_derivation(pacman_derivation):
    started = time.time()
    golden = load("golden/pacman_derived.ltc")
    assert alpha_equal(pacman_derivation.initial, golden.theories["T_0"])
    assert alpha_equal(pacman_derivation.transition, golden.theories["T_t"])
    assert pacman_derivation.derived.single_state == golden.vocabularies["P_ss"]
    assert pacman_derivation.derived.bistate == golden.vocabularies["P_bs"]
    elapsed = time.time() - started
    assert elapsed < 1.0
    report(1, "derive reproduces the committed initial/transition theories", started)


# ---------------------------------------------------------------------------
# 2. Split-theorem oracle equivalence (model of T <-> projections model T0/Tt)

class FastEval:
    """Evaluate one grounded theory against many atom assignments."""

    def __init__(self, theory, base):
        self.gt = ground(theory, base)

    def holds(self, val) -> bool:
        if self.gt.unsat:
            return False
        for c in self.gt.constraints:
            if geval(c, val) is not TRUE:
                return False
        for gdef in self.gt.definitions:
            wf = well_founded_model(gdef, val)
            for key, v in wf.items():
                if v is UNKNOWN or val(key) is not v:
                    return False
        return True


def _sigma_atoms(voc, domains):
    """Every ground predicate atom, static ones included."""
    atoms = []
    for sym in voc.symbols:
        if sym.category is Category.LTC or not sym.is_predicate:
            continue
        grid = itertools.product(*(domains[s.name] for s in sym.arg_sorts))
        atoms.extend(("p", sym.name, tup) for tup in grid)
    return atoms


def test_criterion_2_split_theorem_equivalence():
    started = time.time()
    rng = random.Random(271828)
    theories = 0
    structures_checked = 0
    while theories < 100:
        voc = small_vocabulary(rng, n_dynamic=rng.choice([1, 2, 2]),
                               n_static=rng.choice([0, 1]))
        theory = random_ltc_theory(rng, voc)
        n_obj = rng.choice([1, 2])
        time_points = rng.choice([2, 2, 3])
        base = base_structure(rng, voc, n_obj=n_obj, time_points=time_points)
        # leave everything open: the whole structure space is enumerated
        base = PartialStructure(voc, dict(base.domains), {}, dict(base.funcs))
        atoms = _sigma_atoms(voc, base.domains)
        if len(atoms) > 13:
            continue
        ltc = check_ltc_theory(theory)
        d = derive(ltc)
        sigma_eval = FastEval(theory, base)
        doms_obj = {k: v for k, v in base.domains.items() if k != "Time"}
        statics_ss = PartialStructure(d.derived.single_state, doms_obj, {}, dict(base.funcs))
        statics_bs = PartialStructure(d.derived.bistate, doms_obj, {}, dict(base.funcs))
        t0_eval = FastEval(d.initial, statics_ss)
        tt_eval = FastEval(d.transition, statics_bs)
        to_base = {v: k for k, v in d.derived.next_names.items()}
        dynamic_names = {s.name for s in voc.dynamic_symbols}

        def translate(key, k):
            name = key[1]
            if name in to_base:
                return ("p", to_base[name], key[2] + (k + 1,))
            if name in dynamic_names:
                return ("p", name, key[2] + (k,))
            return key  # static symbols project unchanged

        n = time_points - 1
        for i, bits in enumerate(itertools.product([FALSE, TRUE], repeat=len(atoms))):
            assign = dict(zip(atoms, bits))
            val = lambda key: assign.get(key, UNKNOWN)
            lhs = sigma_eval.holds(val)
            rhs = t0_eval.holds(lambda key: assign.get(translate(key, 0), UNKNOWN))
            for k in range(n):
                if not rhs:
                    break
                rhs = tt_eval.holds(lambda key, k=k: assign.get(translate(key, k), UNKNOWN))
            assert lhs == rhs, (
                f"split-theorem mismatch: lhs={lhs} rhs={rhs}\n"
                f"{print_theory(theory)}\natoms={assign}")
            if i % 97 == 0:
                # tie the fast evaluator to the reference evaluation path
                candidate = PartialStructure(voc, dict(base.domains), {
                    name: PredTable(
                        {key[2]: assign[key] for key in atoms if key[1] == name}, FALSE)
                    for name in {key[1] for key in atoms}
                }, dict(base.funcs))
                assert satisfies(candidate, theory) == lhs
            structures_checked += 1
        theories += 1
    elapsed = time.time() - started
    assert elapsed < 60.0
    report(2, f"model-splitting equivalence on {theories} theories, "
              f"{structures_checked} structures exhaustively", started)


# ---------------------------------------------------------------------------
# 3. Weak progression equals brute force

def test_criterion_3_progress_equals_brute_force(pacman_derivation, corridor3):
    started = time.time()
    rng = random.Random(314159)
    compared = 0
    for _ in range(30):
        voc = small_vocabulary(rng)
        theory = random_ltc_theory(rng, voc)
        d = derive(check_ltc_theory(theory))
        j = base_structure(rng, voc, n_obj=rng.choice([1, 2]), time_points=2)
        for state in initialise(d, j, 3):
            got = sorted(state_key(s) for s in progress(d, state, None))
            expected = sorted(state_key(s) for s in brute_force_successors(d, state))
            assert got == expected
            compared += 1
    # the corridor instance
    d = pacman_derivation
    for state in initialise(d, corridor3, 4):
        got = sorted(state_key(s) for s in progress(d, state, None))
        expected = sorted(state_key(s) for s in brute_force_successors(d, state))
        assert got == expected
        compared += 1
    report(3, f"weak progression matches brute force on {compared} states", started)


# ---------------------------------------------------------------------------
# 4. Weak Markov property

def _light_switch(n_lights, init_bits):
    lights = "\n".join(f"  Light{i}(Time)" for i in range(n_lights))
    inits = "\n".join(f"  On{i}()" for i in range(n_lights))
    rules = []
    for i in range(n_lights):
        rules.append(f"    Light{i}(Init) <- On{i}.")
        rules.append(f"    !t: Light{i}(Succ(t)) <- Light{i}(t) & ~Toggle(t).")
        rules.append(f"    !t: Light{i}(Succ(t)) <- ~Light{i}(t) & Toggle(t).")
    tables = "\n".join(f"  On{i} = {{ {'()' if init_bits[i] else ''} }}"
                       for i in range(n_lights))
    return parse(f"""
    vocabulary LS {{
      type Time
      Toggle(Time) exogenous
    {lights}
    {inits}
    }}
    theory T : LS {{
      {{
    {chr(10).join(rules)}
      }}
    }}
    structure S : LS {{
    {tables}
    }}
    """)


def test_criterion_4_weak_markov():
    started = time.time()
    rng = random.Random(1618)
    instances = 0
    while instances < 50:
        n_lights = rng.choice([1, 2])
        init_bits = [rng.random() < 0.5 for _ in range(n_lights)]
        prog = _light_switch(n_lights, init_bits)
        d = derive(check_ltc_theory(prog.theories["T"]))
        j = prog.structures["S"]
        quiet_len = rng.randrange(1, 5)
        busy_tail = rng.randrange(1, 4)  # the second toggle needs a step to land
        # same toggle parity, different lengths and orders
        quiet = SimulationPolicy(mode="scripted", script=[0] + [0] * quiet_len)
        busy = SimulationPolicy(mode="scripted", script=[0, 1, 1] + [0] * busy_tail)
        c1, r1 = simulate(d, j, quiet)
        c2, r2 = simulate(d, j, busy)
        assert r1 is StopReason.CHOICES_EXHAUSTED and r2 is StopReason.CHOICES_EXHAUSTED
        assert (tuple(state_key(s) for s in c1.states)
                != tuple(state_key(s) for s in c2.states))
        assert state_key(c1.last) == state_key(c2.last), "histories must converge"
        s1 = sorted(state_key(s) for s in progress(d, c1.last, None))
        s2 = sorted(state_key(s) for s in progress(d, c2.last, None))
        assert s1 == s2
        instances += 1
    report(4, f"equal last states give equal successor sets on {instances} history pairs", started)


# ---------------------------------------------------------------------------
# 5. Deadlock example reproduction

def test_criterion_5_deadlock_reproduction(deadlock_program, deadlock_derivation):
    started = time.time()
    theory = deadlock_program.theories["T"]
    d = deadlock_derivation
    inits = initialise(d, deadlock_program.structures["Empty"], None)
    assert len(inits) == 1
    s0 = inits[0]
    assert s0.pred_value("P", ()) is TRUE and s0.pred_value("Q", ()) is FALSE
    chain = Chain(d.derived, (s0,))
    assert is_weakly_compatible(d, chain)
    assert progress(d, s0, None) == []
    assert detect_deadlock(d, s0)
    count_false = 0
    for pv in (TRUE, FALSE):
        for qv in (TRUE, FALSE):
            s1 = PartialStructure(d.derived.single_state, {},
                                  {"P": PredTable({(): pv}, FALSE),
                                   "Q": PredTable({(): qv}, FALSE)})
            ext = Chain(d.derived, (s0, s1))
            assert not is_weakly_compatible(d, ext)
            assert eval_theory(theory, chain_to_partial(ext)) is FALSE
            count_false += 1
    assert count_false == 4
    report(5, "0-chain weakly compatible, deadlocked; all extensions false", started)


# ---------------------------------------------------------------------------
# 6. Kleene properties

def test_criterion_6_kleene_properties():
    started = time.time()
    rng = random.Random(662607)
    # classical agreement on 1000 two-valued instances
    checked = 0
    while checked < 1000:
        voc = fuzz_vocabulary(rng)
        struct = fuzz_structure(rng, voc, partial=False)
        for _ in range(5):
            f = fuzz_sentence(rng, voc)
            expected = classical_eval(f, struct)
            assert kleene_eval(f, struct) is (TRUE if expected else FALSE)
            checked += 1
    # precision monotonicity on 1000 ordered pairs
    pairs = 0
    while pairs < 1000:
        voc = fuzz_vocabulary(rng)
        precise = fuzz_structure(rng, voc, partial=rng.random() < 0.5)
        vague = less_precise(rng, precise)
        for _ in range(4):
            f = fuzz_sentence(rng, voc)
            assert precision_le(kleene_eval(f, vague), kleene_eval(f, precise))
            pairs += 1
    # all-unknown defined atoms in a non-empty definition: value unknown
    defs_checked = 0
    while defs_checked < 100:
        voc = small_vocabulary(rng)
        theory = random_ltc_theory(rng, voc)
        base = base_structure(rng, voc, n_obj=rng.choice([1, 2]), time_points=2)
        defined_names = {s.name for d in theory.definitions for s in d.defined_symbols}
        preds = dict(base.preds)
        for sym in voc.symbols:
            if sym.category is Category.DYNAMIC and sym.name not in defined_names:
                grid = itertools.product(*(base.domains[s.name] for s in sym.arg_sorts))
                preds[sym.name] = PredTable(
                    {tup: (TRUE if rng.random() < 0.5 else FALSE) for tup in grid}, FALSE)
        struct = PartialStructure(voc, dict(base.domains), preds, dict(base.funcs))
        for defn in theory.definitions:
            gdef = instantiate_definition(defn, struct, "eval")
            assert gdef.defined_keys, "generator must produce ground defined atoms"
            assert definition_value(gdef, struct) is UNKNOWN
            defs_checked += 1
    report(6, f"classical agreement x{checked}, monotone pairs x{pairs}, "
              f"unknown-definition value x{defs_checked}", started)


# ---------------------------------------------------------------------------
# 7. Invariants

def test_criterion_7_invariants(pacman, pacman_derivation, grid2x2):
    started = time.time()
    d = pacman_derivation
    prog = load("props/never_reappear.ltc", vocabularies=[pacman.vocabularies["P"]])
    never = prog.theories["NeverReappear"].sentences[0]
    verdict = check_invariant(d, never, grid2x2)
    assert verdict.status is InvariantStatus.PROVEN
    prog = load("props/all_pellets.ltc", vocabularies=[pacman.vocabularies["P"]])
    allp = prog.theories["AllPellets"].sentences[0]
    verdict = check_invariant(d, allp, grid2x2)
    assert verdict.status is InvariantStatus.STEP_COUNTEREXAMPLE
    w = verdict.witness
    assert w is not None
    # witness model-checks against the transition theory with the property
    # holding now and failing next
    now = time_eliminate(allp, d.derived)
    nxt = time_eliminate(shift_to_next(allp, classify(allp).time_var), d.derived)
    assert satisfies(w, d.transition)
    assert kleene_eval(now, w) is TRUE
    assert kleene_eval(nxt, w) is FALSE
    elapsed = time.time() - started
    assert elapsed < 5.0
    report(7, "pellet persistence proven; false invariant yields a checked witness", started)


# ---------------------------------------------------------------------------
# 8. Planning

def test_criterion_8_planning(corridor_plan, plan_derivation):
    started = time.time()
    d = plan_derivation
    j = corridor_plan.structures["C"]
    goal = corridor_plan.theories["Win"]

    def cleared(state):
        return state.pred_table("Pell").true_tuples() == []

    shortest = bfs_plan_length(d, j, cleared)
    assert shortest == 2
    for horizon in range(5):
        chain = plan(d, goal, j, horizon)
        assert (chain is not None) == (horizon >= shortest)
    optimum, chain = plan_optimal(d, goal, j, 4)
    assert optimum == shortest == 2
    assert cleared(chain.states[optimum])
    elapsed = time.time() - started
    assert elapsed < 5.0
    report(8, "plan exists iff horizon >= 2; optimal cost 2 matches the search oracle", started)


# ---------------------------------------------------------------------------
# 9. Round-trip over the corpus and fuzzed theories

def test_criterion_9_round_trip():
    started = time.time()
    import re
    corpus = sorted(glob.glob(os.path.join(program_path(""), "**", "*.ltc"),
                              recursive=True))
    assert corpus
    pacman_voc = load("pacman.ltc").vocabularies["P"]
    for path in corpus:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        declares_voc = re.search(r"^\s*vocabulary\b", text, re.MULTILINE)
        vocs = [] if declares_voc else [pacman_voc]
        prog = parse(text, vocabularies=vocs)
        printed = print_program(prog)
        again = parse(printed, vocabularies=vocs)
        assert print_program(again) == printed, path
        for name, th in prog.theories.items():
            assert alpha_equal(again.theories[name], th), path
        for name, voc in prog.vocabularies.items():
            assert again.vocabularies[name] == voc, path
        for name, struct in prog.structures.items():
            assert structures_equal(again.structures[name], struct), path
    rng = random.Random(141421)
    fuzzed = 0
    while fuzzed < 500:
        voc = fuzz_vocabulary(rng)
        sentences = tuple(fuzz_sentence(rng, voc) for _ in range(rng.randrange(1, 4)))
        theory = Theory("T", voc, sentences, ())
        text = print_vocabulary(voc) + "\n" + print_theory(theory)
        prog = parse(text)
        assert prog.vocabularies[voc.name] == voc
        for a, b in zip(prog.theories["T"].sentences, sentences):
            assert alpha_equal(a, b)
        fuzzed += 1
    report(9, f"identity round-trip on the corpus and {fuzzed} fuzzed theories", started)


# ---------------------------------------------------------------------------
# 10. Induction soundness cross-check

def test_criterion_10_induction_soundness(pacman_play, play_derivation):
    started = time.time()
    d = play_derivation
    j = pacman_play.structures["Corridor3"]
    voc = pacman_play.vocabularies["P"]
    props = []
    for name, fname in (("MoveUnique", "props/move_unique.ltc"),
                        ("NeverReappear", "props/never_reappear.ltc")):
        prog = load(fname, vocabularies=[voc])
        props.append(prog.theories[name].sentences[0])
    proven = []
    for prop in props:
        verdict = check_invariant(d, prop, j)
        assert verdict.status is InvariantStatus.PROVEN
        cls = classify(prop)
        proven.append((prop, cls, time_eliminate(prop, d.derived)))
    violations = 0
    runs = 0
    rng = random.Random(577215)
    for seed in range(100):
        chain, _ = simulate(d, j, SimulationPolicy(
            mode="random", seed=seed, max_steps=rng.randrange(1, 21)))
        runs += 1
        for prop, cls, projected in proven:
            from ltc.validate import SentenceKind
            if cls.kind is SentenceKind.SINGLE_STATE:
                for state in chain.states:
                    if kleene_eval(projected, state) is not TRUE:
                        violations += 1
            else:
                for a, b in zip(chain.states, chain.states[1:]):
                    pair = pair_states(a, b, d.derived)
                    if kleene_eval(projected, pair) is not TRUE:
                        violations += 1
    assert violations == 0
    report(10, f"proven invariants hold along {runs} random runs with zero violations", started)
