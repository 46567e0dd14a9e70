"""Command-line entry point.

Exit codes: 0 for a positive answer, 1 for a negative one (no model, not
proven, no plan), 2 for usage or input errors.  ``--json`` switches stdout
to a stable envelope {ok, result, diagnostics}; human text is the default.
Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .inference import (
    Derivation, InferenceError, InvariantStatus, SimulationPolicy,
    check_invariant, derive, initialise, plan, plan_optimal, progress,
    simulate,
)
from .parser import ParseFailure, parse
from .printer import print_structure, print_theory, print_vocabulary
from .structure import chain_to_json, state_to_json
from .syntax import Theory
from .transform import expand_fluent_macro
from .tptp import export_induction_obligations
from .validate import LtcValidationFailure, check_ltc_theory

OK, NEGATIVE, USAGE = 0, 1, 2


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE):
        self.code = code
        super().__init__(message)


def load_program(path: str, extra_vocs=()):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    try:
        return parse(text, vocabularies=extra_vocs)
    except ParseFailure as exc:
        raise CliError(f"{path}: " + "; ".join(str(d) for d in exc.diagnostics))


def analyze(prog, theory_name: str | None = None) -> Derivation:
    """Pick the main theory, expand fluent declarations, check, derive."""
    theories = prog.theories
    if not theories:
        raise CliError("program declares no theory")
    if theory_name is None:
        theory_name = next(iter(theories))
    if theory_name not in theories:
        raise CliError(f"unknown theory {theory_name!r}")
    theory = theories[theory_name]
    voc, theory = expand_fluent_macro(theory.vocabulary, theory)
    try:
        ltc_theory = check_ltc_theory(theory)
    except LtcValidationFailure as exc:
        raise CliError("not an LTC theory: " + "; ".join(str(e) for e in exc.errors))
    return derive(ltc_theory)


def pick_structure(prog, name: str | None):
    structures = prog.structures
    if name is not None:
        if name not in structures:
            raise CliError(f"unknown structure {name!r}")
        return structures[name]
    if not structures:
        raise CliError("program declares no structure (needed as the instance data)")
    return next(iter(structures.values()))


def single_sentence(theory: Theory):
    if len(theory.sentences) != 1 or theory.definitions:
        raise CliError("property file must contain exactly one sentence")
    return theory.sentences[0]


class Output:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list[str] = []
        self.payload = {}

    def text(self, line: str):
        self.lines.append(line)

    def emit(self, ok: bool, code: int) -> int:
        if self.as_json:
            print(json.dumps({"ok": ok, "result": self.payload, "diagnostics": []},
                             default=str, indent=2, sort_keys=True))
        else:
            for line in self.lines:
                print(line)
        return code


def cmd_check(args) -> int:
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    out = Output(args.json)
    kinds = [c.kind.value for c in d.ltc.sentence_classes]
    rule_kinds = [c.kind.value for group in d.ltc.rule_classes for c in group]
    out.text(f"OK: LTC theory {d.ltc.theory.name!r} "
             f"({len(rule_kinds)} rules, {len(kinds)} sentences)")
    out.payload = {"theory": d.ltc.theory.name, "sentences": kinds, "rules": rule_kinds}
    return out.emit(True, OK)


def cmd_derive(args) -> int:
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    out = Output(args.json)
    text = "\n\n".join([
        print_vocabulary(d.derived.single_state),
        print_theory(d.initial),
        print_vocabulary(d.derived.bistate),
        print_theory(d.transition),
    ])
    out.text(text)
    out.payload = {"initial": print_theory(d.initial), "transition": print_theory(d.transition)}
    return out.emit(True, OK)


def _nbmodels(n: int):
    return None if n == 0 else n


def cmd_init(args) -> int:
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    j = pick_structure(prog, args.structure)
    states = initialise(d, j, _nbmodels(args.nbmodels))
    out = Output(args.json)
    out.payload = {"count": len(states), "states": [state_to_json(s) for s in states]}
    if not states:
        out.text("no initial state")
        return out.emit(False, NEGATIVE)
    for i, s in enumerate(states):
        out.text(print_structure(s, f"init{i}"))
    return out.emit(True, OK)


def cmd_progress(args) -> int:
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    state_prog = load_program(args.state, extra_vocs=[d.derived.single_state])
    states = list(state_prog.structures.values())
    if len(states) != 1:
        raise CliError("state file must contain exactly one structure")
    succs = progress(d, states[0], _nbmodels(args.nbmodels))
    out = Output(args.json)
    out.payload = {"count": len(succs), "states": [state_to_json(s) for s in succs]}
    if not succs:
        out.text("deadlock: no successor state")
        return out.emit(False, NEGATIVE)
    for i, s in enumerate(succs):
        out.text(print_structure(s, f"succ{i}"))
    return out.emit(True, OK)


def cmd_simulate(args) -> int:
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    j = pick_structure(prog, args.structure)
    if args.script:
        with open(args.script, encoding="utf-8") as fh:
            script = json.load(fh)
        if not isinstance(script, list) or not all(isinstance(x, int) for x in script):
            raise CliError("script file must be a JSON list of integers")
        policy = SimulationPolicy(mode="scripted", script=script)
    elif args.random:
        policy = SimulationPolicy(mode="random", seed=args.seed)
    else:
        policy = SimulationPolicy(mode="interactive", choose=_prompt_choice)
    policy.max_steps = args.max_steps
    if args.end_atom:
        from .truth import TRUE
        name = args.end_atom
        policy.endcheck = lambda s: s.pred_value(name, ()) is TRUE
    if not args.json:
        policy.show = lambda s: print(print_structure(s, "state"), file=sys.stderr)
    chain, reason = simulate(d, j, policy)
    out = Output(args.json)
    out.payload = chain_to_json(chain)
    out.text(f"stopped: {reason.value} after {chain.length} steps (seed {policy.seed})")
    for k, s in enumerate(chain.states):
        out.text(print_structure(s, f"state{k}"))
    return out.emit(True, OK)


def _prompt_choice(groups, nondeterministic: bool) -> int:
    tag = "outcome" if nondeterministic else "action"
    print(f"choose an {tag}:", file=sys.stderr)
    for i, g in enumerate(groups):
        print(f"  [{i}] {g.label}", file=sys.stderr)
    while True:
        line = input("> ")
        try:
            idx = int(line)
        except ValueError:
            print("enter a number", file=sys.stderr)
            continue
        if 0 <= idx < len(groups):
            return idx
        print("out of range", file=sys.stderr)


def _aux_theory(spec: str, prog, d: Derivation, what: str) -> Theory:
    """Resolve a goal/property reference: a theory name in the main program,
    or a separate file (parsed with the program's vocabulary in scope)."""
    import os
    if spec in prog.theories:
        return prog.theories[spec]
    if os.path.exists(spec):
        aux = load_program(spec, extra_vocs=[d.ltc.vocabulary])
        theories = aux.theories
        if len(theories) != 1:
            raise CliError(f"{what} file must contain exactly one theory")
        return next(iter(theories.values()))
    raise CliError(f"{what} {spec!r} is neither a theory in the program nor a file")


def cmd_plan(args) -> int:
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    j = pick_structure(prog, args.structure)
    goal = _aux_theory(args.goal, prog, d, "goal")
    out = Output(args.json)
    if args.optimal:
        cost_term = None
        if args.cost:
            cost_term = _parse_cost(args.cost, d)
        result = plan_optimal(d, goal, j, args.horizon, cost_term)
        if result is None:
            out.text(f"NO PLAN at horizon {args.horizon}")
            out.payload = {"plan": None, "horizon": args.horizon}
            return out.emit(False, NEGATIVE)
        optimum, chain = result
        out.text(f"optimal plan found: cost {optimum}")
        out.payload = {"optimum": optimum, "chain": chain_to_json(chain)}
        # the decoded model fixes post-goal states too; display up to the goal
        shown = chain.states[: optimum + 1] if isinstance(optimum, int) else chain.states
        for k, s in enumerate(shown):
            out.text(print_structure(s, f"state{k}"))
        return out.emit(True, OK)
    chain = plan(d, goal, j, args.horizon)
    if chain is None:
        out.text(f"NO PLAN at horizon {args.horizon}")
        out.payload = {"plan": None, "horizon": args.horizon}
        return out.emit(False, NEGATIVE)
    out.text(f"plan found at horizon {args.horizon}")
    out.payload = {"chain": chain_to_json(chain)}
    for k, s in enumerate(chain.states):
        out.text(print_structure(s, f"state{k}"))
    return out.emit(True, OK)


def _parse_cost(text: str, d: Derivation):
    from .parser import Parser
    p = Parser(text, vocabularies=[d.ltc.vocabulary])
    try:
        raw = p.parse_term(d.ltc.vocabulary, {})
        diags: list = []
        p.infer_term(raw, None, diags, p.cur)
        if diags or p.cur.kind != "eof":
            raise ParseFailure(diags or [p.cur])
        return p.resolve_term(raw, p.cur)
    except ParseFailure as exc:
        raise CliError(f"bad cost term {text!r}: {exc}")


def cmd_invariant(args) -> int:
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    prop = single_sentence(_aux_theory(args.prop, prog, d, "property"))
    if args.domain in prog.structures:
        domain = prog.structures[args.domain]
    else:
        domain_prog = load_program(args.domain, extra_vocs=[d.ltc.vocabulary])
        domain = pick_structure(domain_prog, None)
    verdict = check_invariant(d, prop, domain)
    out = Output(args.json)
    out.payload = {"status": verdict.status.name, "message": verdict.message}
    if verdict.witness is not None:
        out.payload["witness"] = state_to_json(verdict.witness)
    if verdict.status is InvariantStatus.PROVEN:
        out.text("PROVEN (induction: base ok, step ok)"
                 if verdict.message.startswith("base") else f"PROVEN ({verdict.message})")
        return out.emit(True, OK)
    out.text(f"NOT PROVEN: {verdict.status.value} ({verdict.message})")
    if verdict.witness is not None:
        out.text(print_structure(verdict.witness, "counterexample"))
    code = NEGATIVE if verdict.status is not InvariantStatus.NOT_APPLICABLE else USAGE
    return out.emit(False, code)


def cmd_export_tptp(args) -> int:
    import os
    prog = load_program(args.file)
    d = analyze(prog, args.theory)
    prop = single_sentence(_aux_theory(args.prop, prog, d, "property"))
    obligations = export_induction_obligations(d, prop)
    os.makedirs(args.out, exist_ok=True)
    written = []
    for name, text in obligations.problems.items():
        path = os.path.join(args.out, f"{name}.p")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)
    out = Output(args.json)
    out.payload = {"files": written, "used_completion": obligations.used_completion}
    out.text("wrote " + ", ".join(written))
    if obligations.used_completion:
        out.text("warning: definitions approximated by completion")
    return out.emit(True, OK)


def cmd_serve(args) -> int:
    import uvicorn
    from .service import create_app
    app = create_app(session_ttl=args.ttl, successor_cap=args.cap,
                     log_path=args.session_log)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return OK


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ltc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, structure=True):
        p.add_argument("file", help="program file (.ltc)")
        p.add_argument("--theory", help="theory block to use (default: first)")
        if structure:
            p.add_argument("--structure", help="structure block to use (default: first)")
        p.add_argument("--json", action="store_true", help="JSON envelope on stdout")

    p = sub.add_parser("check", help="validate a program as an LTC theory")
    common(p, structure=False)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("derive", help="print the initial and transition theories")
    common(p, structure=False)
    p.set_defaults(fn=cmd_derive)

    p = sub.add_parser("init", help="enumerate initial states")
    common(p)
    p.add_argument("--nbmodels", type=int, default=0, help="0 means all")
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("progress", help="enumerate successor states")
    common(p, structure=False)
    p.add_argument("--state", required=True, help="single-state structure file")
    p.add_argument("--nbmodels", type=int, default=0, help="0 means all")
    p.set_defaults(fn=cmd_progress)

    p = sub.add_parser("simulate", help="run a simulation")
    common(p)
    p.add_argument("--random", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--script", help="JSON file with a list of choice indices")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--end-atom", help="stop when this nullary dynamic atom is true")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("plan", help="bounded planning")
    common(p)
    p.add_argument("--goal", required=True, help="goal theory file")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--optimal", action="store_true")
    p.add_argument("--cost", help="ground cost term (with --optimal)")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("invariant", help="fixed-domain invariant check by induction")
    common(p, structure=False)
    p.add_argument("--prop", required=True, help="property file (one sentence)")
    p.add_argument("--domain", required=True, help="domain structure file")
    p.set_defaults(fn=cmd_invariant)

    p = sub.add_parser("export-tptp", help="emit induction obligations as TPTP FOF")
    common(p, structure=False)
    p.add_argument("--prop", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_export_tptp)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8421)
    p.add_argument("--ttl", type=float, default=1800.0, help="session TTL seconds")
    p.add_argument("--cap", type=int, default=200, help="successor cap")
    p.add_argument("--session-log", default=None, help="append-only JSONL session log")
    p.set_defaults(fn=cmd_serve)
    return ap


def main(argv=None) -> int:
    ap = build_arg_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (LtcValidationFailure, InferenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except BrokenPipeError:
        return OK


if __name__ == "__main__":
    sys.exit(main())
