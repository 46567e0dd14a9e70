"""Well-founded evaluation of ground definitions and three-valued theory value.

The well-founded model is computed by the alternating fixpoint: a lower
bound grows by rules whose body is certainly true, an upper bound keeps
atoms some rule can still possibly derive; both are least fixpoints and the
pair is iterated to stability.  Rule bodies are arbitrary ground formulas
evaluated three-valuedly, so open symbols already resolved by the structure
and residual unknowns are handled uniformly.

The value of a definition in a partial structure: true iff the structure's
defined tables are two-valued and coincide with the well-founded model;
false iff some committed defined atom contradicts it; unknown otherwise.
When the definition's open symbols are not fully decided the well-founded
bounds are sound approximations and only contradictions against them count
as false (a committed atom the bounds leave open stays unknown).
"""

from __future__ import annotations

from .ground import GroundDefinition, geval, instantiate_definition
from .kleene import kleene_eval
from .structure import FuncTable, PartialStructure, PredTable
from .syntax import Definition, Theory
from .truth import FALSE, TRUE, UNKNOWN, TruthValue, from_bool


def well_founded_model(gdef: GroundDefinition, open_valuation) -> dict:
    """Map every defined atom key to its well-founded TruthValue.

    ``open_valuation`` resolves atom keys that are not defined by this
    definition (typically: the structure plus, in the solver, the current
    assignment).
    """
    defined = gdef.defined_keys
    rules = gdef.rules

    def lfp(fires) -> set:
        derived: set = set()
        changed = True
        while changed:
            changed = False
            for head, body in rules:
                if head not in derived and fires(body, derived):
                    derived.add(head)
                    changed = True
        return derived

    lower: set = set()
    upper: set = set(defined)
    while True:
        def lower_fires(body, grown, upper=upper):
            def val(key):
                if key in defined:
                    if key in grown:
                        return TRUE
                    if key not in upper:
                        return FALSE
                    return UNKNOWN
                return open_valuation(key)
            return geval(body, val) is TRUE

        new_lower = lfp(lower_fires)

        def upper_fires(body, grown, lower=new_lower):
            def val(key):
                if key in defined:
                    if key in lower:
                        return TRUE
                    if key in grown:
                        return UNKNOWN
                    return FALSE
                return open_valuation(key)
            return geval(body, val) is not FALSE

        new_upper = lfp(upper_fires)

        if new_lower == lower and new_upper == upper:
            break
        lower, upper = new_lower, new_upper

    out = {}
    for key in defined:
        if key in lower:
            out[key] = TRUE
        elif key in upper:
            out[key] = UNKNOWN
        else:
            out[key] = FALSE
    return out


def struct_valuation(struct: PartialStructure):
    """Resolve ground atom keys against a partial structure."""
    def val(key):
        if key[0] == "p":
            return struct.pred_value(key[1], key[2])
        _, name, args, value = key
        known = struct.func_value(name, args)
        if known is None:
            return UNKNOWN
        return from_bool(known == value)
    return val


def committed_value(struct: PartialStructure, key) -> TruthValue:
    return struct_valuation(struct)(key)


def definition_value(gdef: GroundDefinition, struct: PartialStructure) -> TruthValue:
    """Kleene value of a ground definition in a partial structure."""
    if not gdef.defined_keys:
        return TRUE
    wf = well_founded_model(gdef, struct_valuation(struct))
    resolve = struct_valuation(struct)
    if gdef.exact:
        all_match = True
        for key, w in wf.items():
            mine = resolve(key)
            if mine is UNKNOWN:
                all_match = False
            elif mine is not w:
                return FALSE
            # committed and equal: fine; committed vs unknown wf handled above
        if all_match and all(w is not UNKNOWN for w in wf.values()):
            return TRUE
        return UNKNOWN
    # opens not fully decided: the bounds are approximations, contradictions only
    for key, w in wf.items():
        mine = resolve(key)
        if mine is TRUE and w is FALSE:
            return FALSE
        if mine is FALSE and w is TRUE:
            return FALSE
    return UNKNOWN


def wf_eval_definition(defn: Definition, struct: PartialStructure):
    """Ground a definition, compute its well-founded model relative to the
    structure's interpretation of the open symbols, and return the defined
    tables together with the definition's truth value in ``struct``."""
    gdef = instantiate_definition(defn, struct, "eval")
    wf = well_founded_model(gdef, struct_valuation(struct))
    preds: dict = {}
    funcs: dict = {}
    for sym in defn.defined_symbols:
        if sym.is_predicate:
            entries = {}
            for key, v in wf.items():
                if key[0] == "p" and key[1] == sym.name:
                    entries[key[2]] = v
            preds[sym.name] = PredTable(entries, FALSE)
        else:
            entries = {}
            for key, v in wf.items():
                if key[0] == "f" and key[1] == sym.name and v is TRUE:
                    entries[key[2]] = key[3]
            funcs[sym.name] = FuncTable(entries)
    return (preds, funcs), definition_value(gdef, struct)


# ---------------------------------------------------------------------------
# Theory value

def eval_theory(theory: Theory, struct: PartialStructure) -> TruthValue:
    """True iff all sentences and definitions are true, false iff any is
    false, unknown otherwise."""
    value = TRUE
    for s in theory.sentences:
        v = kleene_eval(s, struct)
        if v is FALSE:
            return FALSE
        if v is UNKNOWN:
            value = UNKNOWN
    for d in theory.definitions:
        gdef = instantiate_definition(d, struct, "eval")
        v = definition_value(gdef, struct)
        if v is FALSE:
            return FALSE
        if v is UNKNOWN:
            value = UNKNOWN
    return value


def satisfies(struct: PartialStructure, theory: Theory) -> bool:
    """Classical satisfaction for two-valued structures."""
    return eval_theory(theory, struct) is TRUE
