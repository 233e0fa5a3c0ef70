"""JSON Schemas for the CLI's structured outputs.

Keyed by "command/action".  Commands whose documented output is a plain
string (set/collapse) or the indented tree text (ramsey/tree) have no
schema entry.
"""

_STRING_ARRAY = {"type": "array", "items": {"type": "string"}}
_INT_ARRAY = {"type": "array", "items": {"type": "integer"}}
_EDGE_ARRAY = {
    "type": "array",
    "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
}

GRAPH = {
    "type": "object",
    "required": ["nodes", "edges", "top"],
    "properties": {"nodes": _STRING_ARRAY, "edges": _EDGE_ARRAY, "top": {"type": "string"}},
}

AMODEL = {
    "type": "object",
    "required": ["structure", "standard_part", "i", "rank"],
    "properties": {
        "structure": {"type": "object"},
        "standard_part": {"type": "object"},
        "i": {"type": "object"},
        "rank": {"type": "object"},
    },
}

REPORT = {
    "type": "object",
    "required": ["pass", "violations"],
    "properties": {"pass": {"type": "boolean"}, "violations": {"type": "array"}},
}

LEVELS = {
    "type": "object",
    "required": ["K", "B", "families"],
    "properties": {
        "K": {"type": "integer"},
        "B": {"type": "array", "items": _INT_ARRAY},
        "families": {"type": "array"},
    },
}

FUNCTION = {
    "type": "object",
    "required": ["support", "table", "target"],
    "properties": {
        "support": _INT_ARRAY,
        "table": {"type": "object"},
        "target": {"type": "object"},
    },
}

VERDICT = {
    "type": "object",
    "required": ["verdict"],
    "properties": {"verdict": {"enum": ["true", "false", "undecided"]}},
}

SCHEMAS = {
    "stratify": {
        "type": "object",
        "required": ["stratified"],
        "properties": {
            "stratified": {"type": "boolean"},
            "assignment": {"type": "object", "additionalProperties": {"type": "integer"}},
            "cycle": {"type": "array", "items": {"type": "array"}},
        },
    },
    "comprehend": {
        "type": "object",
        "required": ["axiom"],
        "properties": {"axiom": {"type": "string"}},
    },
    "set/validate": {
        "type": "object",
        "required": ["extensional", "well_founded", "topped"],
        "properties": {
            "extensional": {"type": "boolean"},
            "well_founded": {"type": "boolean"},
            "topped": {"type": "boolean"},
        },
    },
    "set/iso": {
        "type": "object",
        "required": ["isomorphic"],
        "properties": {"isomorphic": {"type": "boolean"}},
    },
    "set/e": {
        "type": "object",
        "required": ["holds", "method"],
        "properties": {
            "holds": {"type": "boolean"},
            "method": {"enum": ["embedding", "collapse"]},
        },
    },
    "set/t": GRAPH,
    "set/ord": GRAPH,
    "set/decode": {
        "type": "object",
        "required": ["ordinal"],
        "properties": {"ordinal": {"type": ["integer", "null"]}},
    },
    "q/build": {
        "type": "object",
        "required": ["domain", "setness", "membership", "pairs"],
        "properties": {
            "domain": _STRING_ARRAY,
            "setness": {"type": "object", "additionalProperties": {"type": "boolean"}},
            "membership": _EDGE_ARRAY,
            "pairs": {"type": "object"},
        },
    },
    "q/audit-ext": {
        "type": "object",
        "required": ["axiom", "pass", "violations"],
        "properties": {
            "axiom": {"const": "extensionality"},
            "pass": {"type": "boolean"},
            "violations": {"type": "array"},
        },
    },
    "q/audit-pair": {
        "type": "object",
        "required": ["axiom", "pass", "violations", "cells", "injectivity_violations"],
        "properties": {
            "axiom": {"const": "pairing"},
            "pass": {"type": "boolean"},
            "violations": {"type": "array"},
            "cells": {"type": "array"},
            "injectivity_violations": {"type": "array"},
        },
    },
    "q/comprehension": {
        "type": "object",
        "required": ["witness"],
        "properties": {"witness": {"type": ["string", "null"]}},
    },
    "q/criterion1": {
        "type": "object",
        "required": ["holds"],
        "properties": {"holds": {"type": "boolean"}},
    },
    "q/code": {
        "type": "object",
        "required": ["witness"],
        "properties": {"witness": {"type": ["string", "null"]}},
    },
    "limit/compute": {
        "type": "object",
        "required": ["limit", "cocone"],
        "properties": {"limit": AMODEL, "cocone": {"type": "object"}},
    },
    "limit/check": REPORT,
    "limit/check-random": {
        "type": "object",
        "required": ["checked", "failures", "pass"],
        "properties": {
            "checked": {"type": "integer"},
            "failures": _INT_ARRAY,
            "pass": {"type": "boolean"},
        },
    },
    "limit/oracle": {
        "type": "object",
        "required": ["limit"],
        "properties": {"limit": AMODEL},
    },
    "ramsey/tree": {
        "type": "object",
        "required": ["thinned"],
        "properties": {"thinned": _INT_ARRAY},
    },
    "ramsey/levels": LEVELS,
    "ramsey/partition": {
        "type": "object",
        "required": ["certificate"],
        "properties": {
            "certificate": {
                "type": ["object", "null"],
                "properties": {
                    "m": {"type": "integer"},
                    "G": _INT_ARRAY,
                    "eta": {"type": "integer"},
                },
            },
            "verified": {"type": "boolean"},
            "insufficient": {"type": "boolean"},
        },
    },
    "ramsey/measure": {
        "type": "object",
        "required": ["measure"],
        "properties": {"measure": {"enum": [0, 1, "undefined"]}},
    },
    "ramsey/validate-tree": {"type": "object"},
    "term/eval": {"type": "object", "required": ["value"]},
    "term/equiv": VERDICT,
    "term/rel": VERDICT,
    "term/shift": FUNCTION,
    "term/support": {
        "type": "object",
        "required": ["block"],
        "properties": {"block": _INT_ARRAY},
    },
    "term/jprime": FUNCTION,
    "term/code": FUNCTION,
}
