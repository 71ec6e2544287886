"""JSON schemas (version 1) for the command-line configs."""

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

_DEFS = {
    "segment": {
        "type": "object",
        "required": ["value", "from", "to"],
        "properties": {"value": _NUM, "from": _NUM, "to": _NUM},
        "additionalProperties": False,
    },
    "curvature": {
        "type": "object",
        "required": ["kind"],
        "properties": {"kind": {"enum": ["piecewise", "bump", "smoothed"]}},
        "allOf": [
            {"if": {"properties": {"kind": {"const": "piecewise"}}},
             "then": {"required": ["segments"],
                      "properties": {"segments": {"type": "array", "minItems": 1,
                                                  "items": {"$ref": "#/$defs/segment"}}}}},
            {"if": {"properties": {"kind": {"const": "bump"}}},
             "then": {"required": ["amplitude", "from", "to"],
                      "properties": {"amplitude": _NUM, "from": _NUM, "to": _NUM,
                                     "parity": {"enum": ["even", "odd"]}}}},
            {"if": {"properties": {"kind": {"const": "smoothed"}}},
             "then": {"required": ["base", "eps", "beta"],
                      "properties": {"base": {"$ref": "#/$defs/curvature"}, "eps": _POS,
                                     "beta": _POS}}},
        ],
    },
    "potential": {
        "type": "object",
        "required": ["kind"],
        "properties": {"kind": {"enum": ["well", "triple_well", "piecewise", "curvature", "bump",
                                         "smoothed"]}},
        "allOf": [
            {"if": {"properties": {"kind": {"const": "well"}}},
             "then": {"required": ["a", "b"], "properties": {"a": _POS, "b": _POS}}},
            {"if": {"properties": {"kind": {"const": "triple_well"}}},
             "then": {"required": ["a", "b"],
                      "properties": {"a": {"type": "array", "items": _POS, "minItems": 3, "maxItems": 3},
                                     "b": {"type": "array", "items": _POS, "minItems": 3, "maxItems": 3}}}},
            {"if": {"properties": {"kind": {"const": "piecewise"}}},
             "then": {"required": ["segments"],
                      "properties": {"segments": {"type": "array", "minItems": 1,
                                                  "items": {"$ref": "#/$defs/segment"}}}}},
            {"if": {"properties": {"kind": {"const": "curvature"}}},
             "then": {"required": ["curvature"],
                      "properties": {"curvature": {"$ref": "#/$defs/curvature"}}}},
            {"if": {"properties": {"kind": {"enum": ["bump", "smoothed"]}}},
             "then": {"$ref": "#/$defs/curvature"}},
        ],
    },
    "interaction": {
        "type": "object",
        "required": ["kind"],
        "properties": {"kind": {"enum": ["resonant", "dirichlet"]}, "c1": _NUM, "c2": _NUM},
        "if": {"properties": {"kind": {"const": "resonant"}}},
        "then": {"required": ["c1", "c2"]},
    },
    "complex": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
    "eps_list": {"type": "array", "minItems": 2,
                 "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5}},
}


def _schema(properties, required=(), any_of=None):
    s = {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$defs": _DEFS,
        "type": "object",
        "required": ["schema", *required],
        "properties": {"schema": {"const": 1}, **properties},
        "additionalProperties": False,
    }
    if any_of:
        s["oneOf"] = any_of
    return s


_SOURCE = {"potential": {"$ref": "#/$defs/potential"}, "curvature": {"$ref": "#/$defs/curvature"}}
_ONE_SOURCE = [{"required": ["potential"]}, {"required": ["curvature"]}]

RESONANCE = _schema({**_SOURCE, "N": {"type": "integer", "minimum": 51},
                     "require_resonant": {"type": "boolean"}, "write_phi": {"type": "boolean"}},
                    any_of=_ONE_SOURCE)

SCAN = _schema({
    "family": {
        "type": "object",
        "required": ["kind"],
        "properties": {"kind": {"enum": ["well_depth", "well_width", "triple_well_a1", "bump_amplitude"]},
                       "a": _POS, "b": _POS, "a2": _POS, "a3": _POS,
                       "beta": {"type": "array", "items": _POS, "minItems": 3, "maxItems": 3},
                       "from": _NUM, "to": _NUM, "parity": {"enum": ["even", "odd"]}},
        "additionalProperties": False,
    },
    "range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
    "points": {"type": "integer", "minimum": 1},
    "refine": {"type": "boolean"},
    "sigma_min": {"type": "boolean"},
    "N": {"type": "integer", "minimum": 51},
    "steps": {"type": "integer", "minimum": 1000},
}, required=["family", "range", "points"])

LIMIT_OP = _schema({**_SOURCE, "N": {"type": "integer", "minimum": 51},
                    "require_resonant": {"type": "boolean"}}, any_of=_ONE_SOURCE)

_LIMIT = {"oneOf": [{"const": "auto"}, {"$ref": "#/$defs/interaction"}]}

CONVERGE_1D = _schema({
    **_SOURCE,
    "k": {"$ref": "#/$defs/complex"},
    "eps_list": {"$ref": "#/$defs/eps_list"},
    "N": {"type": "integer", "minimum": 51},
    "limit": _LIMIT,
    "controls": {"type": "boolean"},
    "require_resonant": {"type": "boolean"},
    "grid": {"type": "object", "properties": {"half_width": _POS, "step": _POS},
             "additionalProperties": False},
}, required=["eps_list"], any_of=_ONE_SOURCE)

CONVERGE_2D = _schema({
    "curvature": {"oneOf": [{"const": "default"}, {"$ref": "#/$defs/curvature"}]},
    "alpha": _POS,
    "d": _POS,
    "k": {"$ref": "#/$defs/complex"},
    "eps_list": {"$ref": "#/$defs/eps_list"},
    "grid_policy": {"type": "object",
                    "properties": {"t_per_eps": _POS, "s_points": {"type": "integer", "minimum": 3},
                                   "modes": {"type": "integer", "minimum": 1}},
                    "additionalProperties": False},
    "L_policy": {"type": "object",
                 "properties": {"decay": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                                "factor": {"type": "number", "minimum": 1}},
                 "additionalProperties": False},
    "limit": _LIMIT,
    "controls": {"type": "boolean"},
    "refine": {"type": "boolean"},
    "require_resonant": {"type": "boolean"},
}, required=["curvature", "eps_list"])

CURVE = _schema({
    "curvature": {"$ref": "#/$defs/curvature"},
    "switchback": {"type": "object", "required": ["a", "b", "x"],
                 "properties": {"a": _POS, "b": _POS,
                                "x": {"type": "array", "items": _NUM, "minItems": 1}},
                 "additionalProperties": False},
    "t_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
    "pad": {"type": "number", "minimum": 0},
    "step": _POS,
}, any_of=[{"required": ["curvature"]}, {"required": ["switchback"]}])

EVOLVE = _schema({
    "interaction": {"$ref": "#/$defs/interaction"},
    "grid": {"type": "object", "required": ["half_width", "step"],
             "properties": {"half_width": _POS, "step": _POS}, "additionalProperties": False},
    "packet": {"type": "object", "required": ["x0", "p0", "width"],
               "properties": {"x0": _NUM, "p0": _NUM, "width": _POS}, "additionalProperties": False},
    "times": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
}, required=["interaction", "grid", "packet", "times"])

SCHEMAS = {"resonance": RESONANCE, "scan": SCAN, "limit-op": LIMIT_OP, "converge-1d": CONVERGE_1D,
           "converge-2d": CONVERGE_2D, "curve": CURVE, "evolve": EVOLVE}
