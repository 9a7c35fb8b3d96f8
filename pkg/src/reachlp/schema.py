"""JSON schemas for input problem files and solve/compare output files."""

_number = {"type": "number"}
_vector = {"type": "array", "items": _number, "minItems": 1}
_matrix = {"type": "array", "items": _vector, "minItems": 1}
_nullable_number = {"type": ["number", "null"]}

CONTROL_SET_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": "box"}, "lo": _vector, "hi": _vector},
            "required": ["type", "lo", "hi"],
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "ball"},
                "center": _vector,
                "radius": {"type": "number", "minimum": 0},
            },
            "required": ["type", "center", "radius"],
        },
        {
            "type": "object",
            "properties": {"type": {"const": "vertices"}, "points": _matrix},
            "required": ["type", "points"],
        },
    ]
}

NORMALS_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": "uniform2d"}, "count": {"type": "integer", "minimum": 1}},
            "required": ["type", "count"],
        },
        {
            "type": "object",
            "properties": {"type": {"const": "icosphere"}, "level": {"type": "integer", "minimum": 0}},
            "required": ["type", "level"],
        },
        {
            "type": "object",
            "properties": {"type": {"const": "axis"}},
            "required": ["type"],
        },
        {
            "type": "object",
            "properties": {"type": {"const": "explicit"}, "rows": _matrix},
            "required": ["type", "rows"],
        },
    ]
}

SYSTEM_SCHEMA = {
    "type": "object",
    "properties": {"C": _matrix, "D": _matrix, "U": CONTROL_SET_SCHEMA},
    "required": ["C", "D", "U"],
}

INPUT_SCHEMA = {
    "type": "object",
    "properties": {
        "C": _matrix,
        "D": _matrix,
        "U": CONTROL_SET_SCHEMA,
        "normals": NORMALS_SCHEMA,
        "ell": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "epsilon": {"type": "number", "minimum": 0},
        "eps_sweep": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "tolerances": {
            "type": "object",
            "properties": {
                "feas": {"type": "number", "exclusiveMinimum": 0},
                "gap": {"type": "number", "exclusiveMinimum": 0},
                "iter": {"type": "number", "exclusiveMinimum": 0},
                "compare": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer"},
        "kappa_samples": {"type": "integer", "minimum": 1},
        "max_iter": {"type": "integer", "minimum": 1},
    },
    "required": ["C", "D", "U"],
}

OUTPUT_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"type": "string"},
        "b_star": _vector,
        "epsilon": {"type": "number", "minimum": 0},
        # margins are null where the polytope is empty and support is undefined
        "margins": {"type": "array", "items": _nullable_number, "minItems": 1},
        "residuals": _vector,
        "vertices": {"type": "array", "items": _vector},
        "ell": {"type": "number"},
        "constants": {
            "type": "object",
            "properties": {"c_2ell": _number, "c_ell2": _number},
            "required": ["c_2ell", "c_ell2"],
        },
        "kappa_estimate": _number,
        "assumption2": {
            "type": "object",
            "properties": {"holds": {"type": "boolean"}, "margin": _number},
            "required": ["holds", "margin"],
        },
        "hausdorff_certificate": _nullable_number,
        "oracle": {
            "type": ["object", "null"],
            "properties": {"series": _vector, "b_hat": _vector, "max_gap": _number},
            "required": ["series", "b_hat", "max_gap"],
        },
        "timings_ms": {"type": "object", "additionalProperties": _number},
        "normals": _matrix,
        "system": SYSTEM_SCHEMA,
        "certificates": {"type": "object", "additionalProperties": {"type": "boolean"}},
    },
    "required": [
        "b_star",
        "epsilon",
        "margins",
        "residuals",
        "vertices",
        "ell",
        "constants",
        "kappa_estimate",
        "assumption2",
        "hausdorff_certificate",
        "oracle",
        "timings_ms",
    ],
}
