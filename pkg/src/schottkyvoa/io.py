"""JSON encoding of surfaces and results.  Complex numbers are ``[re, im]`` pairs."""

import json
import numbers
import sys

import numpy as np

from ._validation import as_complex
from .schottky import SchottkySurface, validate_surface


def surface_from_dict(data):
    """Build a validated surface from ``{"genus": g, "handles": [{"w_plus", "w_minus", "rho"}]}``."""
    try:
        handles = data["handles"]
        genus = int(data.get("genus", len(handles)))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed surface description: {exc}") from exc
    if genus != len(handles):
        raise ValueError(f"genus {genus} does not match {len(handles)} handles")
    w_plus = [as_complex(h["w_plus"]) for h in handles]
    w_minus = [as_complex(h["w_minus"]) for h in handles]
    rho = [as_complex(h["rho"]) for h in handles]
    return validate_surface(w_plus, w_minus, rho)


def surface_to_dict(surface: SchottkySurface):
    handles = [
        {
            "w_plus": encode(surface.w(a)),
            "w_minus": encode(surface.w(-a)),
            "rho": encode(surface.rho_of(a)),
        }
        for a in range(1, surface.genus + 1)
    ]
    return {"genus": surface.genus, "handles": handles}


def load_surface(path):
    with open(path, encoding="utf-8") as fh:
        return surface_from_dict(json.load(fh))


def encode(obj):
    """Recursively convert complex numbers and arrays into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, numbers.Integral):
        return int(obj)
    if isinstance(obj, numbers.Real):
        return float(obj)
    if isinstance(obj, numbers.Complex):
        z = complex(obj)
        return [z.real, z.imag]
    return obj


def dumps(obj):
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(encode(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(obj, path=None):
    text = dumps(obj)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
