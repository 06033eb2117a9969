"""JSON-friendly encoding of complex matrices and floats.

Complex numbers are serialized as two-element ``[re, im]`` lists; matrices as
nested lists of such pairs.  Floats destined for text output are rendered
with 17 significant digits so that values round-trip exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError


def format_float(x: float) -> str:
    return "%.17g" % float(x)


def complex_to_pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(obj, where: str = "value") -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if (
        isinstance(obj, (list, tuple))
        and len(obj) == 2
        and all(isinstance(c, (int, float)) for c in obj)
    ):
        return complex(obj[0], obj[1])
    raise ParseError(f"{where}: expected a number or an [re, im] pair, got {obj!r}")


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_pair(z) for z in row] for row in m]


def matrix_from_json(rows, where: str = "matrix") -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ParseError(f"{where}: expected a non-empty list of rows")
    width = None
    parsed = []
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)):
            raise ParseError(f"{where}: row {i} is not a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(
                f"{where}: row {i} has length {len(row)}, expected {width}"
            )
        parsed.append([pair_to_complex(c, f"{where}[{i}]") for c in row])
    return np.array(parsed, dtype=complex)


def vector_from_json(entries, where: str = "vector") -> np.ndarray:
    if not isinstance(entries, (list, tuple)) or not entries:
        raise ParseError(f"{where}: expected a non-empty list")
    return np.array([pair_to_complex(c, where) for c in entries], dtype=complex)
