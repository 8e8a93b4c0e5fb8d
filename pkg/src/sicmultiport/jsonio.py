"""JSON encoding of complex vectors and matrices.

A vector or matrix is written as ``{"dim": n, "re": [...], "im": [...]}``
with entries flattened row-major.  ``n`` entries means a vector, ``n*n``
entries a square matrix.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def encode_array(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        dim = a.size
    elif a.ndim == 2 and a.shape[0] == a.shape[1]:
        dim = a.shape[0]
    else:
        raise ValueError(f"can only encode vectors and square matrices, got {a.shape}")
    flat = a.ravel()
    return {"dim": dim, "re": flat.real.tolist(), "im": flat.imag.tolist()}


def decode_array(obj: dict) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float).ravel()
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float).ravel()
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed array object: {exc}") from exc
    if re.shape != im.shape:
        raise ValueError("'re' and 'im' have different lengths")
    z = re + 1j * im
    if z.size == dim:
        return z
    if z.size == dim * dim:
        return z.reshape(dim, dim)
    raise ValueError(f"{z.size} entries is neither a {dim}-vector nor a {dim}x{dim} matrix")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path is None or str(path) == "-":
        print(text)
        return
    Path(path).write_text(text + "\n", encoding="utf-8")
