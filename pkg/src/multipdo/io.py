"""File formats: gridfn sample files, coefficient tables and report outputs.

gridfn layout: one JSON header line (UTF-8, sorted keys, terminated by a
newline) followed by the samples as interleaved little-endian float64
(re, im) pairs in row-major order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ContractError, ValidationError
from .grid import GridFunction, GridSpec

FORMAT_TAG = "gridfn/1"


def encode_gridfn(f: GridFunction) -> bytes:
    spec = f.spec
    header = {"format": FORMAT_TAG, "n": spec.n, "points_per_dim": spec.points_per_dim,
              "period": spec.period, "scale": spec.scale, "domain_tag": f.domain,
              "dtype": "<f8", "layout": "interleaved"}
    data = np.ascontiguousarray(f.samples, dtype="<c16").view("<f8")
    return json.dumps(header, sort_keys=True).encode("utf-8") + b"\n" + data.tobytes()


def decode_gridfn(blob: bytes) -> GridFunction:
    cut = blob.find(b"\n")
    if cut < 0:
        raise ValidationError("gridfn file has no header line", "input")
    try:
        header = json.loads(blob[:cut].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"unreadable gridfn header: {exc}", "input") from exc
    if header.get("format", FORMAT_TAG) != FORMAT_TAG:
        raise ValidationError(f"unsupported format {header.get('format')!r}", "format")
    for key in ("n", "points_per_dim", "period", "domain_tag"):
        if key not in header:
            raise ValidationError(f"gridfn header lacks {key!r}", key)
    n, P = int(header["n"]), int(header["points_per_dim"])
    scale = float(header.get("scale", header["period"] / (2 * math.pi)))
    if not math.isclose(2 * math.pi * scale, float(header["period"]), rel_tol=1e-12):
        raise ValidationError("period and scale disagree", "period")
    spec = GridSpec(n, P, scale)
    raw = np.frombuffer(blob[cut + 1:], dtype="<f8")
    if raw.size != 2 * spec.size:
        raise ValidationError(f"expected {2 * spec.size} float64 values, found {raw.size}", "input")
    samples = raw.view("<c16").reshape(spec.shape)
    return GridFunction(spec, samples, header["domain_tag"])


def save_gridfn(f: GridFunction, path) -> None:
    Path(path).write_bytes(encode_gridfn(f))


def load_gridfn(path) -> GridFunction:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"no such gridfn file: {p}", "input")
    return decode_gridfn(p.read_bytes())


# --- coefficient tables ----------------------------------------------------

def coefficients_to_csv(members: np.ndarray, coefficients: np.ndarray) -> str:
    """Rows mu_1_1,...,mu_N_n,re,im for a lattice-sum coefficient table."""
    mem = np.asarray(members, dtype=np.int64)
    K = len(mem)
    flat = mem.reshape(K, -1)
    c = np.asarray(coefficients, dtype=complex).reshape(-1)
    if len(c) != K:
        raise ContractError("one coefficient per member is required", "coefficients")
    N, n = (mem.shape[1], mem.shape[2]) if mem.ndim == 3 else (flat.shape[1], 1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"mu_{j + 1}_{i + 1}" for j in range(N) for i in range(n)] + ["re", "im"])
    for row, v in zip(flat, c):
        w.writerow([int(t) for t in row] + [repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def coefficients_from_csv(text: str, N: int, n: int = 1) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValidationError("empty coefficient table", "coefficients")
    head, body = rows[0], rows[1:]
    if len(head) != N * n + 2 or head[-2:] != ["re", "im"]:
        raise ValidationError(f"coefficient table header must have {N * n} mu columns then re, im",
                              "coefficients")
    mem = np.array([[int(v) for v in r[:-2]] for r in body], dtype=np.int64).reshape(-1, N, n)
    c = np.array([complex(float(r[-2]), float(r[-1])) for r in body], dtype=complex)
    return mem, c


# --- reports ---------------------------------------------------------------

def write_report(report, out) -> list[Path]:
    """CSV data at ``out`` and the JSON metadata at the same path with suffix .json."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_csv(), encoding="utf-8")
    side = out.with_suffix(".json")
    side.write_text(report.to_json(), encoding="utf-8")
    return [out, side]


def read_json(path, field: str = "config") -> dict:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"no such file: {p}", field)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p} is not valid JSON: {exc}", field) from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{p} must hold a JSON object", field)
    return data
