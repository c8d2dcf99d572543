"""File formats: polynomial and model documents (JSON), packed truth
tables, labelled datasets and CSV reports."""

import csv
import json
from pathlib import Path
from typing import Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .hermite import HermiteExpansion
from .learner import RegressionModel
from .poly import MultilinearPoly, TruthTable, mask_of, vars_of

PathLike = Union[str, Path]
Poly = Union[MultilinearPoly, HermiteExpansion]


# ---------------------------------------------------------------- polynomials


def poly_to_dict(p: Poly) -> dict:
    if isinstance(p, MultilinearPoly):
        terms = [{"vars": list(vars_of(m)), "coeff": c} for m, c in _monomial_order(p)]
        return {"n": p.n, "basis": "monomial", "terms": terms}
    terms = [{"index": list(p.full_index(S)), "coeff": c} for S, c in p.coeffs.items()]
    return {"n": p.n, "basis": "hermite", "terms": terms}


def _monomial_order(p: MultilinearPoly):
    return sorted(p.coeffs.items(), key=lambda mc: (bin(mc[0]).count("1"), vars_of(mc[0])))


def poly_from_dict(doc: Mapping) -> Poly:
    try:
        n = int(doc["n"])
        basis = doc.get("basis", "monomial")
        terms = doc["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed polynomial document: {exc}") from None
    if basis == "monomial":
        coeffs = {}
        for k, t in enumerate(terms):
            vs = [int(v) for v in t["vars"]]
            if vs != sorted(set(vs)):
                raise ValueError(f"terms[{k}].vars must be strictly ascending, got {vs}")
            m = mask_of(vs)
            if m in coeffs:
                raise ValueError(f"terms[{k}] duplicates monomial {vs}")
            coeffs[m] = float(t["coeff"])
        return MultilinearPoly(n, coeffs)
    if basis == "hermite":
        coeffs = {}
        for k, t in enumerate(terms):
            S = tuple(int(s) for s in t["index"])
            if S in coeffs:
                raise ValueError(f"terms[{k}] duplicates multi-index {list(S)}")
            coeffs[S] = float(t["coeff"])
        return HermiteExpansion(n, coeffs)
    raise ValueError(f"unknown basis {basis!r}")


def save_poly(p: Poly, path: PathLike) -> None:
    Path(path).write_text(json.dumps(poly_to_dict(p), indent=2) + "\n")


def load_poly(path: PathLike) -> Poly:
    return poly_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- models


def model_to_dict(model: RegressionModel) -> dict:
    if model.basis == "multilinear":
        terms = [{"vars": list(S), "coeff": w} for S, w in model.weights.items()]
        basis = "monomial"
    else:
        terms = [{"index": list(S), "coeff": w} for S, w in model.weights.items()]
        basis = "hermite"
    return {
        "n": model.n, "basis": basis, "terms": terms,
        "degree": model.degree, "threshold": model.threshold, "objective": model.objective,
    }


def model_from_dict(doc: Mapping) -> RegressionModel:
    basis = "multilinear" if doc.get("basis", "monomial") == "monomial" else "hermite"
    key = "vars" if basis == "multilinear" else "index"
    weights = {tuple(int(v) for v in t[key]): float(t["coeff"]) for t in doc["terms"]}
    return RegressionModel(
        int(doc["n"]), int(doc["degree"]), basis, weights,
        float(doc["threshold"]), doc.get("objective"),
    )


def save_model(model: RegressionModel, path: PathLike) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path: PathLike) -> RegressionModel:
    return model_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- truth tables


def table_to_dict(t: TruthTable) -> dict:
    """Bit i of the packed string is 1 where ``f = -1`` at table index i."""
    packed = np.packbits(t.values < 0, bitorder="little")
    return {"n": t.n, "bits": packed.tobytes().hex()}


def table_from_dict(doc: Mapping) -> TruthTable:
    n = int(doc["n"])
    raw = np.frombuffer(bytes.fromhex(doc["bits"]), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")
    if bits.size < (1 << n):
        raise ValueError(f"bitstring too short for n = {n}")
    return TruthTable(n, np.where(bits[: 1 << n], -1, 1).astype(np.int8))


def save_table(t: TruthTable, path: PathLike) -> None:
    Path(path).write_text(json.dumps(table_to_dict(t)) + "\n")


def load_table(path: PathLike) -> TruthTable:
    return table_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- datasets


def save_dataset(X: np.ndarray, y: np.ndarray, path: PathLike, delimiter: str = ",") -> None:
    """One sample per line, features then the +-1 label."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        for row, label in zip(np.asarray(X), np.asarray(y)):
            w.writerow([_fmt(v) for v in row] + [int(label)])


def load_dataset(path: PathLike, delimiter: str = ",") -> Tuple[np.ndarray, np.ndarray]:
    rows = []
    with open(path, newline="") as fh:
        for k, row in enumerate(csv.reader(fh, delimiter=delimiter)):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}:{k + 1}: non-numeric entry") from None
    if not rows:
        raise ValueError(f"{path}: dataset is empty")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ValueError(f"{path}: rows have differing lengths {sorted(width)}")
    data = np.array(rows)
    return data[:, :-1], data[:, -1].astype(np.int8)


def _fmt(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


# ---------------------------------------------------------------- reports


def write_csv(path: PathLike, rows: Sequence[Mapping], columns: Sequence[str] = None) -> None:
    columns = list(columns) if columns else _columns(rows)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k)) for k in columns})


def _columns(rows: Iterable[Mapping]) -> List[str]:
    out: List[str] = []
    for row in rows:
        for k in row:
            if k not in out:
                out.append(k)
    return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v
