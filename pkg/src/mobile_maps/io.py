"""Reading and writing trees, paths, maps, laws, matrices and reports."""

import csv
from fractions import Fraction
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np

from .distribution import FiniteDistribution
from .errors import DomainError, InvalidMapError
from .harness import TestReport
from .laws import MobileParams
from .maps import HalfEdgeMap
from .metrics import SnakeSample
from .tree_core import LabeledTypedTree, PathFunction

_logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _number(x) -> Union[int, str]:
    x = Fraction(x)
    return int(x) if x.denominator == 1 else str(x)


# -- trees -----------------------------------------------------------------------------


def tree_to_dict(t: LabeledTypedTree) -> Dict[str, List]:
    return {
        "types": list(t.types),
        "children": list(t.children),
        "disp2": [_number(x) for x in t.disp2[1:]],
    }


def tree_from_dict(data: Dict[str, Any]) -> LabeledTypedTree:
    for key in ("types", "children"):
        if key not in data:
            raise DomainError(f"tree JSON lacks {key!r}")
    disp2 = [Fraction(x) if isinstance(x, str) else x for x in data.get("disp2", [])]
    disp2 = [
        int(x) if isinstance(x, Fraction) and x.denominator == 1 else x for x in disp2
    ]
    return LabeledTypedTree(data["types"], data["children"], tuple(disp2))


def write_tree(t: LabeledTypedTree, path: PathLike) -> None:
    with open(path, "w") as f:
        json.dump(tree_to_dict(t), f)


def read_tree(path: PathLike) -> LabeledTypedTree:
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DomainError(f"{path}: line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise DomainError(f"{path}: a tree is a JSON object")
    return tree_from_dict(data)


# -- path functions --------------------------------------------------------------------


def write_path_function(p: PathFunction, path: PathLike) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["s", "value"])
        for s, v in zip(p.grid, p.values):
            writer.writerow([repr(float(s)), repr(float(v))])


def _read_rows(path: PathLike, header: Sequence[str]) -> List[List[str]]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise DomainError(f"{path}: line 1: expected header {','.join(header)}")
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DomainError(f"{path}: line {lineno}: expected {len(header)} columns")
    return rows[1:]


def _floats(path: PathLike, rows: List[List[str]]) -> np.ndarray:
    out = np.empty((len(rows), len(rows[0]) if rows else 0))
    for i, row in enumerate(rows):
        try:
            out[i] = [float(c) for c in row]
        except ValueError as e:
            raise DomainError(f"{path}: line {i + 2}: {e}") from e
    return out


def read_path_function(path: PathLike) -> PathFunction:
    values = _floats(path, _read_rows(path, ("s", "value")))
    if len(values) < 2:
        raise DomainError(f"{path}: a path function needs at least two rows")
    return PathFunction(values[:, 1])


def write_snake(sample: SnakeSample, path: PathLike) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["e", "Z"])
        for e, z in zip(sample.e.values, sample.Z.values):
            writer.writerow([repr(float(e)), repr(float(z))])


def read_snake(path: PathLike) -> SnakeSample:
    values = _floats(path, _read_rows(path, ("e", "Z")))
    if len(values) < 2:
        raise DomainError(f"{path}: a snake needs at least two rows")
    return SnakeSample(
        PathFunction(values[:, 0], excursion=True), PathFunction(values[:, 1])
    )


# -- maps ------------------------------------------------------------------------------


def format_map(m: HalfEdgeMap) -> str:
    return "\n".join(
        [
            f"E {m.num_edges}",
            " ".join(["alpha", *map(str, m.alpha)]),
            " ".join(["rot", *map(str, m.sigma)]),
            f"root {-1 if m.root is None else m.root}",
            f"point {-1 if m.point is None else m.point}",
        ]
    ) + "\n"


def parse_map(text: str) -> HalfEdgeMap:
    fields: Dict[str, List[int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        key = parts[0]
        if key not in ("E", "alpha", "rot", "root", "point"):
            raise InvalidMapError(f"line {lineno}: unknown record {key!r}")
        try:
            fields[key] = [int(x) for x in parts[1:]]
        except ValueError as e:
            raise InvalidMapError(f"line {lineno}: {e}") from e
    for key in ("E", "alpha", "rot", "root", "point"):
        if key not in fields:
            raise InvalidMapError(f"missing {key!r} line")
    edges = fields["E"][0] if fields["E"] else -1
    if len(fields["alpha"]) != 2 * edges or len(fields["rot"]) != 2 * edges:
        raise InvalidMapError(
            f"'alpha' and 'rot' need {2 * edges} entries for E {edges}"
        )
    root = fields["root"][0] if fields["root"] else -1
    point = fields["point"][0] if fields["point"] else -1
    return HalfEdgeMap(
        tuple(fields["alpha"]),
        tuple(fields["rot"]),
        None if root < 0 else root,
        None if point < 0 else point,
    )


def write_map(m: HalfEdgeMap, path: PathLike) -> None:
    Path(path).write_text(format_map(m))


def read_map(path: PathLike) -> HalfEdgeMap:
    return parse_map(Path(path).read_text())


# -- laws, matrices, parameters, reports -----------------------------------------------


def outcome_key(outcome) -> str:
    if isinstance(outcome, LabeledTypedTree):
        return outcome.canonical_key()
    if isinstance(outcome, tuple):
        return " ".join(str(x) for x in outcome)
    return str(outcome)


def write_distribution(law: FiniteDistribution, path: PathLike) -> None:
    rows = sorted((outcome_key(k), w) for k, w in law.items())
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["key", "numerator", "denominator"])
        for key, w in rows:
            writer.writerow([key, w.numerator, w.denominator])


def read_distribution(path: PathLike) -> FiniteDistribution:
    weights = {}
    rows = _read_rows(path, ("key", "numerator", "denominator"))
    for lineno, (key, num, den) in enumerate(rows, start=2):
        try:
            weights[key] = Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError) as e:
            raise DomainError(f"{path}: line {lineno}: {e}") from e
    return FiniteDistribution(weights)


def write_matrix(matrix: np.ndarray, path: PathLike) -> None:
    with open(path, "w", newline="") as f:
        csv.writer(f).writerows(
            [[repr(float(x)) for x in row] for row in np.asarray(matrix)]
        )


def read_matrix(path: PathLike) -> np.ndarray:
    with open(path, newline="") as f:
        rows = [row for row in csv.reader(f) if row]
    if any(len(row) != len(rows) for row in rows):
        raise DomainError(f"{path}: a distance matrix must be square")
    return _floats_plain(path, rows)


def _floats_plain(path: PathLike, rows: List[List[str]]) -> np.ndarray:
    try:
        return np.asarray([[float(c) for c in row] for row in rows])
    except ValueError as e:
        raise DomainError(f"{path}: {e}") from e


def write_params(params: MobileParams, path: PathLike) -> None:
    with open(path, "w") as f:
        json.dump(params.to_dict(), f, indent=2)


def read_params(path: PathLike) -> MobileParams:
    with open(path) as f:
        return MobileParams.from_dict(json.load(f))


def write_reports(reports: Iterable[TestReport], path: PathLike) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump([r.to_dict() for r in reports], f, indent=2, default=str)
    _logger.info("wrote reports to %s", path)


def read_reports(path: PathLike) -> List[TestReport]:
    with open(path) as f:
        data = json.load(f)
    if isinstance(data, dict):
        data = [data]
    return [TestReport.from_dict(d) for d in data]
