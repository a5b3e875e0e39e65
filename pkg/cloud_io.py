"""
cloud_io.py - Point cloud input/output

Provides:
- ingest: CSV (headerless, comma-separated) or JSON {"points": [...]}
- synthesize: seeded uniform clouds inside a generator's domain
- write_csv / write_json_document / read_diagram helpers
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from divergence import Generator, GeneratorKind, PointCloud
from errors import ParseError
from models.diagram import PersistenceDiagram

logger = logging.getLogger("bregman_tda.io")

PathLike = Union[str, Path]

# Sampling boxes chosen so every point sits well inside the domain
SYNTH_BOXES = {
    GeneratorKind.SQ_EUCLIDEAN_HALF: (0.0, 1.0),
    GeneratorKind.SHANNON: (0.1, 1.0),
    GeneratorKind.BURG: (0.5, 2.0),
    GeneratorKind.EXPONENTIAL: (-0.5, 0.5),
    GeneratorKind.BURG_CONJUGATE: (-2.0, -0.5),
    GeneratorKind.LOG_PARTITION: (-1.0, 1.0),
}


def _parse_float(text: str, line: int, column: int) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise ParseError(f"Line {line}: field {column + 1} is not a number: {text!r}",
                         line=line, column=column)
    return value


def _read_csv(path: Path) -> List[List[float]]:
    rows: List[List[float]] = []
    width = None
    with open(path, 'r', encoding='utf-8', newline='') as handle:
        for line, fields in enumerate(csv.reader(handle), start=1):
            if not fields or all(not f.strip() for f in fields):
                raise ParseError(f"Line {line} is empty", line=line)
            row = [_parse_float(f, line, c) for c, f in enumerate(fields)]
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(f"Line {line} has {len(row)} fields, expected {width}",
                                 line=line)
            rows.append(row)
    return rows


def _read_json(path: Path) -> List[List[float]]:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Invalid JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(data, dict) or not isinstance(data.get('points'), list):
        raise ParseError('JSON input must be an object with a "points" list', line=1)
    rows: List[List[float]] = []
    width = None
    for line, item in enumerate(data['points'], start=1):
        if not isinstance(item, list) or not item:
            raise ParseError(f"Row {line} is not a nonempty list", line=line)
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in item):
            raise ParseError(f"Row {line} contains a non-numeric value", line=line)
        if width is None:
            width = len(item)
        elif len(item) != width:
            raise ParseError(f"Row {line} has {len(item)} values, expected {width}",
                             line=line)
        rows.append([float(v) for v in item])
    return rows


def read_rows(path: PathLike) -> List[List[float]]:
    """Rectangular, nonempty list of numeric rows from CSV or JSON"""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"Input file not found: {path}", line=0)
    if path.suffix.lower() == '.json':
        rows = _read_json(path)
    else:
        rows = _read_csv(path)
    if not rows:
        raise ParseError(f"No points in {path}", line=0)
    return rows


def input_dimension(path: PathLike) -> int:
    """Coordinate count of the first row, used to size the generator before ingest"""
    return len(read_rows(path)[0])


def ingest(path: PathLike, gen: Generator) -> PointCloud:
    """Read and validate a point cloud; row numbers start at 1"""
    rows = read_rows(path)
    if len(rows[0]) != gen.dimension:
        raise ParseError(
            f"Points have {len(rows[0])} coordinates, expected {gen.dimension}", line=1)
    cloud = PointCloud.from_rows(gen, rows, first_line=1)
    logger.info("Read %d points in dimension %d from %s", len(cloud), cloud.n, path)
    return cloud


def synthesize(gen: Generator, num_points: int, seed: int) -> np.ndarray:
    """Seeded uniform sample inside the domain (Dirichlet on the open simplex)"""
    if num_points < 1:
        raise ValueError(f"num_points must be positive, got {num_points}")
    rng = np.random.default_rng(seed)
    n = gen.dimension
    if gen.kind is GeneratorKind.SIMPLEX_SHANNON:
        return rng.dirichlet(np.ones(n + 1), size=num_points)[:, :n]
    low, high = SYNTH_BOXES[gen.kind]
    return rng.uniform(low, high, size=(num_points, n))


def write_csv(path: PathLike, points: np.ndarray) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        for row in points:
            writer.writerow([repr(float(v)) for v in row])


def write_json_document(path: PathLike, document: Dict[str, Any]) -> None:
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2)
        handle.write('\n')


def read_diagram(path: PathLike) -> PersistenceDiagram:
    """Diagram from a run output document or a bare diagram list"""
    with open(path, 'r', encoding='utf-8') as handle:
        data = json.load(handle)
    items = data['diagram'] if isinstance(data, dict) else data
    return PersistenceDiagram.from_list(items)
