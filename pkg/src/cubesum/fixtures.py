"""Shipped record data: rank tables, point lists and integral solutions.

The data file carries a sha256 digest of its own canonical body so that an
edit to any transcribed constant is caught before it is trusted.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .arith import CubefreeK
from .curves import CurveModel, CurvePoint, Form, convert, minimal_model, parse_fraction

DATA_FILE = "records.json"


class FixtureError(ValueError):
    pass


@dataclass(frozen=True)
class TableRow:
    rank: int
    k: int
    factors: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PointList:
    k: int
    rank: int
    a3: int
    a6: int
    points: tuple[tuple[str, str], ...]

    def raw_points(self) -> list[tuple]:
        return [(parse_fraction(x), parse_fraction(y)) for x, y in self.points]

    def curve_points(self) -> list[CurvePoint]:
        model = minimal_model(self.k)
        return [model.point(x, y) for x, y in self.raw_points()]


@dataclass(frozen=True)
class IntegralSolutions:
    k: int
    pairs: tuple[tuple[int, int], ...]
    corrections: tuple[dict, ...]

    def curve_points(self) -> list[CurvePoint]:
        """The solutions as points on the minimal model of E'_k."""
        cubic = CurveModel.make(self.k, Form.CUBIC_EKPRIME)
        target = minimal_model(self.k).form
        return [convert(cubic.point(u, v), target) for u, v in self.pairs]


def canonical_digest(body: dict) -> str:
    blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@lru_cache(maxsize=1)
def raw_data() -> dict:
    text = resources.files("cubesum.data").joinpath(DATA_FILE).read_text()
    data = json.loads(text)
    check = data.pop("checksum", None)
    if check is None or check.get("algorithm") != "sha256":
        raise FixtureError("fixture file has no sha256 checksum")
    if canonical_digest(data) != check["digest"]:
        raise FixtureError("fixture checksum mismatch: the data file was edited")
    return data


def _rows(items) -> list[TableRow]:
    out = []
    for item in items:
        factors = tuple((int(p), int(e)) for p, e in item["factors"])
        row = TableRow(int(item["rank"]), int(item["k"]), factors)
        prod = 1
        for p, e in factors:
            prod *= p**e
        if prod != row.k:
            raise FixtureError(f"factorization of {row.k} does not multiply out")
        out.append(row)
    return out


def minimal_k_table() -> list[TableRow]:
    return _rows(raw_data()["minimal_k"])


def minimal_conductor_table() -> list[TableRow]:
    return _rows(raw_data()["minimal_conductor"])


def point_lists() -> list[PointList]:
    out = []
    for item in raw_data()["point_lists"]:
        model = item["model"]
        pts = tuple((p["x"], p["y"]) for p in item["points"])
        out.append(PointList(int(item["k"]), int(item["rank"]), int(model["a3"]), int(model["a6"]), pts))
    return out


def integral_solutions() -> IntegralSolutions:
    item = raw_data()["integral_solutions"]
    pairs = tuple((int(u), int(v)) for u, v in item["pairs"])
    return IntegralSolutions(int(item["k"]), pairs, tuple(item.get("corrections", ())))


def cubefree(row: TableRow) -> CubefreeK:
    return CubefreeK(row.k, row.factors)


__all__ = [
    "FixtureError", "IntegralSolutions", "PointList", "TableRow", "canonical_digest", "cubefree",
    "integral_solutions", "minimal_conductor_table", "minimal_k_table", "point_lists", "raw_data",
]
