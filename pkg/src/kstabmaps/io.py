"""JSON loaders for the command-line inputs. Rationals are "p/q" strings or ints."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .errors import MissingInput, NotSemiample
from .exactmath import Q
from .fibration import FibrationData, fibration_from_split
from .intersect import IntersectionTable
from .polytope import LatticePolytope, PLConvexFunction, Polytope
from .torictc import MonomialFlagIdeal, ToricPolarisedPair, ToricTestConfiguration, from_flag_ideal


def read_json(path) -> dict:
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)


def need(data: Mapping, *keys):
    missing = [k for k in keys if k not in data]
    if missing:
        raise MissingInput(f"input is missing {', '.join(missing)}")
    return [data[k] for k in keys]


def polytope_from_json(data: Mapping) -> Polytope:
    """A LatticePolytope when every vertex is integral, else a rational Polytope."""
    (verts,) = need(data, "vertices")
    pts = [[Q(x) for x in v] for v in verts]
    d = int(data.get("ambient_dim", len(pts[0])))
    if all(x.denominator == 1 for v in pts for x in v):
        return LatticePolytope.from_points(pts, d)
    return Polytope.from_points(pts, d)


def lattice_polytope_from_json(data: Mapping) -> LatticePolytope:
    P = polytope_from_json(data)
    if not isinstance(P, LatticePolytope):
        raise ValueError("expected a lattice polytope (integral vertices)")
    return P


def tc_from_json(data: Mapping) -> ToricTestConfiguration:
    """Either explicit (pl_function, R, exponent) or a flag ideal with exponent r."""
    (poly,) = need(data, "polytope")
    P = lattice_polytope_from_json(poly)
    twist = polytope_from_json(data["twist_polytope"]) if data.get("twist_polytope") else None
    pair = ToricPolarisedPair(P, twist)
    if "flag_ideal" in data:
        ideal = MonomialFlagIdeal.from_json(data["flag_ideal"])
        r = data.get("r", 1)
        if r == "auto":
            return _first_semiample(pair, ideal, int(data.get("r_cap", 12)))
        return from_flag_ideal(pair, ideal, int(r))
    f, R = need(data, "pl_function", "R")
    return ToricTestConfiguration(pair, PLConvexFunction.from_json(f), Q(R), int(data.get("exponent", 1)))


def _first_semiample(pair, ideal, r_cap: int) -> ToricTestConfiguration:
    for r in range(1, r_cap + 1):
        try:
            return from_flag_ideal(pair, ideal, r)
        except NotSemiample:
            continue
    raise NotSemiample(f"rL - E is not semi-ample for any r <= {r_cap}")


def table_from_json(data: Mapping) -> IntersectionTable:
    return IntersectionTable.from_json(data)


def _split_rows(rows) -> dict:
    """[{"L": d, "K": e, "value": v}] -> {(d, e): v}."""
    return {(int(r.get("L", 0)), int(r.get("K", 0))): Q(r["value"]) for r in rows}


def fibration_from_json(data: Mapping) -> FibrationData:
    """Explicit tables, or a Kunneth split {"split": {...}}."""
    if "split" in data:
        sp = data["split"]
        base_x, base_tc, b, fibre, fdim = need(sp, "base_x", "base_tc", "b", "fibre", "fibre_dim")
        fib = {int(k): Q(v) for k, v in fibre.items()}
        return fibration_from_split(_split_rows(base_x), _split_rows(base_tc), int(b), fib, int(fdim))
    n, b, V, mu, xt, tt = need(data, "n", "b", "V", "mu_fibre", "x_table", "tc_table")
    return FibrationData(int(n), int(b), Q(V), Q(mu), table_from_json(xt), table_from_json(tt))
