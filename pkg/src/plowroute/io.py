"""JSON and text serialization for instances, routes, and related objects.

File formats
------------

Instance (JSON)::

    {
      "kind": "tree",
      "vertices": ["d", "a", "b"],
      "edges": [{"u": "d", "v": "a", "alpha": "3/2", "priority": 1,
                 "material": "salt"}, ...],
      "depot": "d",
      "z": 1,
      "params": {
        "L": "20", "c": "1/2",
        "t": {"1": ["1", "1/2"]},
        "f": {"d>a": 2, "a>d": 2, ...},
        "capacity_semantics": "traversed"
      },
      "g": {"d>a#1": 4, ...}        # optional, walk-recurrence instances
    }

Rationals are written as "p/q" strings (or plain integers).  Arcs are
"tail>head" strings.  The optional "g" block keys per-edge step bounds
by canonical edge arc and 1-based occurrence index.

Route (text): one "tail>head" arc per line, in walk order.

Necklace (JSON): {"k": 2, "colors": [1, 2, 1, 2]}.

Tree decomposition (JSON)::

    {"root": "n0",
     "nodes": [{"id": "n0", "kind": "bag", "bag": ["a", "b"],
                "children": ["n1"]}, ...]}

``kind`` is "bag" for plain decompositions; canonical decompositions
use "leaf" / "introduce" / "forget" / "join".
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .model import (
    Arc,
    CapacitySemantics,
    EdgeKey,
    InputError,
    PriorityLimits,
    RoadEdge,
    RoadInstance,
    ServiceParams,
    VehicleRoute,
    edge_key,
)

# ---------------------------------------------------------------------------
# rationals
# ---------------------------------------------------------------------------


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not a rational: {value!r} (floats are not accepted)")


def format_rational(value: Fraction) -> Any:
    value = Fraction(value)
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


def instance_from_dict(data: Mapping[str, Any]) -> RoadInstance:
    try:
        kind = data["kind"]
        vertices = list(data["vertices"])
        raw_edges = data["edges"]
        depot = data["depot"]
    except KeyError as exc:
        raise InputError(f"instance is missing field {exc.args[0]!r}") from None
    edges = []
    for raw in raw_edges:
        try:
            edges.append(
                RoadEdge(
                    u=raw["u"],
                    v=raw["v"],
                    alpha=parse_rational(raw["alpha"]),
                    priority=int(raw.get("priority", 1)),
                    material=raw.get("material"),
                )
            )
        except KeyError as exc:
            raise InputError(f"edge is missing field {exc.args[0]!r}") from None
    return RoadInstance(
        kind=kind,
        vertices=vertices,
        edges=edges,
        depot=depot,
        z=int(data.get("z", 1)),
    )


def instance_to_dict(instance: RoadInstance) -> Dict[str, Any]:
    edges = []
    for e in instance.edges:
        item: Dict[str, Any] = {
            "u": e.u,
            "v": e.v,
            "alpha": format_rational(e.alpha),
            "priority": e.priority,
        }
        if e.material is not None:
            item["material"] = e.material
        edges.append(item)
    return {
        "kind": instance.kind,
        "vertices": list(instance.vertices),
        "edges": edges,
        "depot": instance.depot,
        "z": instance.z,
    }


def params_from_dict(data: Mapping[str, Any]) -> ServiceParams:
    try:
        L = parse_rational(data["L"])
        c = parse_rational(data["c"])
        raw_t = data["t"]
        raw_f = data["f"]
    except KeyError as exc:
        raise InputError(f"params are missing field {exc.args[0]!r}") from None
    table = {}
    for level, row in raw_t.items():
        if not isinstance(row, (list, tuple)):
            raise InputError(f"recurrence row for priority {level} must be an array")
        table[int(level)] = tuple(parse_rational(x) for x in row)
    f = {Arc.parse(k): int(v) for k, v in raw_f.items()}
    semantics = CapacitySemantics(data.get("capacity_semantics", "traversed"))
    return ServiceParams(L=L, c=c, t=PriorityLimits(table), f=f, capacity_semantics=semantics)


def params_to_dict(params: ServiceParams) -> Dict[str, Any]:
    return {
        "L": format_rational(params.L),
        "c": format_rational(params.c),
        "t": {
            str(level): [format_rational(x) for x in row]
            for level, row in params.t.table.items()
        },
        "f": {str(arc): limit for arc, limit in sorted(params.f.items())},
        "capacity_semantics": params.capacity_semantics.value,
    }


def _canonical_arc(key: EdgeKey) -> str:
    return f"{key[0]}>{key[1]}"


def step_bounds_from_dict(raw: Mapping[str, Any]) -> Dict[Tuple[EdgeKey, int], int]:
    """Parse the "g" block: "u>v#y" -> integer step bound."""
    out: Dict[Tuple[EdgeKey, int], int] = {}
    for text, bound in raw.items():
        arc_part, sep, idx_part = text.partition("#")
        if not sep:
            raise InputError(f"malformed step-bound key {text!r}, expected 'u>v#y'")
        arc = Arc.parse(arc_part)
        try:
            y = int(idx_part)
        except ValueError:
            raise InputError(f"malformed occurrence index in {text!r}") from None
        if y < 1:
            raise InputError(f"occurrence index must be >= 1 in {text!r}")
        key = (arc.edge_key, y)
        bound = int(bound)
        if key in out and out[key] != bound:
            raise InputError(f"conflicting step bounds for {text!r}")
        out[key] = bound
    return out


def step_bounds_to_dict(g: Mapping[Tuple[EdgeKey, int], int]) -> Dict[str, int]:
    return {f"{_canonical_arc(key)}#{y}": bound for (key, y), bound in sorted(g.items())}


def load_instance_file(path: str) -> Tuple[RoadInstance, Optional[ServiceParams], Optional[Dict]]:
    """Read an instance file; returns (instance, params or None, g or None)."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
    instance = instance_from_dict(data)
    params = params_from_dict(data["params"]) if "params" in data else None
    g = step_bounds_from_dict(data["g"]) if "g" in data else None
    return instance, params, g


def dump_instance_file(
    path: str,
    instance: RoadInstance,
    params: Optional[ServiceParams] = None,
    g: Optional[Mapping[Tuple[EdgeKey, int], int]] = None,
) -> None:
    data = instance_to_dict(instance)
    if params is not None:
        data["params"] = params_to_dict(params)
    if g is not None:
        data["g"] = step_bounds_to_dict(g)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# routes
# ---------------------------------------------------------------------------


def route_from_text(text: str) -> VehicleRoute:
    arcs = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        arcs.append(Arc.parse(line))
    return VehicleRoute(tuple(arcs))


def route_to_text(route: VehicleRoute) -> str:
    return "".join(f"{arc}\n" for arc in route.arcs)


def load_route_file(path: str) -> VehicleRoute:
    with open(path) as fh:
        return route_from_text(fh.read())


def dump_route_file(path: str, route: VehicleRoute) -> None:
    with open(path, "w") as fh:
        fh.write(route_to_text(route))


# ---------------------------------------------------------------------------
# cyclic neighbor orders (for the fairness index)
# ---------------------------------------------------------------------------


def orders_from_dict(data: Mapping[str, List[str]]) -> Dict[str, Tuple[str, ...]]:
    return {v: tuple(neigh) for v, neigh in data.items()}


def orders_to_dict(orders: Mapping[str, Tuple[str, ...]]) -> Dict[str, List[str]]:
    return {v: list(neigh) for v, neigh in orders.items()}
