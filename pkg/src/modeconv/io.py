"""JSON/CSV serialisation of reports and ingestion of family documents."""

from __future__ import annotations

import ast
import csv
import dataclasses
import enum
import io
import json
import operator
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import jsonschema

from .exact import Real, Surd, as_real, rational_power
from .measure_space import Domain, MeasurableSubset, SimpleFunction, integrate_p
from .sequences import GALLERY_NAMES, SequenceFamily, check_p, gallery

SCHEMA_VERSION = "modeconv/1"


class InputError(ValueError):
    """A user-supplied document is malformed."""


# ---------------------------------------------------------------------------
# scalars


def rational_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise InputError("booleans are not numbers")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        return Fraction(repr(s))
    try:
        return Fraction(str(s).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational: {s!r}") from exc


def decimal_str(x: Real) -> str:
    return repr(float(x))


def exact_str(x: Real) -> str | None:
    if isinstance(x, Fraction):
        return rational_str(x)
    if isinstance(x, Surd):
        return f"{rational_str(x.rational)} + {rational_str(x.coef)}*({rational_str(x.radicand)})^(1/{x.index})"
    return None


def number(x: Real) -> str:
    """Rationals as ``num/den``, everything else as a decimal string."""
    return rational_str(x) if isinstance(x, Fraction) else decimal_str(x)


# ---------------------------------------------------------------------------
# objects to JSON


def domain_json(d: Domain) -> dict:
    return {"kind": d.kind, "left": rational_str(d.left), "right": rational_str(d.right)}


def subset_json(s: MeasurableSubset) -> dict:
    return {
        "domain": domain_json(s.domain),
        "intervals": [[rational_str(a), rational_str(b)] for a, b in s.intervals],
        "includes_tail": s.includes_tail,
        "measure": rational_str(s.measure),
    }


def function_json(f: SimpleFunction) -> dict:
    return {
        "domain": domain_json(f.domain),
        "breakpoints": [rational_str(b) for b in f.partition.breakpoints],
        "values": [decimal_str(v) for v in f.values],
        "exact_values": [exact_str(v) for v in f.values],
    }


def to_jsonable(obj: Any) -> Any:
    """Recursively convert library objects to JSON-ready values."""
    from .modes.statistics import StatSeries  # local to avoid an import cycle

    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return decimal_str(obj)
    if isinstance(obj, (Fraction, Surd)):
        return number(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Domain):
        return domain_json(obj)
    if isinstance(obj, MeasurableSubset):
        return subset_json(obj)
    if isinstance(obj, SimpleFunction):
        return function_json(obj)
    if isinstance(obj, StatSeries):
        return {
            "stat_name": obj.stat_name,
            "params": {k: to_jsonable(v) for k, v in obj.params.items()},
            "entries": [[n, number(v)] for n, v in obj.entries],
        }
    if isinstance(obj, SequenceFamily):
        return {"name": obj.name, "p": number(obj.p_hint)}
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if callable(obj):
        return getattr(obj, "__name__", "callable")
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _key(k) -> str:
    if isinstance(k, enum.Enum):
        return k.value
    if isinstance(k, (Fraction, Surd, float)):
        return number(k)
    return str(k)


def dumps(doc: Any) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def report_document(kind: str, payload: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": kind, **payload}


CSV_COLUMNS = ("n", "stat_name", "p", "delta", "value")


def series_csv(series) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in series:
        for n, name, p, delta, v in s.csv_rows():
            w.writerow([n, name, "" if p is None else number(p), "" if delta is None else number(delta), number(v)])
    return buf.getvalue()


def rows_csv(rows: list[dict], columns: tuple[str, ...]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(r[c])) if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# JSON back to objects


def domain_from_json(doc: dict) -> Domain:
    kind = doc.get("kind", "interval")
    if kind == "halfline":
        return Domain.halfline(parse_rational(doc["right"]))
    return Domain.interval(parse_rational(doc.get("left", 0)), parse_rational(doc["right"]))


def subset_from_json(doc: dict) -> MeasurableSubset:
    dom = domain_from_json(doc["domain"])
    return MeasurableSubset(dom, [(parse_rational(a), parse_rational(b)) for a, b in doc["intervals"]], bool(doc.get("includes_tail", False)))


def function_from_json(doc: dict, domain: Domain | None = None) -> SimpleFunction:
    dom = domain or domain_from_json(doc["domain"])
    bps = [parse_rational(b) for b in doc["breakpoints"]]
    exact = doc.get("exact_values") or [None] * len(doc["values"])
    vals = [_value(v) if e is None else _exact_value(e, v) for v, e in zip(doc["values"], exact)]
    return SimpleFunction.from_steps(dom, bps, vals)


def _exact_value(text: str, fallback) -> Real:
    # surds are written as "a + c*(r)^(1/k)"; anything else is a rational
    if "^" not in text:
        return parse_rational(text)
    try:
        a, rest = text.split(" + ", 1)
        c, root = rest.split("*(", 1)
        r, k = root.split(")^(1/", 1)
        return Surd.make(parse_rational(a), parse_rational(c), parse_rational(r), int(k.rstrip(")")))
    except (ValueError, InputError):
        return _value(fallback)


def _value(v) -> Real:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return as_real(v) if isinstance(v, int) else v
    try:
        return parse_rational(v)
    except InputError:
        return float(v)


def revalidate_witnesses(doc: dict, fam: SequenceFamily, p) -> float:
    """Recompute serialised witness entries; returns the largest discrepancy."""
    worst = 0.0
    for e in doc["entries"]:
        b = subset_from_json(e["witness"])
        f, g = fam.pair(e["n"])
        val = integrate_p(f, g, p, b)
        worst = max(worst, abs(float(val) - float(parse_number(e["trimmed_integral"]))))
        worst = max(worst, abs(float(b.complement().measure - parse_rational(e["complement_measure"]))))
    return worst


def parse_number(s) -> Real:
    try:
        return parse_rational(s)
    except InputError:
        return float(s)


# ---------------------------------------------------------------------------
# formulas in n


_BINOPS: dict[type, Callable] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


def _pow(base, exp):
    if not isinstance(exp, Fraction):
        raise InputError("exponents must be rational")
    if isinstance(base, Fraction):
        if exp.denominator == 1:
            return base ** int(exp)
        if base < 0:
            raise InputError("fractional power of a negative number")
        return rational_power(base, exp)
    if exp.denominator == 1 and exp >= 0:
        out: Real = Fraction(1)
        for _ in range(int(exp)):
            out = out * base
        return out
    return float(base) ** float(exp)


def compile_formula(text: str) -> Callable[[dict], Real]:
    """Arithmetic in ``n`` and ``p`` with ``+ - * / **``; rationals stay exact."""
    try:
        tree = ast.parse(str(text), mode="eval")
    except SyntaxError as exc:
        raise InputError(f"bad formula {text!r}") from exc

    def ev(node, env):
        if isinstance(node, ast.Expression):
            return ev(node.body, env)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return Fraction(repr(node.value)) if isinstance(node.value, float) else Fraction(node.value)
        if isinstance(node, ast.Name) and node.id in env:
            return env[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            return _pow(ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        raise InputError(f"unsupported element in formula {text!r}")

    def run(env: dict) -> Real:
        try:
            return ev(tree, env)
        except ZeroDivisionError as exc:
            raise InputError(f"division by zero in {text!r} at {env}") from exc

    return run


def _rational_formula(text) -> Callable[[dict], Fraction]:
    f = compile_formula(text) if isinstance(text, str) else (lambda env, v=parse_rational(text): v)

    def run(env):
        v = f(env)
        if not isinstance(v, Fraction):
            raise InputError(f"breakpoint {text!r} is not rational at {env}")
        return v

    return run


# ---------------------------------------------------------------------------
# family documents

_RATIONAL = {"oneOf": [{"type": "string"}, {"type": "number"}]}
_TABLE = {
    "type": "object",
    "required": ["breakpoints", "values"],
    "properties": {
        "breakpoints": {"type": "array", "items": _RATIONAL, "minItems": 2},
        "values": {"type": "array", "items": _RATIONAL, "minItems": 1},
        "domain": {"type": "object"},
    },
}
_DOMAIN = {
    "type": "object",
    "required": ["right"],
    "properties": {
        "kind": {"enum": ["interval", "halfline"]},
        "left": _RATIONAL,
        "right": _RATIONAL,
    },
}
FAMILY_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "p": {"type": ["number", "string"]},
        "horizon": {"type": "integer", "minimum": 8},
        "gallery": {"enum": list(GALLERY_NAMES)},
        "domain": _DOMAIN,
        "terms": {"type": "array", "items": _TABLE, "minItems": 1},
        "formula": _TABLE,
        "limit": _TABLE,
        "witness": {
            "oneOf": [
                {"type": "array", "items": {"type": "object", "required": ["intervals"]}},
                {"type": "object", "required": ["intervals"]},
            ]
        },
    },
    "oneOf": [{"required": ["gallery"]}, {"required": ["domain", "terms"]}, {"required": ["domain", "formula"]}],
}


def _validate(doc, schema, what: str):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid {what}: {exc.message}") from exc


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def family_from_json(doc: dict, p=None) -> SequenceFamily:
    """Build a family from a gallery name, a per-n table or formulas in ``n``."""
    _validate(doc, FAMILY_SCHEMA, "family document")
    p = check_p(p if p is not None else parse_number(doc.get("p", 1)))
    if "gallery" in doc:
        return gallery(doc["gallery"], p)
    name = doc.get("name", "custom")
    dom_doc = doc["domain"]
    kind = dom_doc.get("kind", "interval")
    right = _rational_formula(dom_doc["right"])
    left = parse_rational(dom_doc.get("left", 0))

    def domain_for(n: int) -> Domain:
        r = right({"n": Fraction(n), "p": p})
        return Domain.halfline(r) if kind == "halfline" else Domain.interval(left, r)

    if "terms" in doc:
        tables = doc["terms"]

        def gen(n: int) -> SimpleFunction:
            if not 1 <= n <= len(tables):
                raise InputError(f"family {name!r} tabulates only {len(tables)} terms")
            return _table(tables[n - 1], domain_for(n), {"n": Fraction(n), "p": p})

    else:
        formula = doc["formula"]

        def gen(n: int) -> SimpleFunction:
            return _table(formula, domain_for(n), {"n": Fraction(n), "p": p})

    base = domain_for(1)
    limit = _table(doc["limit"], base, {"n": Fraction(1), "p": p}) if "limit" in doc else SimpleFunction.zero(base)
    witness = None
    if "witness" in doc:
        witness = _witness_fn(doc["witness"], domain_for, p)
    domain_fn = domain_for if kind == "halfline" else None
    try:
        fam = SequenceFamily(name, p, gen, limit, witness, domain_fn, {"source": "json"})
        fam.term(1)
    except (ValueError, TypeError) as exc:
        raise InputError(f"family {name!r}: {exc}") from exc
    return fam


def _table(doc: dict, domain: Domain, env: dict) -> SimpleFunction:
    bps = [_rational_formula(b)(env) for b in doc["breakpoints"]]
    vals = [compile_formula(v)(env) if isinstance(v, str) else _value(v) for v in doc["values"]]
    if len(vals) == len(bps) - 1:
        # a formula may collapse a cell to zero width for small n
        keep = [i for i in range(len(vals)) if bps[i + 1] != bps[i]]
        bps = [bps[0]] + [bps[i + 1] for i in keep]
        vals = [vals[i] for i in keep]
    try:
        return SimpleFunction.from_steps(domain, bps, vals)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def _witness_fn(doc, domain_for, p):
    def build(entry: dict, n: int) -> MeasurableSubset:
        env = {"n": Fraction(n), "p": p}
        ivs = [(_rational_formula(a)(env), _rational_formula(b)(env)) for a, b in entry["intervals"]]
        dom = domain_for(n)
        return MeasurableSubset(dom, ivs, bool(entry.get("includes_tail", dom.is_halfline)))

    if isinstance(doc, list):
        return lambda n: build(doc[n - 1], n)
    return lambda n: build(doc, n)


__all__ = [
    "SCHEMA_VERSION",
    "InputError",
    "to_jsonable",
    "dumps",
    "report_document",
    "series_csv",
    "rows_csv",
    "write_text",
    "parse_rational",
    "parse_number",
    "subset_from_json",
    "function_from_json",
    "domain_from_json",
    "revalidate_witnesses",
    "family_from_json",
    "compile_formula",
    "load_json",
    "FAMILY_SCHEMA",
]
