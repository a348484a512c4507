"""JSON documents for structures, instances and equality relations.

Structure::

    {"domain": 2, "relations": {"R": {"arity": 2, "tuples": [[0, 1], [1, 0]]}}}

``domain`` may also be a list of value names, in which case tuple entries
use those names. Instance::

    {"base": <structure or name>, "alien": <structure or name>,
     "variables": ["x", "y"],
     "constraints": [{"rel": "R", "args": ["x", "y"], "alien": false}]}

A string in ``base``/``alien`` is handed to the caller's resolver (the CLI
treats it as a path relative to the instance file). Equality relations::

    {"arity": 3, "kernels": [[[0, 1], [2]], [[0], [1, 2]]]}
    {"arity": 3, "formula": "(x0=x1)|(x1=x2)"}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable, Mapping

from .errors import (
    ArityMismatch,
    DomainBoundViolation,
    MalformedDocument,
    NameClash,
    UnknownSymbol,
)
from .structures import (
    Constraint,
    EqRelation,
    Instance,
    Relation,
    Structure,
    blocks_of,
    rgs_from_blocks,
)

Resolver = Callable[[str], Any]


def _no_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise NameClash(f"duplicate key {key!r}")
        out[key] = value
    return out


def loads(text: str) -> Any:
    """json.loads that rejects duplicate keys and reports the failing line."""
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(exc.msg, line=exc.lineno) from None


def dumps(doc: Any) -> str:
    return json.dumps(doc, ensure_ascii=False, sort_keys=False)


def _expect(doc, kind, path):
    if not isinstance(doc, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise MalformedDocument(f"expected {name}, got {type(doc).__name__}", path)
    return doc


def _check_keys(doc: dict, required: set[str], optional: set[str], path: str):
    extra = set(doc) - required - optional
    if extra:
        raise MalformedDocument(f"unknown keys {sorted(extra)}", path)
    missing = required - set(doc)
    if missing:
        raise MalformedDocument(f"missing keys {sorted(missing)}", path)


# -- structures -----------------------------------------------------------


def relation_from_json(doc, domain: int | list[str], path: str = "relation") -> Relation:
    _expect(doc, dict, path)
    _check_keys(doc, {"arity", "tuples"}, set(), path)
    arity = doc["arity"]
    if not isinstance(arity, int) or isinstance(arity, bool) or arity < 1:
        raise ArityMismatch("arity must be a positive integer", path + ".arity")
    labels = domain if isinstance(domain, list) else None
    d = len(domain) if labels is not None else domain
    index = {name: i for i, name in enumerate(labels)} if labels is not None else None
    tuples = set()
    for j, row in enumerate(_expect(doc["tuples"], list, path + ".tuples")):
        where = f"{path}.tuples[{j}]"
        _expect(row, list, where)
        if len(row) != arity:
            raise ArityMismatch(f"tuple has {len(row)} entries, arity is {arity}", where)
        values = []
        for v in row:
            if index is not None:
                if v not in index:
                    raise DomainBoundViolation(f"{v!r} is not a domain value", where)
                values.append(index[v])
            else:
                if not isinstance(v, int) or isinstance(v, bool):
                    raise MalformedDocument(f"tuple entry {v!r} is not an integer", where)
                if not 0 <= v < d:
                    raise DomainBoundViolation(f"entry {v} outside domain 0..{d - 1}", where)
                values.append(v)
        tuples.add(tuple(values))
    return Relation(arity, tuples)


def relation_to_json(r: Relation, labels=None) -> dict:
    rows = [list(t) for t in sorted(r.tuples)]
    if labels is not None:
        rows = [[labels[v] for v in row] for row in rows]
    return {"arity": r.arity, "tuples": rows}


def structure_from_json(doc, path: str = "structure") -> Structure:
    _expect(doc, dict, path)
    _check_keys(doc, {"domain", "relations"}, set(), path)
    domain = doc["domain"]
    labels = None
    if isinstance(domain, list):
        if not domain or not all(isinstance(x, str) for x in domain):
            raise MalformedDocument("named domain must be a non-empty list of strings", path + ".domain")
        if len(set(domain)) != len(domain):
            raise NameClash("duplicate domain value name", path + ".domain")
        labels = tuple(domain)
    elif not isinstance(domain, int) or isinstance(domain, bool) or domain < 1:
        raise MalformedDocument("domain must be a positive integer or a list of names", path + ".domain")
    rels = {}
    for name, rdoc in _expect(doc["relations"], dict, path + ".relations").items():
        rels[name] = relation_from_json(rdoc, list(labels) if labels else domain, f"{path}.relations.{name}")
    return Structure(len(labels) if labels else domain, rels, labels)


def structure_to_json(s: Structure) -> dict:
    domain = list(s.labels) if s.labels is not None else s.domain_size
    return {
        "domain": domain,
        "relations": {name: relation_to_json(r, s.labels) for name, r in s.relations.items()},
    }


# -- instances ------------------------------------------------------------


def instance_from_json(doc, resolver: Resolver | None = None, path: str = "instance") -> Instance:
    _expect(doc, dict, path)
    _check_keys(doc, {"base", "variables", "constraints"}, {"alien"}, path)

    def struct(key):
        sdoc = doc[key]
        if isinstance(sdoc, str):
            if resolver is None:
                raise UnknownSymbol(f"named structure {sdoc!r} but no resolver given", f"{path}.{key}")
            sdoc = resolver(sdoc)
            if isinstance(sdoc, Structure):
                return sdoc
        return structure_from_json(sdoc, f"{path}.{key}")

    base = struct("base")
    alien = struct("alien") if "alien" in doc else Structure(base.domain_size)
    variables = _expect(doc["variables"], list, path + ".variables")
    if not all(isinstance(v, str) for v in variables):
        raise MalformedDocument("variable names must be strings", path + ".variables")
    if len(set(variables)) != len(variables):
        raise NameClash("duplicate variable name", path + ".variables")
    known = set(variables)
    constraints = []
    for i, cdoc in enumerate(_expect(doc["constraints"], list, path + ".constraints")):
        where = f"{path}.constraints[{i}]"
        _expect(cdoc, dict, where)
        _check_keys(cdoc, {"rel", "args"}, {"alien"}, where)
        rel, args, is_alien = cdoc["rel"], cdoc["args"], cdoc.get("alien", False)
        if not isinstance(is_alien, bool):
            raise MalformedDocument("'alien' must be a boolean", where)
        side = alien if is_alien else base
        if rel not in side:
            raise UnknownSymbol(f"{rel!r} is not a {'alien' if is_alien else 'base'} symbol", where)
        _expect(args, list, where + ".args")
        if len(args) != side[rel].arity:
            raise ArityMismatch(f"{rel!r} has arity {side[rel].arity}, got {len(args)} arguments", where)
        for v in args:
            if v not in known:
                raise UnknownSymbol(f"unknown variable {v!r}", where)
        constraints.append(Constraint(rel, tuple(args), is_alien))
    if base.domain_size != alien.domain_size:
        raise DomainBoundViolation("base and alien structures have different domains", path)
    return Instance(tuple(variables), tuple(constraints), base, alien)


def instance_to_json(inst: Instance) -> dict:
    return {
        "base": structure_to_json(inst.base),
        "alien": structure_to_json(inst.alien),
        "variables": list(inst.variables),
        "constraints": [{"rel": c.rel, "args": list(c.args), "alien": c.alien} for c in inst.constraints],
    }


# -- equality relations ---------------------------------------------------


def eq_relation_from_json(doc, path: str = "relation") -> EqRelation:
    from .equality import eq_from_formula

    _expect(doc, dict, path)
    if "formula" in doc:
        _check_keys(doc, {"arity", "formula"}, set(), path)
    else:
        _check_keys(doc, {"arity", "kernels"}, set(), path)
    arity = doc["arity"]
    if not isinstance(arity, int) or isinstance(arity, bool) or arity < 1:
        raise ArityMismatch("arity must be a positive integer", path + ".arity")
    if "formula" in doc:
        formula = _expect(doc["formula"], str, path + ".formula")
        try:
            return eq_from_formula(arity, formula)
        except ValueError as exc:
            raise MalformedDocument(str(exc), path + ".formula") from None
    kernels = set()
    for j, blocks in enumerate(_expect(doc["kernels"], list, path + ".kernels")):
        where = f"{path}.kernels[{j}]"
        _expect(blocks, list, where)
        try:
            kernels.add(rgs_from_blocks(blocks, arity))
        except (ArityMismatch, DomainBoundViolation) as exc:
            raise type(exc)(str(exc), where) from None
    return EqRelation(arity, kernels)


def eq_relation_to_json(r: EqRelation) -> dict:
    return {"arity": r.arity, "kernels": [blocks_of(k) for k in sorted(r.kernels)]}


def eq_language_from_json(doc, path: str = "language") -> dict[str, EqRelation]:
    _expect(doc, dict, path)
    _check_keys(doc, {"relations"}, set(), path)
    return {
        name: eq_relation_from_json(rdoc, f"{path}.relations.{name}")
        for name, rdoc in _expect(doc["relations"], dict, path + ".relations").items()
    }


def eq_language_to_json(lang: Mapping[str, EqRelation]) -> dict:
    return {"relations": {name: eq_relation_to_json(r) for name, r in lang.items()}}


# -- files ----------------------------------------------------------------


def load_json(path: str | Path) -> Any:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedDocument(f"cannot read {p}: {exc.strerror}") from None
    try:
        return loads(text)
    except MalformedDocument as exc:
        raise MalformedDocument(exc.message, path=str(p), line=exc.line) from None


def file_resolver(base_dir: str | Path) -> Resolver:
    base_dir = Path(base_dir)

    def resolve(name: str):
        return load_json(base_dir / name)

    return resolve


def load_structure(path: str | Path) -> Structure:
    return structure_from_json(load_json(path), str(path))


def load_instance(path: str | Path) -> Instance:
    p = Path(path)
    return instance_from_json(load_json(p), file_resolver(p.parent), str(p))
