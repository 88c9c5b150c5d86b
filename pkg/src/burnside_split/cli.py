"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 a verification failed (theorem-a,
splitting, report), 3 the group exceeds ``--max-order``, 4 an internal
assertion failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .burnside import (
    burnside_ring,
    dress_idempotent,
    is_p_local,
    norm,
    restrict,
    table_of_marks,
)
from .groups import (
    DEFAULT_MAX_ORDER,
    FiniteGroup,
    GroupOrderError,
    GroupSpecError,
    PrimeSet,
    build_group,
    class_of,
    p_perfect_classes,
    parse_generators,
    subgroup_classes,
    validate_group_spec,
)
from .tambara import (
    NormPair,
    condition_diamond,
    condition_star,
    indexing_system,
    intersect_indexing_systems,
    norm_descends,
    normality_characterization,
    splitting_report,
    verify_theorem_a,
)

COMMANDS = ("marks", "idempotents", "norm", "theorem-a", "indexing-systems", "splitting", "report")


class UsageError(ValueError):
    pass


@dataclass
class Config:
    command: str
    group_spec: str
    primes_spec: str = "all"
    format: str = "text"
    output_path: str | None = None
    max_order: int = DEFAULT_MAX_ORDER
    from_gens: str | None = None
    to_gens: str | None = None

    @property
    def all_primes_mode(self) -> bool:
        return self.primes_spec.strip().lower() == "all"


@dataclass
class ReportDocument:
    tool_version: str
    group: str
    order: int
    primes: dict
    command: str
    payload: dict = field(default_factory=dict)
    ok: bool = True

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "group": self.group,
            "order": self.order,
            "primes": self.primes,
            "command": self.command,
            "ok": self.ok,
            "payload": self.payload,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> ReportDocument:
        d = json.loads(text)
        return cls(d["tool_version"], d["group"], d["order"], d["primes"], d["command"], d["payload"], d["ok"])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="burnside-split",
                description="Idempotent splittings of P-local Burnside rings and their norms.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--group", required=True, help='e.g. S3, A5, D8, Q8, S3xC2 or "(1,2)(3,4); (1,3,5)"')
    p.add_argument("--primes", default="all", help='"all", "none" or a comma list such as 2,3')
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    p.add_argument("--from", dest="from_gens", default=None, help="generators of K (norm command)")
    p.add_argument("--to", dest="to_gens", default=None, help="generators of H (norm command)")
    return p


def parse_config(argv: list[str]) -> Config:
    args = _parser().parse_args(argv)
    try:
        validate_group_spec(args.group)
        PrimeSet.parse(args.primes)
        for gens in (args.from_gens, args.to_gens):
            if gens is not None and gens.strip() not in ("", "()"):
                parse_generators(gens)
    except (GroupSpecError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.command == "norm" and (args.from_gens is None or args.to_gens is None):
        raise UsageError("norm requires --from and --to")
    if args.max_order < 1:
        raise UsageError("--max-order must be positive")
    return Config(args.command, args.group, args.primes, args.format, args.out, args.max_order,
                  args.from_gens, args.to_gens)


# ---------------------------------------------------------------------------
# payloads; every rational is emitted as a string


def _q(x) -> str:
    return str(Fraction(x))


def _qs(xs) -> list[str]:
    return [_q(x) for x in xs]


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return _q(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _marks_payload(G: FiniteGroup) -> dict:
    tom = table_of_marks(G)
    classes = [{"label": c.label, "order": c.order, "size": len(c.members), "gens": c.representative.label}
               for c in tom.classes]
    orbits = [{"orbit": f"G/{c.label}", "marks": _qs(tom.orbit_marks(j))} for j, c in enumerate(tom.classes)]
    return {"classes": classes, "orbits": orbits}


def _idempotents_payload(G: FiniteGroup, P: PrimeSet) -> dict:
    rows = []
    for L in p_perfect_classes(G, P):
        e = dress_idempotent(L, P)
        rows.append({"L": L.label, "gens": L.representative.label, "marks": _qs(e.marks),
                     "orbit_coeffs": _qs(e.orbit_coeffs), "p_local": is_p_local(e, P)})
    return {"classes": [c.label for c in subgroup_classes(G)], "idempotents": rows}


def _norm_payload(G: FiniteGroup, P: PrimeSet, K, H) -> dict:
    if not K <= H:
        raise UsageError("--from must generate a subgroup of --to")
    pair = NormPair(K, H)
    RK, RH = burnside_ring(K), burnside_ring(H)
    orbit_norms = [{"orbit": f"K/{c.label}", "marks": _qs(norm(RK.orbit(c.representative), H).marks)}
                   for c in RK.classes]
    idems = []
    for L in p_perfect_classes(G, P):
        e = dress_idempotent(L, P)
        idems.append({
            "L": L.label,
            "restricted_marks": _qs(restrict(e, K).marks),
            "normed_marks": _qs(norm(restrict(e, K), H).marks),
            "star": condition_star(L, pair),
            "diamond": condition_diamond(L, pair, P),
            "division": norm_descends(L, pair, P),
        })
    return {
        "K": class_of(K).label, "K_gens": K.label, "H": class_of(H).label, "H_gens": H.label,
        "K_classes": [c.label for c in RK.classes],
        "H_classes": [c.label for c in RH.classes],
        "orbit_norms": orbit_norms,
        "idempotents": idems,
    }


def _theorem_a_payload(G: FiniteGroup, P: PrimeSet) -> tuple[dict, bool]:
    rep = verify_theorem_a(G, P)
    summary = [{"L": L.label, "admissible_proper_pairs": [p.labels() for p in rep.admissible(L.label)]}
               for L in p_perfect_classes(G, P)]
    d = rep.to_dict()
    d["admissible"] = summary
    return d, rep.verdict


def _indexing_payload(G: FiniteGroup, P: PrimeSet) -> dict:
    systems, rows = [], []
    for L in p_perfect_classes(G, P):
        I = indexing_system(L, P)
        systems.append(I)
        is_normal, has_all = normality_characterization(L, P)
        rows.append({"L": L.label, "complete": I.is_complete(), "normal": is_normal,
                     "all_norms_above_L": has_all,
                     "proper_pairs": [p.labels() for p in I.pairs(proper_only=True)]})
    shared = intersect_indexing_systems(systems)
    return {"systems": rows, "shared_proper_pairs": [p.labels() for p in shared.pairs(proper_only=True)]}


def run(config: Config) -> tuple[ReportDocument, int]:
    G = build_group(config.group_spec, config.max_order)
    P = PrimeSet.parse(config.primes_spec, G.order).for_order(G.order)
    doc = ReportDocument(__version__, G.label, G.order,
                         {"label": P.label, "primes": sorted(P.primes), "all_primes_mode": P.all_primes_mode},
                         config.command)
    cmd = config.command
    ok = True
    if cmd == "marks":
        payload = _marks_payload(G)
    elif cmd == "idempotents":
        payload = _idempotents_payload(G, P)
    elif cmd == "norm":
        try:
            K = G.subgroup_from_cycles(config.from_gens)
            H = G.subgroup_from_cycles(config.to_gens)
        except (GroupSpecError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        payload = _norm_payload(G, P, K, H)
    elif cmd == "theorem-a":
        payload, ok = _theorem_a_payload(G, P)
    elif cmd == "indexing-systems":
        payload = _indexing_payload(G, P)
    elif cmd == "splitting":
        payload = splitting_report(G, P)
        ok = payload["ok"]
    else:
        thm, ok_a = _theorem_a_payload(G, P)
        split = splitting_report(G, P)
        payload = {
            "marks": _marks_payload(G),
            "idempotents": _idempotents_payload(G, P),
            "theorem_a": thm,
            "indexing_systems": _indexing_payload(G, P),
            "splitting": split,
        }
        ok = ok_a and split["ok"]
    doc.payload = _jsonable(payload)
    doc.ok = ok
    return doc, 0 if ok else 2


# ---------------------------------------------------------------------------
# text rendering


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _cell(v) -> str:
    if isinstance(v, list):
        if v and isinstance(v[0], dict):
            return " ".join(f"{d.get('K', '')}<={d.get('H', '')}" for d in v) or "-"
        return " ".join(_scalar(x) for x in v) or "-"
    if isinstance(v, dict):
        return " ".join(f"{k}={_scalar(x)}" for k, x in v.items()) or "-"
    return _scalar(v)


def _render(obj, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    for key, val in obj.items():
        if isinstance(val, dict):
            out.append(f"{pad}{key}:")
            _render(val, indent + 1, out)
        elif isinstance(val, list) and val and all(isinstance(r, dict) for r in val):
            out.append(f"{pad}{key}:")
            _table(val, indent + 1, out)
        else:
            out.append(f"{pad}{key}: {_cell(val)}")


def _table(rows: list[dict], indent: int, out: list[str]) -> None:
    pad = "  " * indent
    nested = [k for k, v in rows[0].items() if isinstance(v, list) and v and isinstance(v[0], dict)]
    cols = [k for k in rows[0] if k not in nested]
    cells = [[_cell(r.get(k)) for k in cols] for r in rows]
    widths = [max([len(k)] + [len(c[i]) for c in cells]) for i, k in enumerate(cols)]
    if cols:
        out.append(pad + " | ".join(k.ljust(w) for k, w in zip(cols, widths)))
        out.append(pad + "-+-".join("-" * w for w in widths))
    for r, c in zip(rows, cells):
        if cols:
            out.append(pad + " | ".join(x.ljust(w) for x, w in zip(c, widths)))
        for k in nested:
            if r.get(k):
                out.append(f"{pad}  {k}:")
                _table(r[k], indent + 2, out)


def render_text(doc: ReportDocument) -> str:
    out = [
        f"burnside-split {doc.tool_version}",
        f"group {doc.group} (order {doc.order}), primes {doc.primes['label']}, command {doc.command}",
        f"status: {'ok' if doc.ok else 'FAILED'}",
        "",
    ]
    _render(doc.payload, 0, out)
    return "\n".join(out) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
        doc, code = run(config)
    except UsageError as exc:
        print(_parser().format_usage().rstrip(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GroupOrderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 4
    text = doc.to_json() + "\n" if config.format == "json" else render_text(doc)
    if config.output_path:
        Path(config.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
