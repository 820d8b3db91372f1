"""Assemble analysis and verification reports as plain JSON-ready dicts.

Rationals are written as ``"p/q"`` strings (``"p"`` for integers) so no
binary float ever touches a reported value.  Markdown output is rendered
from the same dict.
"""
from __future__ import annotations

import json
import time
from fractions import Fraction
from typing import Optional

from . import __version__
from .audit import (
    ChainClaim,
    FairnessClaim,
    NashClaim,
    audit_preferences,
    claim_matches,
    corrected_chain_search,
    run_claim,
)
from .catalog import ProtocolEntry
from .games import classify, equilibria, is_nash
from .model import enumerate_outcomes, format_expr, format_rational, payoff, payoff_expr, require_constraints
from .sampling import DEFAULT_SAMPLER, SamplerConfig, sample_params


def jsonable(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return value


def _outcome(model, q) -> list[str]:
    return [a for a in model.atom_names if a in q]


def _games(entry: ProtocolEntry, variant: str):
    if variant == "all":
        return list(entry.games)
    return [g for g in entry.games if g.name == variant]


def _claims(entry: ProtocolEntry, variant: str):
    pairs = entry.named_claims()
    if variant == "all":
        return pairs
    return [(cid, c) for cid, c in pairs if isinstance(c, ChainClaim) or c.game == variant]


def instance_params(entry: ProtocolEntry, seed: int, params: Optional[dict] = None,
                    config: SamplerConfig = DEFAULT_SAMPLER) -> dict:
    """Explicit params after a constraint check, else the first seeded sample."""
    model = entry.model
    if params is not None:
        missing = [n for n in model.param_names if n not in params]
        extra = [n for n in params if n not in model.param_names]
        if missing or extra:
            raise ValueError(f"parameter set mismatch: missing {missing}, unexpected {extra}")
        require_constraints(params, model.constraints)
        return {n: params[n] for n in model.param_names}
    return sample_params(model.constraints, model.params, seed, 1, config)[0]


def _classification(entry, params) -> dict:
    c = classify(entry.model, params)
    return {
        "zero_sum": c.zero_sum,
        "non_positive_sum": c.non_positive_sum,
        "positive_sum_witness": None if c.positive_sum_witness is None
        else _outcome(entry.model, c.positive_sum_witness),
        "positive_sum_value": c.positive_sum_value,
        "closed": c.closed,
        "closed_violation": None if c.closed_violation is None else {
            "outcome": _outcome(entry.model, c.closed_violation[0]),
            "party": c.closed_violation[1],
        },
    }


def _spectra(entry, params) -> dict:
    model = entry.model
    out = {}
    for party in model.party_ids:
        rows = [(q, payoff(model, party, q, params, check=False)) for q in enumerate_outcomes(model)]
        rows.sort(key=lambda r: r[1])
        out[party] = [{
            "outcome": _outcome(model, q),
            "expression": format_expr(payoff_expr(model, party, q)),
            "value": v,
            "tag": model.tag(q),
        } for q, v in rows]
    return out


def _game_section(entry, params, variant) -> dict:
    out = {}
    for g in _games(entry, variant):
        verdict = is_nash(g, g.honest_profile, params)
        out[g.name] = {
            "kind": g.kind,
            "honest_profile": list(g.honest_profile),
            "honest_is_nash": verdict.holds,
            "witness": None if verdict.holds else {
                "party": verdict.party, "deviation": verdict.deviation,
                "before": verdict.before, "after": verdict.after,
            },
            "equilibria": [list(p) for p in equilibria(g, params)],
        }
    return out


def _statement(claim) -> str:
    if isinstance(claim, ChainClaim):
        parts = [format_expr(claim.entries[0])]
        for sep, e in zip(claim.separators, claim.entries[1:]):
            parts += [sep, format_expr(e)]
        return " ".join(parts)
    if isinstance(claim, FairnessClaim):
        i = claim.implication
        return (f"honest {i.honest}: income of {i.antecedent[0]} includes {format_expr(i.antecedent[1])}"
                f" => income of {i.consequent[0]} includes {format_expr(i.consequent[1])}")
    return f"({claim.profile[0]}, {claim.profile[1]}) is {'' if claim.expect else 'not '}a Nash equilibrium"


def _base(command, entry, source, seed, samples, variant, explicit, config) -> dict:
    return {
        "tool": {"name": "protogame", "version": __version__},
        "command": command,
        "target": {"protocol": entry.name, "source": source},
        "config": {
            "seed": seed,
            "samples": samples,
            "variant": variant,
            "params": "explicit" if explicit else "sampled",
            "sampler": config.as_dict(),
        },
    }


def analyze(entry: ProtocolEntry, seed: int = 42, samples: int = 1000, params: Optional[dict] = None,
            variant: str = "all", source: str = "catalog",
            config: SamplerConfig = DEFAULT_SAMPLER) -> dict:
    started = time.perf_counter()
    inst = instance_params(entry, seed, params, config)
    report = _base("analyze", entry, source, seed, samples, variant, params is not None, config)
    report["params"] = inst
    report["classification"] = _classification(entry, inst)
    report["spectra"] = _spectra(entry, inst)
    report["games"] = _game_section(entry, inst, variant)
    report["timing"] = {"seconds": round(time.perf_counter() - started, 6)}
    return jsonable(report)


def verify(entry: ProtocolEntry, seed: int = 42, samples: int = 1000, params: Optional[dict] = None,
           variant: str = "all", source: str = "catalog",
           config: SamplerConfig = DEFAULT_SAMPLER) -> dict:
    """Analysis plus an audit of every claim, each compared with its expectation."""
    started = time.perf_counter()
    report = analyze(entry, seed, samples, params, variant, source, config)
    report["command"] = "verify"
    del report["timing"]
    audits, orders, mismatched = [], [], []
    for cid, claim in _claims(entry, variant):
        result = run_claim(entry, claim, cid, seed, samples, config)
        ok = claim_matches(claim, result)
        if not ok:
            mismatched.append(cid)
        row = {
            "id": cid,
            "kind": result.kind,
            "game": getattr(claim, "game", None),
            "party": claim.party if isinstance(claim, ChainClaim) else None,
            "statement": _statement(claim),
            "expected": "holds" if (claim.expect or isinstance(claim, NashClaim)) else "refuted",
            "verdict": result.verdict,
            "matches": ok,
            "samples": result.samples,
            "counterexample": result.counterexample,
            "steps": result.steps,
            "notes": result.notes,
        }
        if isinstance(claim, ChainClaim) and claim.refuted_steps is not None:
            row["expected_refuted_steps"] = list(claim.refuted_steps)
        audits.append(row)
        if isinstance(claim, ChainClaim) and not result.holds:
            order = corrected_chain_search(claim.entries, entry.model, seed, samples, config)
            orders.append({
                "claim": cid,
                "values": [format_expr(e) for e in order.values],
                "matrix": order.matrix,
                "order": order.order,
                "order_text": order.chain_text(),
                "witnesses": order.witnesses,
            })
    report["audits"] = audits
    report["orders"] = orders
    report["preferences"] = audit_preferences(entry, instance_params(entry, seed, params, config))
    report["summary"] = {
        "claims": len(audits),
        "matched": len(audits) - len(mismatched),
        "mismatched": mismatched,
        "ok": not mismatched,
    }
    report["timing"] = {"seconds": round(time.perf_counter() - started, 6)}
    return jsonable(report)


def list_report() -> list[dict]:
    from .catalog import ALIASES, get_protocol, list_protocols

    names, _ = list_protocols()
    rows = []
    for name in names:
        e = get_protocol(name)
        rows.append({
            "name": name,
            "aliases": sorted(a for a, t in ALIASES.items() if t == name),
            "description": e.description,
            "variants": list(e.variants),
        })
    return rows


def to_json(report) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def without_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


# --- markdown ------------------------------------------------------------

def _md_table(header, rows) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c).replace("|", "\\|") for c in row) + " |" for row in rows]
    return lines


def _fmt_outcome(atoms) -> str:
    return "{" + ", ".join(atoms) + "}"


def render_markdown(report) -> str:
    if isinstance(report, list):
        lines = ["# Protocol catalog", ""]
        lines += _md_table(["name", "aliases", "variants", "description"],
                           [(r["name"], ", ".join(r["aliases"]) or "-", ", ".join(r["variants"]), r["description"])
                            for r in report])
        return "\n".join(lines) + "\n"
    cfg = report["config"]
    lines = [f"# {report['command']}: {report['target']['protocol']}", "",
             f"seed {cfg['seed']}, samples {cfg['samples']}, variant {cfg['variant']}, "
             f"params {cfg['params']}", "", "## Parameters", ""]
    lines += _md_table(["name", "value"], list(report["params"].items()))
    c = report["classification"]
    lines += ["", "## Classification", "",
              f"- zero-sum: {c['zero_sum']}",
              f"- non-positive-sum: {c['non_positive_sum']}"
              + (f" (witness {_fmt_outcome(c['positive_sum_witness'])}, sum {c['positive_sum_value']})"
                 if c["positive_sum_witness"] is not None else ""),
              f"- closed: {c['closed']}"
              + (f" (violated at {_fmt_outcome(c['closed_violation']['outcome'])} by "
                 f"{c['closed_violation']['party']})" if c["closed_violation"] else "")]
    for party, rows in report["spectra"].items():
        lines += ["", f"## Payoff spectrum of {party}", ""]
        lines += _md_table(["outcome", "payoff", "value", "tag"],
                           [(_fmt_outcome(r["outcome"]), f"`{r['expression']}`", r["value"], r["tag"] or "")
                            for r in rows])
    lines += ["", "## Games", ""]
    rows = []
    for name, g in report["games"].items():
        eq = "; ".join(f"({a}, {b})" for a, b in g["equilibria"]) or "none"
        rows.append((name, g["kind"], "({}, {})".format(*g["honest_profile"]), g["honest_is_nash"], eq))
    lines += _md_table(["game", "kind", "honest profile", "honest is Nash", "pure equilibria"], rows)
    if "audits" in report:
        lines += ["", "## Claims", ""]
        lines += _md_table(["id", "statement", "expected", "verdict", "matches"],
                           [(a["id"], f"`{a['statement']}`", a["expected"], a["verdict"],
                             "yes" if a["matches"] else "**NO**") for a in report["audits"]])
        for o in report["orders"]:
            lines += ["", f"### Observed order for {o['claim']}", ""]
            if o["order_text"]:
                lines.append(f"`{o['order_text']}`")
                continue
            lines.append("No total order; these pairs change relation across samples:")
            lines.append("")
            for key in o["witnesses"]:
                i, j = (int(x) for x in key.split(","))
                lines.append(f"- `{o['values'][i]}` vs `{o['values'][j]}`")
        if report["preferences"]:
            lines += ["", "## Preferences", ""]
            lines += _md_table(["party", "ranking (low to high)", "mode", "consistent"],
                               [(p["party"], " < ".join(p["ranking"]), p["mode"],
                                 "-" if p["consistent"] is None else p["consistent"])
                                for p in report["preferences"]])
        s = report["summary"]
        lines += ["", f"**{s['matched']}/{s['claims']} claims match their expectation.**"]
    return "\n".join(lines) + "\n"
