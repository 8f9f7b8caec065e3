"""Run reports: a JSON document (canonical), a CSV of fact logs and a text summary.

Floats are written with 17 significant digits so every value parses back to
the identical double.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .perspectives import PerspectiveLedger
from .scenario.interpreter import ScenarioResult

SCHEMA_VERSION = 1
TOP_COMPONENTS = 4


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def state_summary(ledger: PerspectiveLedger) -> dict:
    state = ledger.state
    reg = state.registry
    if state.is_pure:
        weights = np.abs(state.vector) ** 2
    else:
        weights = np.real(np.diag(state.rho))
    order = sorted(range(len(weights)), key=lambda i: (-round(weights[i], 12), i))
    top = []
    for i in order[:TOP_COMPONENTS]:
        if weights[i] <= 1e-12:
            break
        entry = {"basis": reg.basis_label(i), "probability": float(weights[i])}
        if state.is_pure:
            entry["re"] = float(state.vector[i].real)
            entry["im"] = float(state.vector[i].imag)
        top.append(entry)
    return {
        "systems": [{"label": l, "dim": d} for l, d in reg.systems],
        "dim": reg.total_dim,
        "pure": state.is_pure,
        "purity": state.purity(),
        "top_components": top,
    }


def build_report(result: ScenarioResult) -> dict:
    observers = {}
    for who, led in result.ledgers.items():
        observers[who] = {
            "state": state_summary(led),
            "facts": [
                {
                    "step": f.step,
                    "system": f.system,
                    "observable": f.observable,
                    "outcome": f.outcome,
                    "eigenvalue": f.eigenvalue,
                    "probability": f.probability,
                }
                for f in led.facts
            ],
            "stability": [
                {
                    "line": e.line,
                    "partition": e.partition,
                    "target": e.target,
                    "p_direct": e.report.p_direct,
                    "p_composed": e.report.p_composed,
                    "deviation": e.report.deviation,
                    "stable": e.report.stable,
                    "threshold": e.report.threshold,
                    "interference_witness": e.witness,
                    "facts_held": e.facts_held,
                }
                for e in result.stability
                if e.observer == who
            ],
            "cross_checks": [
                {
                    "line": c.line,
                    "against": c.friend,
                    "apparatus": c.apparatus,
                    "status": c.result.status,
                    "agreement": c.result.agreement,
                    "friend_outcome": c.result.friend_outcome,
                    "pointer_outcome": c.result.pointer_outcome,
                    "pointer_probability": c.result.pointer_probability,
                    "system_outcome": c.result.system_outcome,
                    "correlation": c.correlation,
                }
                for c in result.cross_checks
                if c.observer == who
            ],
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": result.name,
        "seed": result.seed,
        "normalization": dict(result.scales),
        "observers": observers,
    }


def _dump(value, indent: int) -> str:
    pad = "  " * indent
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("reports cannot hold non-finite numbers")
        return fmt(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k), ensure_ascii=False)}: {_dump(v, indent + 1)}' for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [pad + "  " + _dump(v, indent + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(report: dict) -> str:
    return _dump(report, 0) + "\n"


def to_csv(result: ScenarioResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["observer", "step", "system", "observable", "outcome", "eigenvalue", "probability"])
    for who, led in result.ledgers.items():
        for f in led.facts:
            w.writerow([who, f.step, f.system, f.observable, f.outcome, fmt(f.eigenvalue), fmt(f.probability)])
    return buf.getvalue()


def to_text(result: ScenarioResult) -> str:
    rep = build_report(result)
    out = [f"scenario {rep['scenario'] or '(unnamed)'}  seed {rep['seed']}"]
    for who, sec in rep["observers"].items():
        st = sec["state"]
        systems = " ".join(f"{s['label']}({s['dim']})" for s in st["systems"]) or "(nothing)"
        kind = "pure" if st["pure"] else f"mixed, purity {fmt(st['purity'])}"
        out.append(f"observer {who}")
        out.append(f"  state over {systems}: dim {st['dim']}, {kind}")
        for c in st["top_components"]:
            amp = f"  amplitude {fmt(c['re'])}{'+' if c['im'] >= 0 else '-'}{fmt(abs(c['im']))}i" if "re" in c else ""
            out.append(f"    {c['basis']}: p {fmt(c['probability'])}{amp}")
        out.append(f"  facts: {len(sec['facts'])}")
        for f in sec["facts"]:
            out.append(
                f"    [{f['step']}] {f['observable']} on {f['system']} -> {f['outcome']}"
                f"  (eigenvalue {fmt(f['eigenvalue'])}, p {fmt(f['probability'])})"
            )
        for s in sec["stability"]:
            verdict = "stable" if s["stable"] else "not stable"
            out.append(
                f"  stability (line {s['line']}, partition {s['partition']}, target {s['target']}, "
                f"{s['facts_held']} facts held): {verdict}"
            )
            out.append(
                f"    P direct {fmt(s['p_direct'])}  P composed {fmt(s['p_composed'])}  "
                f"deviation {fmt(s['deviation'])}  interference witness {fmt(s['interference_witness'])}"
            )
        for c in sec["cross_checks"]:
            sys_part = f", system {c['system_outcome']}" if c["system_outcome"] is not None else ""
            out.append(
                f"  cross-check against {c['against']} (line {c['line']}): {c['status']}"
                f"  ({c['against']} recorded {c['friend_outcome']}; pointer {c['pointer_outcome']}{sys_part})"
            )
    return "\n".join(out) + "\n"
