"""Command-line front end: simulate, build-cycle, bench, demo-bridge.

Exit status: 0 on success, 1 on an invalid verdict or a refuted bridge
candidate, 2 on bad usage or input files, 3 when the graph has a bridge.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .builder import build_robbins, check_build
from .cycle_sim import BINARY, UNARY
from .engine import DEFAULT_BUDGET, adversary_from_name, scheduler_from_name
from .graph import BridgeError, CycleRep, Graph, GraphError, validate_cycle
from .protocol import Process, ProtocolError, ProtocolSpec, builtin_protocol
from .runner import simulate
from .verifier import CANDIDATES, XOR, bridge_demo, check_lemma_properties, pulse_metrics, verify_tau

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_BRIDGE = 0, 1, 2, 3


@dataclass
class ScenarioConfig:
    graph: str | None = None
    scenario: str | None = None
    mode: str = BINARY
    pad_l: int = 2
    seed_sched: int = 0
    seed_adv: int = 0
    scheduler: str = "fifo"
    adversary: str = "randomize"
    cycle: str | None = None
    out: str | None = None
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.mode not in (UNARY, BINARY):
            raise ValueError(f"mode must be unary or binary, got {self.mode!r}")
        if self.mode == BINARY and self.pad_l < 2:
            raise ValueError("binary mode needs --pad-l >= 2")

    @property
    def scheduler_policy(self):
        return scheduler_from_name(self.scheduler, self.seed_sched)

    @property
    def adversary_policy(self):
        return adversary_from_name(self.adversary, self.seed_adv)


def _load(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_scenario(doc: dict) -> tuple[ProtocolSpec, dict]:
    params = doc.get("params") or {}
    spec = builtin_protocol(doc["protocol"], **params)
    inputs = {int(k): v for k, v in (doc.get("inputs") or {}).items()}
    return spec, inputs


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _bridge_report(g: Graph, exc: BridgeError) -> dict:
    return {"status": "refused", "reason": "graph has bridges; no resilient simulation exists",
            "bridges": [list(b) for b in sorted(exc.bridges)], "graph": g.to_dict()}


def cmd_simulate(cfg: ScenarioConfig) -> tuple[int, dict]:
    g = Graph.from_dict(_load(cfg.graph))
    spec, inputs = load_scenario(_load(cfg.scenario))
    cycle = CycleRep.from_dict(_load(cfg.cycle)) if cfg.cycle else None
    try:
        sim = simulate(g, spec, inputs, cycle=cycle, mode=cfg.mode, run_limit=cfg.pad_l,
                       scheduler=cfg.scheduler_policy, adversary=cfg.adversary_policy, budget=cfg.budget)
    except BridgeError as exc:
        return EXIT_BRIDGE, _bridge_report(g, exc)
    verdict = verify_tau(g, spec, inputs, sim.tau, sim.outputs, require_quiescence=sim.result.quiescent)
    lemma = check_lemma_properties(sim)
    metrics = pulse_metrics(sim)
    ok = verdict.valid and sim.result.quiescent
    report = {
        "status": "valid" if ok else "invalid",
        "simulator": sim.simulator,
        "mode": cfg.mode,
        "pad_l": cfg.pad_l,
        "halt": sim.result.halt,
        "fault": sim.result.fault,
        "cycle": sim.cycle.to_dict(),
        "outputs": {str(k): v for k, v in sim.outputs.items()},
        "verdict": verdict.to_dict(),
        "lemma_violations": lemma.violations,
        "transcript_events": len(sim.tau),
        "metrics": metrics,
        "summary": f"{sim.simulator} simulation of {spec.name} on n={g.n}: "
                   f"{'valid' if ok else 'INVALID'}, {metrics['total_pulses']} pulses, "
                   f"{metrics['messages']} messages",
    }
    return (EXIT_OK if ok else EXIT_INVALID), report


def cmd_build_cycle(cfg: ScenarioConfig) -> tuple[int, dict]:
    g = Graph.from_dict(_load(cfg.graph))
    try:
        res = build_robbins(g, scheduler=cfg.scheduler_policy, adversary=cfg.adversary_policy,
                            budget=cfg.budget, mode=cfg.mode, run_limit=cfg.pad_l)
    except BridgeError as exc:
        return EXIT_BRIDGE, _bridge_report(g, exc)
    if res.cycle is None:
        return EXIT_INVALID, {"status": "failed", "halt": res.halt, "fault": res.fault, "metrics": res.metrics()}
    problems = check_build(g, res)
    doc = res.cycle.to_dict()
    doc["status"] = "ok" if not problems else "invalid"
    doc["report"] = validate_cycle(g, res.cycle).to_dict()
    doc["problems"] = problems
    doc["metrics"] = res.metrics()
    return (EXIT_OK if not problems else EXIT_INVALID), doc


class OneShot(Process):
    """The root sends its input bitstring once to its lowest neighbour."""

    def init(self):
        if self.node != self.root:
            return []
        return [self.send(self.neighbors[0], str(self.value or ""))]

    def on_deliver(self, env):
        self.decide(env.payload)
        return []


def bench_point(n: int, bits: int, mode: str, run_limit: int = 2, seed: int = 0) -> dict:
    """Pulses needed to simulate one ``bits``-bit unicast on an ``n``-cycle."""
    g = Graph(range(n), [(i, (i + 1) % n) for i in range(n)], root=0)
    spec = ProtocolSpec("one-shot", OneShot)
    payload = ("1" * bits)
    sim = simulate(g, spec, {0: payload}, mode=mode, run_limit=run_limit,
                   scheduler=scheduler_from_name("random", seed), adversary=adversary_from_name("randomize", seed))
    m = pulse_metrics(sim)
    msg = m["per_message"][0]
    return {"n": n, "bits": bits, "mode": mode, "pad_l": run_limit, "pulses": m["total_pulses"],
            "message_pulses": msg["pulses"], "wire_bits": msg["wire_bits"],
            "data_pulses": msg.get("data_pulses"), "ok": sim.outputs[g.neighbors(0)[0]] == payload}


def cmd_bench(cfg: ScenarioConfig, sizes=(3, 5, 8), bits=range(1, 7), modes=(UNARY, BINARY)) -> tuple[int, dict]:
    rows = [bench_point(n, b, mode, cfg.pad_l, cfg.seed_sched) for mode in modes for n in sizes for b in bits]
    lines = [f"{'mode':7} {'n':>3} {'|m|':>4} {'pulses':>10} {'ratio':>6}"]
    prev = {}
    for r in rows:
        key = (r["mode"], r["n"])
        ratio = r["message_pulses"] / prev[key] if key in prev else float("nan")
        prev[key] = r["message_pulses"]
        lines.append(f"{r['mode']:7} {r['n']:>3} {r['bits']:>4} {r['message_pulses']:>10} {ratio:>6.2f}")
    ok = all(r["ok"] for r in rows)
    return (EXIT_OK if ok else EXIT_INVALID), {"rows": rows, "table": lines}


def cmd_demo_bridge(cfg: ScenarioConfig, candidate: str = "xor-count", table: dict | None = None) -> tuple[int, dict]:
    outcome = bridge_demo(table or XOR, candidate, adversary_from_name(cfg.adversary, cfg.seed_adv),
                          budget=min(cfg.budget, 10_000))
    doc = outcome.to_dict()
    doc["status"] = "refuted" if outcome.refuted else "survived"
    return (EXIT_INVALID if outcome.refuted else EXIT_OK), doc


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdnet", description="Protocol simulation over fully-defective networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, adversary="randomize"):
        sp.add_argument("--mode", choices=[UNARY, BINARY], default=BINARY)
        sp.add_argument("--pad-l", type=int, default=2)
        sp.add_argument("--seed-sched", type=int, default=0)
        sp.add_argument("--seed-adv", type=int, default=0)
        sp.add_argument("--scheduler", choices=["fifo", "random", "lifo"], default="fifo")
        sp.add_argument("--adversary", choices=["identity", "randomize", "ones"], default=adversary)
        sp.add_argument("--out")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    s = sub.add_parser("simulate", help="simulate a protocol and verify its transcript")
    s.add_argument("--graph", required=True)
    s.add_argument("--scenario", required=True)
    s.add_argument("--cycle")
    common(s)
    b = sub.add_parser("build-cycle", help="construct a Robbins cycle with pulses only")
    b.add_argument("--graph", required=True)
    common(b)
    bn = sub.add_parser("bench", help="per-message pulse counts, unary vs binary")
    bn.add_argument("--sizes", default="3,5,8")
    bn.add_argument("--bits", default="1-6")
    common(bn)
    d = sub.add_parser("demo-bridge", help="run a naive two-party protocol against the all-ones adversary")
    d.add_argument("--candidate", choices=sorted(CANDIDATES), default="xor-count")
    common(d, adversary="ones")
    return p


def _range(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition("-")
        out.extend(range(int(lo), int(hi or lo) + 1))
    return out


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = ScenarioConfig(
            graph=getattr(args, "graph", None), scenario=getattr(args, "scenario", None), mode=args.mode,
            pad_l=args.pad_l, seed_sched=args.seed_sched, seed_adv=args.seed_adv, scheduler=args.scheduler,
            adversary=args.adversary, cycle=getattr(args, "cycle", None), out=args.out, budget=args.budget,
        )
        if args.command == "simulate":
            code, report = cmd_simulate(cfg)
        elif args.command == "build-cycle":
            code, report = cmd_build_cycle(cfg)
        elif args.command == "bench":
            code, report = cmd_bench(cfg, _range(args.sizes), _range(args.bits))
        else:
            code, report = cmd_demo_bridge(cfg, args.candidate)
    except (OSError, ValueError, KeyError, ProtocolError, GraphError) as exc:
        if isinstance(exc, BridgeError):
            raise
        print(f"fdnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report, cfg.out)
    summary = report.get("summary") or "\n".join(report.get("table", [])) or report.get("status")
    if cfg.out and summary:
        print(summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
