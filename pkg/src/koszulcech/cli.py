"""Command line front end: compute, verify and oracle.

Exit codes: 0 success, 1 a check failed, 2 invalid configuration,
3 unsupported instance, 4 only inconclusive verdicts.
"""
from __future__ import annotations

import argparse
import json
import sys
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .adic import koszul_systems
from .cech import (InfiniteRing, TooLarge, cech_complex_finite, derived_completion_koszul, gamma,
                   local_cohomology_koszul, proregular_check)
from .rings import RingError
from .verify import (FAIL, INCONCLUSIVE, PASS, InstanceConfig, UnknownCheck, UnsupportedInstance,
                     default_suite, run_check, run_suite)

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_UNSUPPORTED, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


class InvalidConfig(ValueError):
    pass


@lru_cache(maxsize=None)
def schema() -> dict:
    return json.loads(resources.files("koszulcech").joinpath("schema.json").read_text())


def _validate(data, which: str) -> None:
    full = schema()
    sub = dict(full[which])
    sub["$defs"] = full["$defs"]
    try:
        jsonschema.validate(data, sub)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidConfig(f"{path}: {exc.message}") from None


def load_json(path: str, which: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidConfig(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    _validate(data, which)
    return data


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# compute --------------------------------------------------------------------------

def _koszul_table(inst, n_max: int) -> dict:
    chain = koszul_systems(inst.ctx, inst.M, n_max, "chain")
    cochain = koszul_systems(inst.ctx, inst.M, n_max, "cochain")
    rows = {}
    for n in range(1, n_max + 1):
        rows[str(n)] = {
            "chain": {str(k): v.to_json() for k, v in sorted(chain.stage(n).display_homology().items())},
            "cochain": {str(k): v.to_json() for k, v in sorted(cochain.stage(n).display_homology().items())},
        }
    return rows


def _oracle_table(inst) -> dict:
    try:
        C = cech_complex_finite(inst.ctx, inst.M)
    except InfiniteRing as exc:
        raise UnsupportedInstance(str(exc)) from None
    except TooLarge as exc:
        raise UnsupportedInstance(f"TooLarge: {exc}") from None
    coh = C.complex.cohomology()
    return {"cech": {str(k): v.to_json() for k, v in sorted(coh.items())},
            "gamma": gamma(inst.M, inst.ctx).to_json()}


def run_task(task: dict, cfg: InstanceConfig) -> tuple[dict, int]:
    inst = cfg.build()
    n_max, m_max = cfg.n_max, cfg.m_max
    if "compute" in task:
        kind = task["compute"]
        if kind == "localCohomology":
            return local_cohomology_koszul(inst.ctx, inst.M, n_max).to_json(), EXIT_OK
        if kind == "derivedCompletion":
            return derived_completion_koszul(inst.ctx, inst.M, n_max, m_max).to_json(), EXIT_OK
        if kind == "koszulTable":
            return _koszul_table(inst, n_max), EXIT_OK
        if kind == "proregular":
            return proregular_check(inst.ctx, inst.M, n_max, max(m_max, n_max)).to_json(), EXIT_OK
        if kind == "cechOracle":
            return _oracle_table(inst), EXIT_OK
    if "check" in task:
        rep = run_check(task["check"], cfg)
        code = {PASS: EXIT_OK, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_UNSUPPORTED}[rep.verdict]
        return rep.to_json(), code
    if "suite" in task:
        suite = run_suite(default_suite())
        return suite.to_json(), suite.exit_code
    raise InvalidConfig(f"unknown task {task!r}")


def _cell(c) -> str:
    if isinstance(c, dict) and "text" in c:
        return c["text"]
    if isinstance(c, dict) and c.get("kind") == "Stabilized":
        return c["value"]["text"]
    if isinstance(c, dict) and c.get("kind") == "ProObject":
        return "pro(" + ", ".join(s["text"] for s in c["stages"]) + ")"
    return str(c)


def render_markdown(report: dict) -> str:
    lines = [f"# Report: {report['instance']['description']}", ""]
    for i, entry in enumerate(report["tasks"]):
        task, result = entry["task"], entry["result"]
        name = task.get("compute") or task.get("check") or f"suite {task.get('suite')}"
        lines += [f"## {i + 1}. {name}", ""]
        if "degrees" in result:
            lines += ["| degree | value |", "|---|---|"]
            lines += [f"| {d} | {_cell(v)} |" for d, v in result["degrees"].items()]
            for key in ("identification",):
                if key in result:
                    lines += ["", f"{key}: {result[key]}"]
        elif "cech" in result:
            lines += ["| degree | H^i |", "|---|---|"]
            lines += [f"| {d} | {_cell(v)} |" for d, v in result["cech"].items()]
            lines += ["", f"Gamma: {_cell(result['gamma'])}"]
        elif "perIndex" in result:
            lines += ["| index | verdict |", "|---|---|"]
            lines += [f"| {i2} | {json.dumps(v, sort_keys=True)} |" for i2, v in result["perIndex"].items()]
        elif "verdict" in result:
            lines += [f"verdict: {result['verdict']}", ""]
            if result.get("witness"):
                lines += ["```", json.dumps(result["witness"], indent=2, sort_keys=True), "```"]
        elif "summary" in result:
            lines += ["| check | instance | verdict |", "|---|---|---|"]
            lines += [f"| {r['checkId']} | {r['description']} | {r['verdict']} |" for r in result["reports"]]
        else:
            lines += ["| n | chain | cochain |", "|---|---|---|"]
            for n, row in result.items():
                ch = ", ".join(f"H{d}={_cell(v)}" for d, v in row["chain"].items())
                co = ", ".join(f"H^{d}={_cell(v)}" for d, v in row["cochain"].items())
                lines.append(f"| {n} | {ch} | {co} |")
        lines.append("")
    return "\n".join(lines)


def cmd_compute(config_path: str, out_dir: str) -> int:
    data = load_json(config_path, "job")
    cfg = InstanceConfig.from_json(data)
    entries, code = [], EXIT_OK
    for task in data["tasks"]:
        result, c = run_task(task, cfg)
        entries.append({"task": task, "result": result})
        if code == EXIT_OK:
            code = c
    report = {"instance": {"config": cfg.to_json(), "description": cfg.describe()}, "tasks": entries}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(report))
    (out / "report.md").write_text(render_markdown(report))
    print(f"wrote {out / 'report.json'} and {out / 'report.md'}")
    return code


# verify --------------------------------------------------------------------------

def load_suite(path: str) -> tuple[list[InstanceConfig], list | None, str]:
    data = load_json(path, "suite")
    if data.get("suite") == "default" and "instances" not in data:
        return default_suite(), data.get("checks"), data.get("name", "default")
    return ([InstanceConfig.from_json(i) for i in data["instances"]], data.get("checks"),
            data.get("name", Path(path).stem))


def cmd_verify(suite_path: str, jobs: int = 1, seed: int = 0, out: str | None = None) -> int:
    matrix, checks, name = load_suite(suite_path)
    suite = run_suite(matrix, checks, parallelism=max(1, jobs))
    report = {"suite": name, "seed": seed, **suite.to_json()}
    text = dumps(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    s = suite.summary
    print(f"{name}: {s[PASS]} Pass, {s[FAIL]} Fail, {s[INCONCLUSIVE]} Inconclusive", file=sys.stderr)
    return suite.exit_code


# oracle --------------------------------------------------------------------------

def cmd_oracle(config_path: str) -> int:
    data = load_json(config_path, "oracle")
    cfg = InstanceConfig.from_json(data)
    table = _oracle_table(cfg.build())
    degrees = sorted(table["cech"], key=int)
    print(f"Čech cohomology for {cfg.describe()}")
    print("| degree | " + " | ".join(degrees) + " |")
    print("|---" * (len(degrees) + 1) + "|")
    print("| H^i | " + " | ".join(_cell(table["cech"][d]) for d in degrees) + " |")
    print(f"Gamma: {_cell(table['gamma'])}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="koszulcech",
                                description="Koszul, Čech and (x - U) avatar computations over finite rings and Z.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("compute", help="run the tasks of a job config, writing report.json and report.md")
    c.add_argument("--config", required=True)
    c.add_argument("--out", required=True)
    v = sub.add_parser("verify", help="run a check suite")
    v.add_argument("--suite", required=True)
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    o = sub.add_parser("oracle", help="print the materialized Čech cohomology and Gamma")
    o.add_argument("--config", required=True)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compute":
            return cmd_compute(args.config, args.out)
        if args.command == "verify":
            return cmd_verify(args.suite, args.jobs, args.seed, args.out)
        return cmd_oracle(args.config)
    except (InvalidConfig, RingError, UnknownCheck) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UnsupportedInstance, InfiniteRing, TooLarge) as exc:
        print(f"unsupported instance: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
