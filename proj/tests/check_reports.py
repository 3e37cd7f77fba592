#!/usr/bin/env python3
"""Run every CLI subcommand on a small config and validate report.json against the published schema."""
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema

CASES = {
    "pv": ({"curve": {"builtin": "parabola-graph", "params": [0.5]},
            "density": {"builtin": "holder-power", "params": [0.5, 0.1]}, "targets": [0.0, 0.3]}, 0),
    "transform": ({"curve": {"builtin": "circle", "params": [1]}, "density": {"builtin": "linear", "params": [1, 0]},
                   "points": [[0, 0], [0.5, 0.5], [2, 0]]}, 0),
    "boundary": ({"curve": {"builtin": "circle", "params": [1]}, "density": {"builtin": "constant", "params": [1]},
                  "targets": [0.0, 2.0]}, 0),
    "converge": ({"curve": {"builtin": "segment", "params": [-1, 1]},
                  "density": {"builtin": "constant", "params": [1]}, "targets": [0.0],
                  "settings": {"depth": 24}}, 0),
    "verify-jump": ({"curve": {"builtin": "segment", "params": [-1, 1]}, "density": {"builtin": "step"},
                     "targets": [0.0]}, 2),
    "classify": ({"curve": {"builtin": "segment", "params": [-1, 1]},
                  "density": {"builtin": "dini-log"}}, 0),
    "exists": ({"density": {"builtin": "holder-power", "params": [0.5]}}, 0),
}


def main() -> int:
    cli, schema_path, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    failures = 0
    for op, (body, want_rc) in CASES.items():
        cfg = {"schema": 1, "operation": op, "seed": 5, **body}
        cfg_path = work / f"{op}.json"
        cfg_path.write_text(json.dumps(cfg, indent=2))
        out = work / op
        proc = subprocess.run([cli, op, "--config", str(cfg_path), "--out", str(out)], capture_output=True, text=True)
        problems = []
        if proc.returncode != want_rc:
            problems.append(f"exit {proc.returncode}, expected {want_rc}: {proc.stderr.strip()}")
        report_path = out / "report.json"
        if report_path.exists():
            text = report_path.read_text()
            report = json.loads(text)
            problems += [f"{'/'.join(map(str, e.absolute_path))}: {e.message}" for e in validator.iter_errors(report)]
            if json.loads(json.dumps(report)) != report:
                problems.append("report does not round-trip")
            if report.get("seed") != 5:
                problems.append("seed not recorded")
            for r in report.get("results", []):
                for key in ("trace_file", "file"):
                    if key in r and not (out / r[key]).exists():
                        problems.append(f"missing {r[key]}")
                for side in ("left", "right"):
                    if isinstance(r.get(side), dict) and not (out / r[side]["file"]).exists():
                        problems.append(f"missing {r[side]['file']}")
        else:
            problems.append("no report.json")
        status = "ok" if not problems else "FAIL"
        print(f"{op}: {status}")
        for p in problems:
            print(f"  {p}")
        failures += bool(problems)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
