"""Every CLI report validates against its shipped schema; exit codes follow the
usage (2) / module error (1) split."""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema

CLI, SCHEMAS = sys.argv[1], sys.argv[2]
failures = []


def schema_for(tag):
    with open(os.path.join(SCHEMAS, f"{tag}.schema.json")) as f:
        return json.load(f)


def run(args, env=None, cwd=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=env, cwd=cwd)


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name}" + (f": {detail}" if detail and not ok else ""))
    if not ok:
        failures.append(name)


def validated(name, args, want_exit=0, **kw):
    p = run(args, **kw)
    if p.returncode != want_exit:
        check(name, False, f"exit {p.returncode}, stderr {p.stderr.strip()[:200]}")
        return None
    try:
        report = json.loads(p.stdout)
        jsonschema.validate(report, schema_for(report["report"]))
    except (ValueError, KeyError, jsonschema.ValidationError) as e:
        check(name, False, str(e).splitlines()[0])
        return None
    check(name, True)
    return report


fine = ["--h", "0.03125"]
runs = {
    "gen": ["gen", "--fixture", "branched_w32", "--h", "0.125"],
    "excess four_hp": ["excess", "--fixture", "four_half_planes", "--param", "m=1", *fine],
    "excess pair": ["excess", "--fixture", "holo_pair_curved", *fine],
    "fit": ["fit", "--fixture", "holo_pair_curved", "--h", "0.0625", "--restarts", "1"],
    "decay singular graph": ["decay", "--fixture", "four_half_planes", "--param", "m=1", "--param", "shift=0.05",
                             "--h", "0.015625", "--J", "2", "--singular-graph", "--center", "0.05,0,0,0"],
    "decompose": ["decompose", "--fixture", "branched_w32", "--h", "0.0625", "--loops", "3"],
    "classify-link": ["classify-link", "--fixture", "four_half_planes", "--M", "128"],
    "verify-stationary": ["verify-stationary", "--fixture", "four_half_planes", "--h", "0.015625"],
    "dehomogenize planted": ["dehomogenize", "--fixture", "four_half_planes", "--param", "m=1", "--h", "0.0625",
                             "--source", "planted"],
    "dehomogenize graph": ["dehomogenize", "--fixture", "four_half_planes", "--param", "m=1", "--h", "0.0625"],
    "density": ["density", "--fixture", "four_half_planes", "--center", "0", "--rho", "0.25"],
}
reports = {name: validated(name, args) for name, args in runs.items()}

seen = {r["report"] for r in reports.values() if r}
for tag in ["grid", "excess", "fit", "decay", "decompose", "classify-link", "verify-stationary", "dehomogenize",
            "density"]:
    check(f"report type {tag} exercised", tag in seen)

d = reports["density"]
if d:
    check("density at the four half-line vertex is about 2", abs(d["result"]["ratio"] - 2.0) < 0.1,
          str(d["result"]["ratio"]))
lk = reports["classify-link"]
if lk:
    check("four half-planes link verdict", lk["result"]["verdict"] == "four_half_circles", lk["result"]["verdict"])

with tempfile.TemporaryDirectory() as tmp:
    csv = os.path.join(tmp, "decay.csv")
    rep = validated("decay curved pair", ["decay", "--fixture", "holo_pair_curved", "--J", "5", "--h", "0.00390625",
                                          "--csv", csv])
    if rep:
        with open(csv) as f:
            rows = f.read().splitlines()
        check("decay CSV has five scale rows", len(rows) == 6, str(len(rows)))
        slope = rows[-1].rsplit(",", 1)[1] if rows else ""
        check("decay slope about 2", slope != "" and abs(float(slope) - 2.0) < 0.15, slope)

    tol = os.path.join(tmp, "tol.json")
    with open(tol, "w") as f:
        json.dump({"balance": 0.05}, f)
    env = dict(os.environ, TWOGRAPH_TOLERANCES=tol)
    rep = validated("tolerance file from the environment", runs["classify-link"], env=env)
    if rep:
        check("environment tolerance recorded", rep["config"]["tolerances"]["balance"] == 0.05)

# module errors: exit 1 and a structured error report
errors = {
    "center of the wrong dimension": (["density", "--fixture", "four_half_planes", "--center", "1,2"],
                                      "dimension_mismatch"),
    "fixture without a reference cone": (["excess", "--fixture", "lo_two_valued", "--h", "0.25"], "invalid_input"),
    "unknown fixture": (["density", "--fixture", "no_such"], "invalid_input"),
    "unreliable tangents": (["verify-stationary", "--fixture", "four_half_planes", "--h", "0.03125"], "precondition"),
    "missing grid file": (["excess", "--grid", "/nonexistent/grid.json"], "invalid_input"),
}
for name, (args, kind) in errors.items():
    rep = validated(name, args, want_exit=1)
    if rep:
        check(f"{name} kind", rep["error"]["kind"] == kind, rep["error"]["kind"])

# usage errors: exit 2 with help text and no report
for name, args in {
    "no command": [],
    "unknown command": ["frobnicate"],
    "unknown flag": ["density", "--bogus"],
    "malformed param": ["gen", "--param", "a"],
    "non-numeric param": ["gen", "--param", "a=b"],
    "negative spacing": ["gen", "--h", "-1"],
}.items():
    p = run(args)
    check(f"usage: {name}", p.returncode == 2 and p.stdout == "", f"exit {p.returncode}")
with tempfile.TemporaryDirectory() as tmp:
    bad = os.path.join(tmp, "tol.json")
    with open(bad, "w") as f:
        json.dump({"no_such_tolerance": 1}, f)
    p = run(["density", "--tolerances", bad])
    check("usage: unknown tolerance", p.returncode == 2, f"exit {p.returncode}")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
