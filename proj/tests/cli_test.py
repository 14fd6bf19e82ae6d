#!/usr/bin/env python3
"""End-to-end exercise of the command-line binary (path in argv[1])."""

import json
import math
import os
import subprocess
import sys
import tempfile

BIN = os.path.abspath(sys.argv[1])

failures = []
checks = 0


def check(ok, what):
    global checks
    checks += 1
    if not ok:
        failures.append(what)
        print(f"[FAIL] {what}")


def run(*args):
    return subprocess.run([BIN, *args], capture_output=True, text=True)


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f)


def write_loop_csv(path, rows):
    with open(path, "w") as f:
        f.write("theta,x,y,z\n")
        for k, (x, y, z) in enumerate(rows):
            f.write(f"{2 * math.pi * k / len(rows):.17g},{x:.17g},{y:.17g},{z:.17g}\n")


def main():
    root = tempfile.mkdtemp(prefix="magsphere_cli_", dir=os.getcwd())
    cfg = os.path.join(root, "cfg.json")
    out1 = os.path.join(root, "out1")
    write_json(cfg, {
        "field": {"preset": "linear_z"},
        "epsilon": 0.1,
        "loop_points": 64,
        "seeds": 6,
        "output_dir": out1,
    })

    # solve: the linear field keeps exactly two embedded solutions.
    r = run("solve", cfg)
    check(r.returncode == 0, f"solve exited {r.returncode}: {r.stderr.strip()}")
    report_path = os.path.join(out1, "solve_report.json")
    check(os.path.exists(report_path), "solve_report.json not written")
    report = json.load(open(report_path))
    check(len(report["runs"]) == 1, "expected a single epsilon run")
    sols = report["runs"][0]["solutions"]
    check(len(sols) == 2, f"expected 2 solutions, got {len(sols)}")
    for s in sols:
        check(s["embedded"], "solution not embedded")
        check(s["residual"] <= 1e-9, f"residual {s['residual']}")
        check(os.path.exists(os.path.join(out1, s["file"])), f"missing loop file {s['file']}")

    # byte determinism: the same configuration writes identical artifacts.
    out2 = os.path.join(root, "out2")
    cfg2 = os.path.join(root, "cfg2.json")
    write_json(cfg2, {**json.load(open(cfg)), "output_dir": out2})
    r = run("solve", cfg2)
    check(r.returncode == 0, f"second solve exited {r.returncode}")
    for name in ["solve_report.json"] + [s["file"] for s in sols]:
        a = open(os.path.join(out1, name), "rb").read()
        b = open(os.path.join(out2, name), "rb").read()
        check(a == b, f"{name} differs between identical runs")

    # melnikov-scan artifacts and their determinism.
    scan1 = os.path.join(root, "scan1")
    r = run("melnikov-scan", cfg, "--out", scan1)
    check(r.returncode == 0, f"melnikov-scan exited {r.returncode}: {r.stderr.strip()}")
    for name in ["melnikov_grid.csv", "critical_points.json", "distinctness.json"]:
        check(os.path.exists(os.path.join(scan1, name)), f"scan did not write {name}")
    cps = json.load(open(os.path.join(scan1, "critical_points.json")))
    check(not cps["degenerate_landscape"], "linear field flagged degenerate")
    kinds = sorted(p["kind"] for p in cps["critical_points"])
    check(kinds == ["max", "min"], f"critical kinds {kinds}")
    for p in cps["critical_points"]:
        check(abs(abs(p["z"][2]) - 1.0) <= 1e-5, f"critical point off the axis: {p['z']}")
        check(abs(abs(p["value"]) - math.pi) <= 1e-6, f"critical value {p['value']}")
    dist = json.load(open(os.path.join(scan1, "distinctness.json")))
    check(not dist["condition_holds"], "linear-field distinctness condition should fail")
    scan2 = os.path.join(root, "scan2")
    r = run("melnikov-scan", cfg, "--out", scan2)
    check(r.returncode == 0, "second scan failed")
    a = open(os.path.join(scan1, "melnikov_grid.csv"), "rb").read()
    b = open(os.path.join(scan2, "melnikov_grid.csv"), "rb").read()
    check(a == b, "melnikov_grid.csv differs between identical runs")

    # shoot: cross-validate a solution loop against the physical flow.
    sol_csv = os.path.join(out1, sols[0]["file"])
    shoot_out = os.path.join(root, "shoot")
    r = run("shoot", cfg, sol_csv, "--out", shoot_out)
    check(r.returncode == 0, f"shoot exited {r.returncode}: {r.stderr.strip()}")
    summary = json.load(open(os.path.join(shoot_out, "shoot_summary.json")))
    check(summary["closure_error"] <= 1e-8, f"closure {summary['closure_error']}")
    check(summary["aligned_distance"] <= 1e-5, f"aligned {summary['aligned_distance']}")
    check(summary["period_rel_error"] <= 1e-6, f"period gap {summary['period_rel_error']}")

    # verify: diagnostics of a solution land under the solver tolerances.
    r = run("verify", cfg, sol_csv)
    check(r.returncode == 0, f"verify exited {r.returncode}: {r.stderr.strip()}")
    diag = dict(line.split("= ") for line in r.stdout.strip().splitlines())
    check(diag["embedded"] == "true", "verify: not embedded")
    check(float(diag["speed_cv"]) <= 1e-8, f"verify speed_cv {diag['speed_cv']}")
    check(float(diag["curvature_error_max"]) <= 1e-6,
          f"verify curvature error {diag['curvature_error_max']}")

    # verify on a raw great circle crossing the poles: the field does not
    # vanish there, so the leftover residual is of order epsilon.
    circle = os.path.join(root, "meridian.csv")
    n = 64
    write_loop_csv(circle, [(math.cos(2 * math.pi * k / n), 0.0, math.sin(2 * math.pi * k / n))
                            for k in range(n)])
    r = run("verify", cfg, circle)
    check(r.returncode == 0, "verify on a meridian should succeed")
    diag = dict(line.split("= ") for line in r.stdout.strip().splitlines())
    check(0.01 <= float(diag["residual_sup"]) <= 0.2,
          f"meridian residual {diag['residual_sup']} not of order epsilon")

    # landscape: one grid row per seed, deterministic header.
    land_out = os.path.join(root, "land")
    r = run("landscape", cfg, "--out", land_out)
    check(r.returncode == 0, f"landscape exited {r.returncode}: {r.stderr.strip()}")
    lines = open(os.path.join(land_out, "landscape.csv")).read().strip().splitlines()
    check(lines[0] == "z_x,z_y,z_z,E,E0", f"landscape header {lines[0]}")
    check(len(lines) == 1 + 6, f"landscape rows {len(lines) - 1}, expected 6")

    # flag precedence: command-line overrides beat the file.
    flag_out = os.path.join(root, "flagged")
    r = run("solve", cfg, "--epsilon", "0.05", "--loop-points", "64", "--out", flag_out)
    check(r.returncode == 0, f"override solve exited {r.returncode}")
    flagged = json.load(open(os.path.join(flag_out, "solve_report.json")))
    check(len(flagged["runs"]) == 1 and flagged["runs"][0]["epsilon"] == 0.05,
          "epsilon override not applied")

    # exit 2: configuration and input-file problems.
    r = run("solve", os.path.join(root, "missing.json"))
    check(r.returncode == 2, f"missing config gave {r.returncode}")
    bad_field = os.path.join(root, "bad_field.json")
    write_json(bad_field, {"field": {"preset": "no_such"}, "epsilon": 0.1})
    r = run("solve", bad_field)
    check(r.returncode == 2, f"malformed field gave {r.returncode}")
    garbled = os.path.join(root, "garbled.csv")
    with open(garbled, "w") as f:
        f.write("this is not a loop\n")
    r = run("verify", cfg, garbled)
    check(r.returncode == 2, f"garbled loop CSV gave {r.returncode}")
    off_sphere = os.path.join(root, "off_sphere.csv")
    write_loop_csv(off_sphere, [(2.0, 0.0, 0.0)] * 64)
    r = run("verify", cfg, off_sphere)
    check(r.returncode == 2, f"off-sphere loop CSV gave {r.returncode}")

    # exit 4: structurally invalid curve.
    constant = os.path.join(root, "constant.csv")
    write_loop_csv(constant, [(1.0, 0.0, 0.0)] * 64)
    r = run("verify", cfg, constant)
    check(r.returncode == 4, f"constant loop gave {r.returncode}")

    if failures:
        print(f"{len(failures)} of {checks} checks failed")
        return 1
    print(f"all {checks} checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
