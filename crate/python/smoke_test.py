"""Smoke test for the dspoll extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`.
"""

import json
import math
import pathlib
import sys
import tempfile

import dspoll

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)
    print("ok:", msg)


def main():
    omega = dspoll.Polyhedron.from_bounds([0.0, 0.0], [1.0, 1.0])
    check(omega.n == 2 and len(omega) == 4, "box has 4 constraints")
    check(omega.is_feasible([0.5, 0.5]), "centre is feasible")
    p = omega.project([2.0, -1.0])
    check(abs(p[0] - 1.0) < 1e-9 and abs(p[1]) < 1e-9, "projection onto box")

    ps = dspoll.polling_set(omega, [0.0, 0.0], 0.5, "full")
    check(len(ps.directions) >= 2, f"polling set at a corner has {len(ps.directions)} directions")
    lam = dspoll.estimate_lambda(ps.directions, [0.0, 0.0], 0.5, omega, quick=True)
    check(lam >= 1.0 - 1e-9 and math.isfinite(lam), f"lambda estimate {lam:.4f}")

    prob = dspoll.Problem.load(str(CORPUS / "hs21.json"))
    res = dspoll.solve(prob, "full")
    check(abs(res.f - prob.f_ref) <= 1e-4 * max(1.0, abs(prob.f_ref)), f"hs21 f={res.f:.6f} ref={prob.f_ref}")
    check(prob.omega.is_feasible(res.x), "solution is feasible")
    check(all(b >= a for a, b in zip(res.best_history[1:], res.best_history)), "best history is monotone")

    ex = dspoll.Problem.from_json(json.dumps({
        "name": "line_bound",
        "n": 1,
        "objective": "-x1",
        "constraints": [{"a": [1.0], "b": 1.1}],
        "x0": [0.0],
    }))
    full = dspoll.solve(ex, "full").f
    tangent = dspoll.solve(ex, "t").f
    check(full == -1.1 and tangent > full, f"line_bound full={full} t={tangent}")
    check(abs(ex.criticality([1.1])) < 1e-12 and ex.criticality([0.0]) > 0, "criticality measure")

    try:
        dspoll.solve(prob, "bogus")
        check(False, "unknown strategy rejected")
    except ValueError:
        check(True, "unknown strategy rejected")

    with tempfile.TemporaryDirectory() as tmp:
        out = pathlib.Path(tmp) / "results"
        n_prob, n_runs, failed = dspoll.bench(str(CORPUS), str(out), ["t", "full"])
        check(n_runs == 2 * n_prob and failed == 0, f"bench ran {n_runs} runs")
        files = dspoll.profiles(str(out), str(pathlib.Path(tmp) / "profiles"))
        check(any(f.endswith(".svg") for f in files), f"profiles wrote {len(files)} files")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
