#!/usr/bin/env python3
"""Smoke test for the lcca_py extension module.

Builds the cdylib with cargo, imports it, and runs a simulate -> fit ->
recovery round trip plus a small class-count sweep.
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "lcca-py", "--release"], cwd=ROOT, check=True
    )
    built = ROOT / "target" / "release" / "liblcca_py.so"
    if not built.exists():  # e.g. macOS
        built = ROOT / "target" / "release" / "liblcca_py.dylib"
    stage = Path(tempfile.mkdtemp(prefix="lcca_py_"))
    shutil.copy(built, stage / "lcca_py.so")
    sys.path.insert(0, str(stage))
    import lcca_py

    return lcca_py


def truth_model_json():
    model = {
        "k": 2,
        "indicators": [
            {"name": "y0", "categories": ["a", "b", "c"], "reference_index": 0},
            {"name": "y1", "categories": ["p", "q"], "reference_index": 0},
            {"name": "y2", "categories": ["u", "v", "w"], "reference_index": 0},
        ],
        "measurement": {
            "probs": [
                [[0.7, 0.2, 0.1], [0.8, 0.2], [0.75, 0.15, 0.1]],
                [[0.1, 0.3, 0.6], [0.25, 0.75], [0.1, 0.2, 0.7]],
            ]
        },
        "membership": {"kind": "constant_prior", "priors": [0.6, 0.4]},
        "covariate_schema": [],
    }
    return json.dumps(model)


def main():
    lcca_py = build_and_import()

    assert lcca_py.n_params(3, [3, 5]) == 20
    assert lcca_py.n_params(2, [3, 5], dummy_count=4, covariates=True) == 17

    model_json = truth_model_json()
    data, labels = lcca_py.simulate(model_json, 4000, seed=11)
    assert len(data) == 4000 and len(labels) == 4000
    assert data.indicator_names == ["y0", "y1", "y2"]
    assert abs(data.total_weight - 4000.0) < 1e-9

    ll = lcca_py.log_likelihood(model_json, data)
    assert math.isfinite(ll) and ll < 0

    fit = lcca_py.fit(data, 2, seed=7, restarts=8)
    assert fit.converged and fit.k == 2
    assert abs(fit.loglik - ll) < 0.01 * abs(ll), "fit should be near the truth loglik"
    shares = sorted(fit.class_shares)
    assert abs(shares[0] - 0.4) < 0.05 and abs(shares[1] - 0.6) < 0.05, shares
    assert len(fit.assignments()) == 4000
    refit_json = fit.to_json()
    assert abs(lcca_py.log_likelihood(refit_json, data) - fit.loglik) < 1e-6

    best_k, rows = lcca_py.sweep(data, kmin=1, kmax=3, seed=3, restarts=4)
    assert best_k == 2, f"BIC picked {best_k}"
    assert [r["k"] for r in rows] == [1, 2, 3]
    assert all(r["converged"] for r in rows)

    # dataset round trips through files
    with tempfile.TemporaryDirectory() as d:
        data.write(f"{d}/ds.json", f"{d}/ds.csv")
        again = lcca_py.Dataset.read(f"{d}/ds.json", f"{d}/ds.csv")
        assert len(again) == len(data)
        assert abs(lcca_py.log_likelihood(model_json, again) - ll) < 1e-9

    print("smoke test: PASS")


if __name__ == "__main__":
    main()
