"""
A custom experiment from a config document
==========================================

Experiments do not have to be presets. This one measures a Bell pair
(|00> + |11>)/sqrt(2) with a weak spin measurement on the left and a generic
two-outcome Kraus pair on the right. It is run through the same code path as
``cqt-sim run``.
"""
import json

from cqtsim.cli import run_config

r = 2**-0.5
doc = {
    "schema_version": 1,
    "experiment": {
        "label": "bell_pair",
        "factor_dims": [2, 2],
        "initial_state": {"vector": [[r, 0], [0, 0], [0, 0], [r, 0]]},
        "models": {
            "spin": {"type": "epsilon_spin", "eps": 0.05, "theta": 0.3},
            "weak": {"type": "kraus", "labels": ["a", "b"], "operators": [
                [[[0.8, 0], [0, 0]], [[0, 0], [0.6, 0]]],
                [[[0.6, 0], [0, 0]], [[0, 0], [0.8, 0]]],
            ]},
        },
        "events": [
            {"id": "left", "t": 0, "x": -1, "factor": 0, "model": "spin"},
            {"id": "right", "t": 0.5, "x": 1, "factor": 1, "model": "weak"},
        ],
    },
    "engine": "both",
    "mode": "enumerate",
}

report = run_config(doc, timestamp=False)
for engine, result in report["experiments"][0]["results"].items():
    print(engine, json.dumps(result["table"]))
    print("   ", result["statistics"]["correlators"])
