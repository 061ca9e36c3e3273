"""Runs the CLI on every bundled problem and validates the JSON reports."""
import glob
import json
import os
import subprocess
import sys
import tempfile

import jsonschema

binary, root = sys.argv[1], sys.argv[2]
schema = json.load(open(os.path.join(root, "docs", "report.schema.json")))
runs = [[p] for p in sorted(glob.glob(os.path.join(root, "problems", "*.cartan")))]
runs.append([os.path.join(root, "problems", "lagrangian.cartan"), "--max-loops", "0"])
failed = 0
with tempfile.TemporaryDirectory() as tmp:
    for k, args in enumerate(runs):
        out = os.path.join(tmp, f"{k}.json")
        code = subprocess.run([binary, "run", *args, "--json", out], capture_output=True).returncode
        doc = json.load(open(out))
        try:
            jsonschema.validate(doc, schema)
            assert doc["exit_code"] == code, f"exit code {code} vs report {doc['exit_code']}"
            print("ok  ", " ".join(os.path.basename(a) for a in args), doc["outcome"])
        except (jsonschema.ValidationError, AssertionError) as e:
            failed += 1
            print("FAIL", args, str(e).splitlines()[0])
sys.exit(1 if failed else 0)
