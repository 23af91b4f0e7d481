"""Runs the CLI on a few scenarios and validates each results document."""

import json
import pathlib
import subprocess
import sys

import jsonschema


def main():
    cli, schema_path, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    runs = {
        "harmonic": ["--builtin", "harmonic", "--mc-check", "10"],
        "split": ["--builtin", "vdp", "--step", "0.01", "--time", "0.3", "--split", "0.1:1", "--split", "0.2:2:dominant"],
        "crossing": ["--builtin", "rossler", "--step", "0.05", "--time", "0.2", "--max-params", "20"],
    }
    for name, args in runs.items():
        out = work / name
        subprocess.run([cli, "run", *args, "--out", str(out)], check=True, stdout=subprocess.DEVNULL)
        doc = json.loads((out / "results.json").read_text())
        jsonschema.validate(doc, schema)
        print(f"{name}: ok")


if __name__ == "__main__":
    main()
