#!/usr/bin/env python3
"""Regenerate the golden files under tests/golden/.

Band diagrams of the reference diode at the four standard biases, and a
small seeded emission map. Regenerate only when an intentional physics or
format change invalidates the stored files.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import numpy as np  # noqa: E402

from dotdiode.device import load_reference_stack, build_mesh  # noqa: E402
from dotdiode.electrostatics import solve_bias  # noqa: E402
GOLDEN = pathlib.Path(__file__).resolve().parents[1] / "tests" / "golden"
BIASES = [-0.5, 0.0, 0.5, 1.0]


def main():
    GOLDEN.mkdir(exist_ok=True)
    stack = load_reference_stack()
    mesh = build_mesh(stack)
    for bias in BIASES:
        diagram = solve_bias(stack, mesh, bias)
        name = f"band_{bias:+.3f}V.csv".replace("+", "p").replace("-", "m")
        diagram.to_csv(GOLDEN / name)
        print("wrote", GOLDEN / name)

    import tempfile
    from dotdiode.cli import main as cli_main

    with tempfile.TemporaryDirectory() as tmp:
        rc = cli_main(["synthmap", "--seed", "42", "--vmin", "0.85", "--vmax", "1.35",
                       "--nv", "11", "--lmin", "1529", "--lmax", "1539", "--nl", "201",
                       "--out", tmp])
        assert rc == 0
        text = (pathlib.Path(tmp) / "emission_map.csv").read_text()
    (GOLDEN / "emission_map_small.csv").write_text(text)
    print("wrote", GOLDEN / "emission_map_small.csv")


if __name__ == "__main__":
    main()
