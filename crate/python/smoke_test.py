#!/usr/bin/env python3
"""Smoke test for the Python bindings.

Builds the extension module, imports it, and runs the two bundled example
systems through the parse -> validate -> embed -> co-simulate pipeline.
"""

import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def build_module() -> pathlib.Path:
    subprocess.run(
        ["cargo", "build", "-p", "blocklift-py", "--release"],
        cwd=ROOT,
        check=True,
    )
    so = ROOT / "target" / "release" / "libblocklift_py.so"
    if not so.exists():  # e.g. macOS
        so = ROOT / "target" / "release" / "libblocklift_py.dylib"
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="blocklift_py_"))
    shutil.copy2(so, tmp / "blocklift_py.so")
    return tmp


def main() -> None:
    sys.path.insert(0, str(build_module()))
    import blocklift_py as bl

    # MIMO Wiener-Hammerstein example: 17 lifted coordinates, 12 unique
    text = (ROOT / "fixtures" / "mimo_wiener_hammerstein.json").read_text()
    chain = bl.parse_model(text)
    assert chain.n_u == 2 and chain.n_y == 2
    print(chain.validate())
    assert not chain.predict_blti()

    full = bl.embed(chain, reduce_states=False)
    red = bl.embed(chain)
    assert full.n_z == 17, full.n_z
    assert red.n_z == 12, red.n_z
    assert red.model_class == "PITI", red.model_class
    assert len(red.a()) == 12 and len(red.a()[0]) == 12
    assert red.atlas()[0] == []  # the constant coordinate

    report = bl.compare(chain, input="gauss", seed=42, dt=1e-4, horizon=0.5)
    print("MIMO compare:", report)
    assert report["max_abs"] <= 1e-9, report

    # SISO parallel chain: 931 -> 103, bilinear without feedthrough
    text = (ROOT / "fixtures" / "siso_chain.json").read_text()
    chain = bl.parse_model(text)
    assert chain.predict_blti()
    red = bl.embed(chain)
    full = bl.embed(chain, reduce_states=False)
    assert (full.n_z, red.n_z) == (931, 103), (full.n_z, red.n_z)
    assert red.model_class == "BLTI_no_feedthrough"

    report = bl.compare(chain, input="multisine", dt=1e-3, horizon=2.0)
    print("SISO compare:", report)
    assert report["max_abs"] <= 1e-9, report

    # malformed input raises
    try:
        bl.parse_model("{not json")
    except ValueError as e:
        assert "parse error" in str(e)
    else:
        raise AssertionError("malformed model text must raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
