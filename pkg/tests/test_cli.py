import json

import pytest

from flexsym.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decompose(capsys):
    code, out, _ = run(capsys, "decompose", "x1 x0^2 x1^-1 x0")
    assert code == 0 and "L' = 5" in out
    code, out, _ = run(capsys, "decompose", "x0^3", "--json")
    obj = json.loads(out)
    assert obj["L'"] == 3 and obj["J"] == 0
    code, _, err = run(capsys, "decompose", "x1")
    assert code == 1 and "does not use x0" in err
    assert run(capsys, "decompose", "y7")[0] == 1


def test_itinerary(capsys):
    code, out, _ = run(capsys, "itinerary", "--word", "x0", "--map", "0->1", "--value", "0")
    assert out.splitlines()[:2] == ["t[1] = 1", "t[0] = 0"]
    code, out, _ = run(capsys, "trace", "--word", "x0", "--map", "0->1", "--value", "5")
    assert out.splitlines()[:2] == ["t[1] = c", "t[0] = 5"]
    code, out, _ = run(capsys, "trace", "--word", "x0^2", "--map", "3->4,4->3", "--value", "3")
    assert "collision at (0,2)" in out
    assert run(capsys, "trace", "--word", "x0 x1", "--map", "0->1", "--value", "0")[0] == 1
    assert run(capsys, "trace", "--word", "x0", "--map", "0->1,0->2", "--value", "0")[0] == 1


def test_family_and_fixpoints(capsys, tmp_path):
    fam = tmp_path / "family.txt"
    assert run(capsys, "build-family", "--count", "2", "--horizon", "40", "--out", str(fam))[0] == 0
    code, out, _ = run(capsys, "fixpoints", "--family", str(fam), "--word", "x0 x1^-1", "--window", "40", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["count"] <= rep["bound"]
    code, out, _ = run(capsys, "fixpoints", "--family", str(fam), "--max-len", "2", "--window", "30")
    assert code == 0 and out.strip().endswith("0 failing")
    assert run(capsys, "fixpoints", "--family", str(fam), "--word", "x0 x5", "--window", "5")[0] == 1
    assert run(capsys, "fixpoints", "--family", str(tmp_path / "nope"), "--word", "x0", "--window", "5")[0] == 1
    assert run(capsys, "build-family", "--count", "0", "--horizon", "4", "--out", str(fam))[0] == 1


@pytest.mark.parametrize(
    "src,dst,horizon",
    [("kind=qorder;scramble=", "kind=qorder;scramble=(0 3)", 50),
     ("kind=sections;scramble=", "kind=sections;scramble=(1 4)(2 7)", 100)],
)
def test_iso_end_to_end(capsys, tmp_path, src, dst, horizon):
    iso = tmp_path / "iso.txt"
    args = ["--from", src, "--to", dst]
    assert run(capsys, "build-iso", *args, "--horizon", str(horizon), "--out", str(iso))[0] == 0
    code, out, _ = run(capsys, "verify-iso", *args, "--map", str(iso), "--window", str(horizon))
    assert code == 0 and out.startswith("OK")
    # swap two images to break the map
    lines = iso.read_text().splitlines()
    k = next(i for i, ln in enumerate(lines) if ln.startswith("f: "))
    pairs = [p.split("->") for p in lines[k][3:].split(", ")]
    pairs[0][1], pairs[1][1] = pairs[1][1], pairs[0][1]
    lines[k] = "f: " + ", ".join("->".join(p) for p in pairs)
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "verify-iso", *args, "--map", str(bad), "--window", str(horizon))
    assert code == 2 and out.startswith("FAIL rel")


def test_properness(capsys):
    code, out, _ = run(capsys, "properness", "--window", "100", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["witness_fixed"] == 50


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert main([]) == 1
