import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ablevinson._fmt import fmt17
from ablevinson.cli import main


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_phase_shift_row_contract(tmp_path):
    out = tmp_path / "ps.csv"
    code, _, err = run(
        "phase-shift --model centrifugal --alpha 0.5 --beta 0 --R 1 --m 1 "
        f"--k-min 0.01 --k-max 50 --k-points 128 --output {out}".split()
    )
    assert code == 0, err
    rows = _rows(out)
    assert rows[0] == ["m", "k", "delta_rad"]
    ks = [float(r[1]) for r in rows[1:]]
    assert len(ks) == 128 and all(b > a for a, b in zip(ks, ks[1:]))
    side = json.loads(out.with_suffix(".json").read_text())
    ch = side["channels"][0]
    assert ch["m"] == 1
    assert ch["delta_at_zero"] - ch["delta_at_infinity"] == pytest.approx(-math.pi / 4, abs=1e-3 * math.pi)


def test_phase_shift_free_is_zero(tmp_path):
    out = tmp_path / "free.csv"
    code, _, _ = run(f"phase-shift --model free --m-range -1:1 --k-points 5 --output {out}".split())
    assert code == 0
    rows = _rows(out)[1:]
    assert len(rows) == 15 and all(float(r[2]) == 0.0 for r in rows)


def test_phase_shift_is_deterministic(tmp_path):
    texts = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        args = f"phase-shift --model flux-well --alpha 0.3 --V0 10 --m 0 --k-points 6 --output {out}"
        assert run(args.split())[0] == 0
        texts.append((out.read_bytes(), out.with_suffix(".json").read_bytes()))
    assert texts[0] == texts[1]


def test_phase_shift_seventeen_digits(tmp_path):
    out = tmp_path / "p.csv"
    run(f"phase-shift --model pure-flux --alpha 0.3 --m 1 --k-points 3 --output {out}".split())
    for _, k, d in _rows(out)[1:]:
        for text in (k, d):
            assert text == fmt17(float(text))
    assert len(_rows(out)[1][2].split("e")[0].lstrip("-").replace(".", "").lstrip("0")) >= 16


def test_malformed_table_exit_2(tmp_path):
    bad = tmp_path / "custom.csv"
    bad.write_text("rho,V\n1,2\n")
    code, _, err = run(f"phase-shift --model table --file {bad} --m 0 --output {tmp_path / 'x.csv'}".split())
    assert code == 2 and "rho,V,Phi" in err


@pytest.mark.parametrize(
    "args",
    [
        "phase-shift --model free --m 0 --k-min -1",
        "phase-shift --model free --m 0 --k-min 2 --k-max 1",
        "phase-shift --model free",
        "phase-shift --model nope --m 0",
        "phase-shift --model centrifugal --alpha 0.5 --flux0 1 --m 0",
        "levinson --model free --m-range 3:1",
        "levinson --model free --tol 0",
        "cross-section --model free --m-max 0",
        "soliton --q 0",
        "soliton --q -1",
        "phase-shift --model free --m 0 --R nan",
    ],
)
def test_validation_exit_2(args, tmp_path):
    code, _, _ = run(args.split() + ["--output", str(tmp_path / "o.csv")] if args.startswith("phase") else args.split())
    assert code == 2


def test_levinson_returned_flux(tmp_path):
    out = tmp_path / "rep.json"
    code, stdout, _ = run(
        f"levinson --model returned-flux --flux0 3.14159265358979 --R 1 --m-range -3:3 --output {out}".split()
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert [r["m"] for r in data] == list(range(-3, 4))
    row = next(r for r in data if r["m"] == 1)
    assert row["lhs"] == pytest.approx(-math.pi / 4, abs=1e-3 * math.pi)
    assert stdout.splitlines()[0].startswith("m  lhs  rhs")


def test_levinson_free_single():
    code, stdout, _ = run("levinson --model free --m-range 0:0".split())
    assert code == 0
    assert stdout.splitlines()[1].split()[:3] == ["0", "0.0", "0.0"]


def test_levinson_failure_exit_1():
    code, _, _ = run("levinson --model returned-flux --m-range 1:1 --tol 1e-15".split())
    assert code == 1


def test_cross_section_outputs():
    code, stdout, _ = run("cross-section --model free --m-max 2".split())
    assert code == 0
    lines = stdout.splitlines()
    assert lines[0] == "m,delta_rad,sigma_partial"
    assert lines[-1] == "# total=0.0 converged=true"
    code, stdout, _ = run("cross-section --model pure-flux --alpha 0.5 --m-max 6".split())
    assert code == 0 and stdout.splitlines()[-1].endswith("converged=false")
    assert all(float(line.split(",")[2]) > 0 for line in stdout.splitlines()[1:-1])


def test_soliton_q1():
    code, stdout, _ = run("soliton --q 1 --m-range -4:4 --tol 0.0628".split())
    assert code == 0
    assert len(stdout.splitlines()) == 10


def test_models_listing():
    code, stdout, _ = run(["models"])
    assert code == 0
    names = [line.split()[0] for line in stdout.splitlines()[1:]]
    assert "soliton" in names and "table" in names


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ablevinson", "models"], capture_output=True, text=True)
    assert proc.returncode == 0 and "flux-well" in proc.stdout


def test_numerical_failure_exit_3(monkeypatch, tmp_path):
    import ablevinson.cli as cli
    from ablevinson.errors import MatchingError

    def boom(*args, **kwargs):
        raise MatchingError("sigma unstable under a shift of the matching radii")

    monkeypatch.setattr(cli, "phase_sweep", boom)
    code, _, err = run(f"phase-shift --model free --m 0 --output {tmp_path / 'o.csv'}".split())
    assert code == 3 and "matching radii" in err
