import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from ngacsafe import documents as docs
from ngacsafe.cli import run
from ngacsafe.safety import verify_unsafety_certificate

FIXTURES = Path(__file__).parent / "fixtures"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, _ = call(*argv)
    return code, json.loads(out)


def shell(args, stdin=b""):
    return subprocess.run([sys.executable, "-m", "ngacsafe", *args], input=stdin, capture_output=True, check=False)


class TestCheckSafety:
    def test_safe_fixture(self):
        code, doc = call_json("check-safety", FIXTURES / "safe_model.json")
        assert code == 0
        assert doc["verdict"] == "safe"
        assert set(doc["stats"]) == {"tuplesChecked", "misEnumerated"}

    def test_witness_verifies(self):
        path = FIXTURES / "separation_model.json"
        code, doc = call_json("check-safety", path, "--witness")
        assert code == 0 and doc["verdict"] == "unsafe"
        m = docs.parse_policy(path.read_bytes())
        w = doc["witness"]
        assert verify_unsafety_certificate(m, w["user"], w["resource"], w["right"],
                                           docs.parse_sequence(m, w["sequence"]))

    def test_without_witness_flag_no_sequence(self):
        _, doc = call_json("check-safety", FIXTURES / "separation_model.json")
        assert "sequence" not in doc["witness"]

    def test_timing_flag(self):
        _, doc = call_json("check-safety", FIXTURES / "safe_model.json", "--timing")
        assert "elapsedMs" in doc["stats"]

    def test_jobs_agree(self):
        for name in ("separation_model.json", "mutex_2x333_model.json"):
            _, a = call_json("check-safety", FIXTURES / name, "--all-potential")
            _, b = call_json("check-safety", FIXTURES / name, "--all-potential", "--jobs", "2")
            assert a["verdict"] == b["verdict"]
            assert a.get("witness") == b.get("witness")

    @pytest.mark.parametrize("fixture", ["safe_model.json", "separation_model.json", "mutex_2x333_model.json"])
    def test_byte_identical(self, fixture):
        first = call("check-safety", FIXTURES / fixture, "--witness")[1]
        assert call("check-safety", FIXTURES / fixture, "--witness")[1] == first

    def test_budget_exit_code(self):
        code, doc = call_json("check-safety", FIXTURES / "mutex_2x333_model.json", "--max-mis", "10")
        assert code == 3
        assert doc["verdict"] == "error" and doc["error"]["kind"] == "limit"


class TestInputErrors:
    def test_missing_file(self, tmp_path):
        code, doc = call_json("check-safety", tmp_path / "nope.json")
        assert code == 2 and doc["error"]["kind"] == "io"

    def test_syntax_error(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"schema": "ngacsafe/1",\n "rights": [}')
        code, doc = call_json("validate", p)
        assert code == 2
        assert doc["error"]["kind"] == "document"
        assert "line 2" in doc["error"]["message"]

    def test_invalid_model(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({
            "schema": "ngacsafe/1",
            "universe": {"users": ["alice"]},
            "rights": ["read"],
            "initial": {"users": ["alice"], "edges": [{"kind": "userAssign", "src": "alice", "dst": "ghost"}]},
            "commands": [],
        }))
        code, doc = call_json("validate", p)
        assert code == 2 and doc["verdict"] == "invalid"
        code, doc = call_json("check-safety", p)
        assert code == 2 and doc["error"]["kind"] == "model"
        assert doc["error"]["diagnostics"]

    def test_validate_ok(self):
        code, doc = call_json("validate", FIXTURES / "safe_model.json")
        assert code == 0 and doc["verdict"] == "valid"

    def test_gen_bad_groups(self):
        code, doc = call_json("gen", "mutex", "--groups", "3,x")
        assert code == 2


class TestDacc:
    def test_k4_unreachable(self, tmp_path):
        code, out, _ = call("reduce-3col", FIXTURES / "k4.json")
        assert code == 0
        p = tmp_path / "k4-dacc.json"
        p.write_text(out)
        code, doc = call_json("solve-dacc", p)
        assert code == 0 and doc["verdict"] == "unreachable"

    def test_c5_reachable(self, tmp_path):
        p = tmp_path / "c5-dacc.json"
        p.write_text(call("reduce-3col", FIXTURES / "c5.json")[1])
        _, doc = call_json("solve-dacc", p)
        assert doc["verdict"] == "reachable"
        assert doc["witness"]["path"][0] == "s"

    def test_reduce_dacc_then_check(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(call("reduce-dacc", FIXTURES / "diamond.json")[1])
        _, doc = call_json("check-safety", p)
        _, dacc = call_json("solve-dacc", FIXTURES / "diamond.json")
        assert (doc["verdict"] == "unsafe") == (dacc["verdict"] == "reachable")


class TestGenAndBench:
    def test_triangles_piped_into_bench(self):
        gen = shell(["gen", "triangles", "3"])
        assert gen.returncode == 0
        bench = shell(["bench", "mis"], stdin=gen.stdout)
        assert bench.returncode == 0, bench.stderr
        assert json.loads(bench.stdout)["stats"]["misEnumerated"] == 27

    def test_mutex_generator_matches_fixture(self):
        _, out, _ = call("gen", "mutex", "--users", "2", "--groups", "3,3,3")
        assert out == (FIXTURES / "mutex_2x333_model.json").read_text()

    def test_bench_writes_plot_and_csv(self, tmp_path):
        png, csv_path = tmp_path / "mis.png", tmp_path / "mis.csv"
        code, doc = call_json("bench", "mis", "4", "--plot", png, "--csv", csv_path)
        assert code == 0
        assert [r["misEnumerated"] for r in doc["rows"]] == [3, 9, 27, 81]
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        lines = csv_path.read_text().splitlines()
        assert len(lines) == 5 and lines[0].startswith("label,vertices")

    def test_bench_no_timing_is_reproducible(self):
        a = call("bench", "mis", "3", "--no-timing")[1]
        assert a == call("bench", "mis", "3", "--no-timing")[1]
        assert "misMs" not in a

    def test_bench_safety_counts(self):
        code, doc = call_json("bench", "safety", FIXTURES / "mutex_2x333_model.json", "--no-timing")
        assert code == 0
        s = doc["stats"]
        assert doc["verdict"] == "safe"
        assert s["maxMisPerTuple"] == 729
        assert s["naiveSubsets"] == 2 ** 18

    def test_bench_mis_bad_count(self):
        assert call("bench", "mis", "zero")[0] == 2
