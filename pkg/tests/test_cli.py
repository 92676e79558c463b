import json
import math
from pathlib import Path

import pandas as pd
import pytest

from mdlt.main import run
from mdlt.models.transform import MembershipVerdict


OUTPUT_SCHEMA = json.loads(
    (Path(__file__).resolve().parents[1] / "schemas" / "output.schema.json").read_text(encoding="utf-8"))
JSON_TYPES = {"number": (int, float), "string": str, "boolean": bool, "null": type(None)}

DOCUMENTS = {
    "transform": {"function": {"name": "one", "dims": 2}, "points": [[1.0, 2.0]]},
    "invert": {"transform": {"name": "exp_decay", "dims": 2}, "method": "post_widder",
               "points": [[1.0, 1.0]], "post_widder": {"k": 8}},
    "region": {"function": {"name": "exp_decay", "dims": 2}, "probes": [[0.0, 0.0]],
               "quadrature": {"mode": "iterated", "rel_tol": 1e-5, "region_nodes": 20000}},
    "pairs": {"pair": "ml", "params": {"alpha": 1.0, "beta": 1.0, "omega": 1.0}, "points": [[2.0, 2.0]]},
    "solve": {"kind": "fractional", "problem": {
        "alpha1": 0.0, "alpha2": 1.0, "source": {"name": "one"},
        "grid": [{"start": 1.0, "stop": 1.0, "count": 1}, {"start": 2.0, "stop": 2.0, "count": 1}]}},
    "schedule": {"alpha": [3, 2, 0]},
}


def assert_matches_output_schema(table: dict):
    assert set(OUTPUT_SCHEMA["required"]) <= set(table)
    if OUTPUT_SCHEMA["additionalProperties"] is False:
        assert set(table) <= set(OUTPUT_SCHEMA["properties"])
    props = OUTPUT_SCHEMA["properties"]
    assert table["command"] in props["command"]["enum"]
    assert all(isinstance(c, str) for c in table["columns"])
    allowed = tuple(JSON_TYPES[name] for name in props["rows"]["items"]["additionalProperties"]["type"])
    for row in table["rows"]:
        assert list(row) == table["columns"]
        assert all(isinstance(v, allowed) for v in row.values())
    assert isinstance(table["summary"], dict)


@pytest.fixture
def invoke(tmp_path):
    """Write the document, run the command and return (exit code, output path)."""
    def call(command: str, document, fmt: str = "csv", seed: int = 0):
        source = tmp_path / f"{command}.json"
        source.write_text(document if isinstance(document, str) else json.dumps(document))
        output = tmp_path / f"{command}-out.{fmt}"
        code = run([command, "--input", str(source), "--output", str(output),
                    "--format", fmt, "--seed", str(seed)])
        return code, output
    return call


def test_transform_table(invoke):
    code, output = invoke("transform", {
        "function": {"name": "one", "dims": 2},
        "points": [[1.0, 2.0], [2.0, [1.0, 1.0]]],
    })
    assert code == 0
    frame = pd.read_csv(output)
    assert list(frame.columns[:4]) == ["lambda_1_re", "lambda_1_im", "lambda_2_re", "lambda_2_im"]
    assert frame["value_re"].iloc[0] == pytest.approx(0.5, rel=1e-8)
    expected = 1.0 / (2.0 * (1.0 + 1.0j))
    assert frame["value_re"].iloc[1] == pytest.approx(expected.real, rel=1e-8)
    assert frame["value_im"].iloc[1] == pytest.approx(expected.imag, rel=1e-8)
    assert frame["converged"].all()


def test_transform_divergent_point(invoke):
    code, output = invoke("transform", {
        "function": {"name": "one", "dims": 2},
        "points": [[-1.0, 1.0]],
    })
    assert code == 2
    assert math.isnan(pd.read_csv(output)["value_re"].iloc[0])


def test_invert_bromwich(invoke):
    code, output = invoke("invert", {
        "transform": {"name": "sep_pole", "dims": 2, "params": {"order": 2}},
        "method": "bromwich",
        "points": [[2.0, 3.0]],
        "contour": {"shape": "sector_rays"},
    })
    assert code == 0
    frame = pd.read_csv(output)
    assert list(frame.columns[:2]) == ["t_1", "t_2"]
    assert frame["value_re"].iloc[0] == pytest.approx(6.0, abs=1e-6)


def test_invert_post_widder_json(invoke):
    code, output = invoke("invert", {
        "transform": {"name": "exp_decay", "dims": 2},
        "method": "post_widder",
        "points": [[1.0, 1.0]],
        "post_widder": {"k": 32},
    }, fmt="json")
    assert code == 0
    table = json.loads(output.read_text(encoding="utf-8"))
    assert table["command"] == "invert"
    assert table["summary"]["method"] == "post_widder"
    assert table["rows"][0]["value_re"] == pytest.approx((32.0 / 33.0) ** 66, rel=1e-10)
    assert "exit_code" not in table


def test_invert_unknown_method(invoke):
    code, _ = invoke("invert", {
        "transform": {"name": "exp_decay"}, "method": "talbot", "points": [[1.0, 1.0]],
    })
    assert code == 1


def test_invert_nonpositive_time(invoke):
    code, _ = invoke("invert", {
        "transform": {"name": "exp_decay"}, "method": "bromwich", "points": [[0.0, 1.0]],
    })
    assert code == 1


def test_pairs_exponential(invoke):
    code, output = invoke("pairs", {
        "pair": "ml",
        "params": {"alpha": 1.0, "beta": 1.0, "omega": 1.0},
        "points": [[2.0, 2.0]],
    })
    assert code == 0
    frame = pd.read_csv(output)
    assert frame["closed_form_re"].iloc[0] == pytest.approx(1.0, rel=1e-12)
    assert frame["rel_error"].iloc[0] < 1e-5


def test_pairs_below_abscissa(invoke):
    code, _ = invoke("pairs", {
        "pair": "ml",
        "params": {"alpha": 1.0, "beta": 1.0, "omega": 1.0},
        "points": [[0.5, 2.0]],
    })
    assert code == 1


def test_schedule(invoke):
    code, output = invoke("schedule", {"alpha": [3, 2, 0]})
    assert code == 0
    frame = pd.read_csv(output)
    assert frame["trace"].tolist() == [
        "u^(3,0,0)(t1,0,t3)",
        "u^(3,1,0)(t1,0,t3)",
        "u^(0,0,0)(0,t2,t3)",
        "u^(1,0,0)(0,t2,t3)",
        "u^(2,0,0)(0,t2,t3)",
    ]
    assert frame["step"].tolist() == [1, 2, 3, 4, 5]


def test_schedule_rejects_bad_order(invoke):
    code, _ = invoke("schedule", {"alpha": [1, 1], "axis_order": [2, 2]})
    assert code == 1


def test_region(invoke):
    code, output = invoke("region", {
        "function": {"name": "exp_decay", "dims": 2},
        "probes": [[0.0, 0.0], [-2.0, 1.0]],
        "quadrature": {"mode": "iterated", "rel_tol": 1e-5, "region_nodes": 20000},
    }, fmt="json")
    assert code == 0
    table = json.loads(output.read_text(encoding="utf-8"))
    verdicts = [row["verdict"] for row in table["rows"]]
    assert verdicts == [MembershipVerdict.IN_OMEGA_ABS.value, MembershipVerdict.OUTSIDE.value]


def test_solve_fractional(invoke):
    code, output = invoke("solve", {
        "kind": "fractional",
        "problem": {
            "alpha1": 0.0, "alpha2": 1.0,
            "source": {"name": "one"},
            "grid": [{"start": 1.0, "stop": 1.0, "count": 1}, {"start": 2.0, "stop": 2.0, "count": 1}],
        },
    })
    assert code == 0
    frame = pd.read_csv(output)
    assert frame["u_re"].iloc[0] == pytest.approx(2.0, abs=1e-4)


def test_solve_invalid_problem(invoke):
    code, _ = invoke("solve", {"kind": "fractional", "problem": {"alpha1": 2.5, "alpha2": 1.0}})
    assert code == 1


def test_invalid_json(invoke):
    code, _ = invoke("transform", "{not json")
    assert code == 1


def test_missing_input(tmp_path):
    assert run(["transform", "--input", str(tmp_path / "absent.json"),
                "--output", str(tmp_path / "out.csv")]) == 1


def test_unknown_function(invoke):
    code, _ = invoke("transform", {"function": {"name": "no_such_function"}, "points": [[1.0, 1.0]]})
    assert code == 1


def test_output_is_deterministic(invoke, tmp_path):
    document = {
        "transform": {"name": "exp_decay", "dims": 2},
        "method": "bromwich",
        "points": [[0.5, 1.0], [1.0, 2.0]],
        "contour": {"shape": "sector_rays"},
    }
    _, first = invoke("invert", document, seed=7)
    content = first.read_bytes()
    _, second = invoke("invert", document, seed=7)
    assert second.read_bytes() == content


@pytest.mark.parametrize("command", sorted(DOCUMENTS))
def test_json_output_matches_schema(invoke, command):
    code, output = invoke(command, DOCUMENTS[command], fmt="json")
    assert code == 0
    table = json.loads(output.read_text(encoding="utf-8"))
    assert table["command"] == command
    assert_matches_output_schema(table)
