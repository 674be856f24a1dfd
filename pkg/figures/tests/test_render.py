import csv
import math
from pathlib import Path

import pytest

from figures import (
    FigureSpec,
    SchemaError,
    load_rows,
    ratio_series,
    reference_a,
    render,
    series_by_procedure,
)
from figures.cli import main as cli_main

FIXTURES = Path(__file__).parent / "fixtures"


def svg_text(path: Path) -> str:
    data = path.read_text()
    assert path.stat().st_size > 0
    return data


class TestLoading:
    def test_fixture_parses(self):
        rows = load_rows(FIXTURES / "bprime_sweep.csv")
        assert {r.k for r in rows} == set(range(1, 11))
        assert {r.procedure for r in rows} == {"proposed"}

    def test_missing_column_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("procedure,sweep_value,k,mean\nproposed,0.0,1,5.0\n")
        with pytest.raises(SchemaError, match="missing columns"):
            load_rows(bad)

    def test_bad_value_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        header = "procedure,sweep_value,k,mean,se,fwe1,fwe2,trials,mean_tstop,se_tstop"
        bad.write_text(header + "\nproposed,0.0,one,5.0,0.1,0,0,10,9,1\n")
        with pytest.raises(SchemaError):
            load_rows(bad)

    def test_empty_rejected(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("procedure,sweep_value,k,mean,se,fwe1,fwe2,trials,mean_tstop,se_tstop\n")
        with pytest.raises(SchemaError):
            load_rows(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_rows(tmp_path / "nope.csv")


class TestSeries:
    def test_series_sorted_by_sweep(self):
        rows = load_rows(FIXTURES / "procedure_comparison.csv")
        nested = series_by_procedure(rows)
        assert set(nested) == {"proposed", "follow_the_leader", "oracle"}
        x, means, ses = nested["oracle"][1]
        assert x == sorted(x) == [4.0, 6.0, 8.0]
        assert len(means) == len(ses) == 3

    def test_bprime_fixture_kge6_spread_within_its_own_ses(self):
        # the k >= 6 curves must sit on top of each other relative to the
        # CSV's own standard errors, at every sweep point
        nested = series_by_procedure(load_rows(FIXTURES / "bprime_sweep.csv"))
        by_k = nested["proposed"]
        x = by_k[6][0]
        for idx in range(len(x)):
            values = [by_k[k][1][idx] for k in range(6, 11)]
            ses = [by_k[k][2][idx] for k in range(6, 11)]
            spread = max(values) - min(values)
            assert spread < 2 * max(math.hypot(a, b) for a in ses for b in ses)

    def test_bprime_fixture_k1_minimum_inside_threshold_range(self):
        nested = series_by_procedure(load_rows(FIXTURES / "bprime_sweep.csv"))
        x, means, _ = nested["proposed"][1]
        b = reference_a(FigureSpec("bprime_sweep", FIXTURES / "bprime_sweep.csv", "unused.svg"))
        argmin = x[means.index(min(means))]
        assert b is not None and 0.0 <= argmin <= b

    def test_ratio_series_from_fixture(self):
        ratios = ratio_series(load_rows(FIXTURES / "oracle_ratio.csv"))
        assert set(ratios) == set(range(1, 11))
        x, values = ratios[1]
        assert x == [4.0, 6.0, 8.0]
        assert all(v > 0.9 for v in values)  # proposed can't beat the oracle by much

    def test_ratio_identity_input_is_flat_one(self, tmp_path):
        # duplicate the proposed rows under the oracle label: ratios == 1.0
        source = FIXTURES / "bprime_sweep.csv"
        target = tmp_path / "identity.csv"
        with open(source) as handle:
            rows = list(csv.DictReader(handle))
        with open(target, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
            for row in rows:
                writer.writerow({**row, "procedure": "oracle"})
        ratios = ratio_series(load_rows(target))
        for _x, values in ratios.values():
            assert all(v == 1.0 for v in values)

    def test_ratio_needs_oracle(self):
        with pytest.raises(SchemaError, match="oracle"):
            ratio_series(load_rows(FIXTURES / "bprime_sweep.csv"))


class TestRender:
    def test_bprime_sweep_svg(self, tmp_path):
        out = render(FigureSpec("bprime_sweep", FIXTURES / "bprime_sweep.csv",
                                tmp_path / "fig1.svg"))
        text = svg_text(out)
        assert "exploration threshold b'" in text
        assert "expected detection time" in text
        assert "k=10" in text

    def test_comparison_grid_svg(self, tmp_path):
        out = render(FigureSpec("comparison_grid", FIXTURES / "procedure_comparison.csv",
                                tmp_path / "fig2.svg"))
        text = svg_text(out)
        assert "k=1" in text and "k=6..10" in text
        assert "follow_the_leader" in text

    def test_ratio_plot_svg(self, tmp_path):
        out = render(FigureSpec("ratio_plot", FIXTURES / "oracle_ratio.csv",
                                tmp_path / "fig3.svg"))
        text = svg_text(out)
        assert "ratio to oracle" in text

    def test_same_csv_same_bytes(self, tmp_path):
        spec_a = FigureSpec("ratio_plot", FIXTURES / "oracle_ratio.csv", tmp_path / "a.svg")
        spec_b = FigureSpec("ratio_plot", FIXTURES / "oracle_ratio.csv", tmp_path / "b.svg")
        assert render(spec_a).read_bytes() == render(spec_b).read_bytes()

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(SchemaError):
            FigureSpec("pie_chart", FIXTURES / "oracle_ratio.csv", tmp_path / "x.svg")

    def test_reference_a_sources(self, tmp_path):
        spec = FigureSpec("bprime_sweep", FIXTURES / "bprime_sweep.csv", tmp_path / "x.svg")
        assert reference_a(spec) == 8.0  # sibling manifest
        spec = FigureSpec("bprime_sweep", FIXTURES / "bprime_sweep.csv",
                          tmp_path / "x.svg", a=12.5)
        assert reference_a(spec) == 12.5  # explicit flag wins
        lone = tmp_path / "lone.csv"
        lone.write_bytes((FIXTURES / "bprime_sweep.csv").read_bytes())
        spec = FigureSpec("bprime_sweep", lone, tmp_path / "x.svg")
        assert reference_a(spec) is None  # no manifest, no flag

    def test_png_output(self, tmp_path):
        out = render(FigureSpec("bprime_sweep", FIXTURES / "bprime_sweep.csv",
                                tmp_path / "fig.png"))
        assert out.stat().st_size > 0
        assert out.read_bytes()[:4] == b"\x89PNG"


class TestCli:
    def test_cli_renders(self, tmp_path):
        out = tmp_path / "fig.svg"
        code = cli_main(["bprime_sweep", "--in", str(FIXTURES / "bprime_sweep.csv"),
                         "--out", str(out)])
        assert code == 0
        assert out.stat().st_size > 0

    def test_cli_schema_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n1\n")
        code = cli_main(["ratio_plot", "--in", str(bad), "--out", str(tmp_path / "x.svg")])
        assert code == 2
        assert "schema error" in capsys.readouterr().err

    def test_cli_manifest_flag(self, tmp_path):
        out = tmp_path / "fig.svg"
        code = cli_main([
            "bprime_sweep",
            "--in", str(FIXTURES / "bprime_sweep.csv"),
            "--out", str(out),
            "--manifest", str(FIXTURES / "bprime_sweep.manifest.json"),
        ])
        assert code == 0
