"""Figure rendering from checked-in fixture tables."""

import os

import pytest

from figgen import FigureSpec, read_table, render
from figgen.cli import main

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fx(name):
    return os.path.join(FIXTURES, name)


class TestIo:
    def test_reads_csv_fixture(self):
        table = read_table(fx("pattern_fock_n5_tau09.csv"))
        assert table.command == "pattern"
        assert table.schema_version == "1"
        assert len(table.rows) == 181
        assert table.column("phi")[0] == 0.0

    def test_rejects_plain_csv(self, tmp_path):
        plain = tmp_path / "plain.csv"
        plain.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="not an nlisim table"):
            read_table(str(plain))

    def test_rejects_unknown_schema(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text('# nlisim-table {"schema_version": "999", "metadata": {}}\na\n1\n')
        with pytest.raises(ValueError, match="unsupported schema version"):
            read_table(str(bad))

    def test_missing_column(self):
        table = read_table(fx("distribution_fock_n9.csv"))
        with pytest.raises(ValueError, match="no column"):
            table.column("does_not_exist")


FIGURES = {
    "pattern_fock": ("pattern", ["pattern_fock_n5_tau02.csv",
                                 "pattern_fock_n5_tau05.csv",
                                 "pattern_fock_n5_tau09.csv"]),
    "pattern_coherent": ("pattern", ["pattern_coherent_n5_tau09.csv"]),
    "uncertainty": ("uncertainty", ["uncertainty_fock_n50.csv", "minima_fock_n50.csv"]),
    "scaling_fock": ("minima", ["scaling_fock.csv"]),
    "distribution": ("distribution", ["distribution_fock_n9.csv"]),
    "fisher": ("fisher", ["fisher_coherent_n5.csv"]),
    "scaling_coherent": ("minima", ["scaling_coherent.csv"]),
}


class TestRender:
    @pytest.mark.parametrize("name", sorted(FIGURES))
    def test_renders_png(self, tmp_path, name):
        kind, inputs = FIGURES[name]
        out = tmp_path / f"{name}.png"
        spec = FigureSpec(kind, [fx(p) for p in inputs], str(out))
        assert render(spec) == str(out)
        assert out.stat().st_size > 1000

    def test_svg_output(self, tmp_path):
        out = tmp_path / "fig.svg"
        render(FigureSpec("distribution", [fx("distribution_fock_n9.csv")], str(out)))
        assert out.read_text().startswith("<?xml")

    @pytest.mark.parametrize("name", sorted(FIGURES))
    def test_byte_stable(self, tmp_path, name):
        kind, inputs = FIGURES[name]
        paths = [fx(p) for p in inputs]
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        render(FigureSpec(kind, paths, str(a)))
        render(FigureSpec(kind, paths, str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_svg_byte_stable(self, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render(FigureSpec("fisher", [fx("fisher_coherent_n5.csv")], str(a)))
        render(FigureSpec("fisher", [fx("fisher_coherent_n5.csv")], str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_command_mismatch(self, tmp_path):
        out = tmp_path / "fig.png"
        with pytest.raises(ValueError, match="expected one of"):
            render(FigureSpec("pattern", [fx("distribution_fock_n9.csv")], str(out)))
        assert not out.exists()

    def test_empty_rows_no_file(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text(
            '# nlisim-table {"schema_version": "1", "metadata": {"command": "pattern"}}\n'
            "n_mean,tau,phi,n_out_mean,n_out_var\n"
        )
        out = tmp_path / "fig.png"
        with pytest.raises(ValueError, match="no data rows"):
            render(FigureSpec("pattern", [str(empty)], str(out)))
        assert not out.exists()

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError, match="unknown figure kind"):
            render(FigureSpec("heatmap", [fx("scaling_fock.csv")], str(tmp_path / "f.png")))

    def test_unsupported_format(self, tmp_path):
        with pytest.raises(ValueError, match="unsupported figure format"):
            render(FigureSpec("distribution", [fx("distribution_fock_n9.csv")],
                              str(tmp_path / "fig.pdf")))


class TestCli:
    def test_kind_inferred_from_metadata(self, tmp_path):
        out = tmp_path / "fig.png"
        assert main([fx("scaling_fock.csv"), "-o", str(out)]) == 0
        assert out.exists()

    def test_explicit_kind(self, tmp_path):
        out = tmp_path / "fig.png"
        assert main(["-k", "uncertainty", fx("uncertainty_fock_n50.csv"),
                     fx("minima_fock_n50.csv"), "-o", str(out)]) == 0
        assert out.exists()

    def test_mismatch_exits_nonzero(self, tmp_path, capsys):
        out = tmp_path / "fig.png"
        assert main(["-k", "fisher", fx("pattern_fock_n5_tau09.csv"), "-o", str(out)]) == 1
        assert "expected one of" in capsys.readouterr().err
        assert not out.exists()

    def test_missing_input_exits_nonzero(self, tmp_path, capsys):
        assert main([str(tmp_path / "nope.csv"), "-o", str(tmp_path / "f.png")]) == 1
        assert "error:" in capsys.readouterr().err
