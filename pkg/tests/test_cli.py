"""CLI behavior: output formats, exit codes, config diagnostics, determinism."""

import json

import pytest

from heatcalc.certificates import builtin_certificate, certificate_to_json
from heatcalc.cli import main, parse_config, ConfigError


SMALL_SCAN = {
    "mixture": [
        {"w": 0.5, "mu": 0.0, "var": 0.1},
        {"w": 0.5, "mu": 10.0, "var": 0.1},
    ],
    "t_grid": {"start": 0.05, "stop": 100, "points": 12, "spacing": "log"},
    "max_order": 2,
}

WT_SCAN = {
    "mixture": [{"w": 1.0, "mu": 0.0, "var": 1.0}],
    "t_grid": {"start": 0.1, "stop": 0.9, "points": 9, "spacing": "linear"},
}


class TestDerive:
    def test_order3_golden_line(self, capsys):
        assert main(["derive", "--order", "3"]) == 0
        out = capsys.readouterr().out.strip()
        assert out == "f3^2/f^1 + f2^3/f^2 - 3 f1^2 f2^2/f^3 + 6/5 f1^6/f^5"

    def test_order1(self, capsys):
        assert main(["derive", "--order", "1"]) == 0
        assert capsys.readouterr().out.strip() == "f1^2/f^1"

    def test_order4_coefficients_present(self, capsys):
        assert main(["derive", "--order", "4"]) == 0
        out = capsys.readouterr().out
        assert "90/7 f1^8/f^7" in out and "-f4^2/f^1" in out

    def test_bad_order(self):
        assert main(["derive", "--order", "0"]) == 1


class TestVerifyIdentities:
    def test_full_table(self, capsys):
        assert main(["verify-identities"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 13
        assert "13/13 identities verified" in out


class TestCertify:
    @pytest.mark.parametrize("order", ["2", "3", "4"])
    def test_builtin_orders(self, order, capsys):
        assert main(["certify", "--order", order]) == 0
        assert "VERIFIED (exact)" in capsys.readouterr().out

    def test_certificate_file(self, tmp_path, capsys):
        path = tmp_path / "order4.json"
        path.write_text(certificate_to_json(builtin_certificate(4)))
        assert main(["certify", "--order", "4", "--cert", str(path)]) == 0
        assert "VERIFIED (exact)" in capsys.readouterr().out

    def test_corrupted_certificate_fails_with_exit_2(self, tmp_path, capsys):
        payload = json.loads(certificate_to_json(builtin_certificate(3)))
        payload["remainder"] = [["f1^6/f^5", "1/44"]]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(payload))
        assert main(["certify", "--order", "3", "--cert", str(path)]) == 2
        assert "FAILED" in capsys.readouterr().out

    def test_order_mismatch_is_usage_error(self, tmp_path):
        path = tmp_path / "order3.json"
        path.write_text(certificate_to_json(builtin_certificate(3)))
        assert main(["certify", "--order", "4", "--cert", str(path)]) == 1

    def test_no_builtin_for_order_5(self):
        assert main(["certify", "--order", "5"]) == 1

    def test_search_writes_certificate(self, tmp_path, capsys):
        out_path = tmp_path / "found.json"
        code = main(
            [
                "certify",
                "--order",
                "3",
                "--search",
                "--starts",
                "2",
                "--out",
                str(out_path),
            ]
        )
        assert code == 0
        assert out_path.exists()
        assert "re-verified exactly" in capsys.readouterr().out


class TestConfigParsing:
    def test_valid(self):
        cfg = parse_config(json.dumps(SMALL_SCAN))
        assert cfg.t_points == 12
        assert cfg.t_spacing == "log"
        assert len(cfg.mixture.components) == 2

    @pytest.mark.parametrize(
        "mutate,needle",
        [
            (lambda d: d.update(mixture=[]), "mixture"),
            (lambda d: d["mixture"][0].update(w=-1), "mixture[0].w"),
            (lambda d: d["mixture"][0].pop("var"), "mixture[0].var"),
            (lambda d: d["t_grid"].pop("points"), "t_grid.points"),
            (lambda d: d["t_grid"].update(start=0), "t_grid.start"),
            (lambda d: d["t_grid"].update(spacing="cubic"), "t_grid.spacing"),
            (lambda d: d.update(max_order=9), "max_order"),
        ],
    )
    def test_field_diagnostics(self, mutate, needle):
        import re

        payload = json.loads(json.dumps(SMALL_SCAN))
        mutate(payload)
        with pytest.raises(ConfigError, match=re.escape(needle)):
            parse_config(json.dumps(payload))

    def test_invalid_json_reports_line(self):
        with pytest.raises(ConfigError, match="line"):
            parse_config("{\n  broken\n}")


class TestScanCommand:
    def test_scan_writes_csv_and_passes(self, tmp_path, capsys):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps(SMALL_SCAN))
        prefix = tmp_path / "out"
        assert main(["scan", "--config", str(cfg), "--out", str(prefix)]) == 0
        csv_text = (tmp_path / "out.csv").read_text()
        header = csv_text.splitlines()[0]
        assert header.startswith("t,h,J,d1_fd")
        assert len(csv_text.splitlines()) == 13

    def test_scan_csv_deterministic(self, tmp_path):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps(SMALL_SCAN))
        main(["scan", "--config", str(cfg), "--out", str(tmp_path / "a")])
        main(["scan", "--config", str(cfg), "--out", str(tmp_path / "b")])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_scan_svg_outputs(self, tmp_path):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps(SMALL_SCAN))
        prefix = tmp_path / "plots"
        assert main(["scan", "--config", str(cfg), "--out", str(prefix), "--svg"]) == 0
        for name in ("h", "J", "invJ", "logJ"):
            assert (tmp_path / f"plots_{name}.svg").exists()
            assert (tmp_path / f"plots_{name}_dd.svg").exists()
        text = (tmp_path / "plots_invJ.svg").read_text()
        assert text.startswith("<svg") and "polyline" in text

    def test_malformed_config_exit_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"mixture": "nope"}')
        assert main(["scan", "--config", str(cfg)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_missing_config_exit_1(self, tmp_path):
        assert main(["scan", "--config", str(tmp_path / "absent.json")]) == 1


class TestWtScanCommand:
    def test_wt_scan(self, tmp_path, capsys):
        cfg = tmp_path / "wt.json"
        cfg.write_text(json.dumps(WT_SCAN))
        prefix = tmp_path / "wt_out"
        assert main(["wt-scan", "--config", str(cfg), "--out", str(prefix)]) == 0
        text = (tmp_path / "wt_out.csv").read_text()
        assert text.splitlines()[0] == "t,s,hW,JW,hW_dd,JW_dd,txz_margin,txz_ok"

    def test_grid_must_stay_inside_unit_interval(self, tmp_path, capsys):
        payload = json.loads(json.dumps(WT_SCAN))
        payload["t_grid"]["stop"] = 1.5
        cfg = tmp_path / "wt.json"
        cfg.write_text(json.dumps(payload))
        assert main(["wt-scan", "--config", str(cfg)]) == 1
