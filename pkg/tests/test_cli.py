import json
import re
import subprocess
import sys

import pytest

from pokerrule import cli
from pokerrule.datagen import GenConfig, generate_dataset, read_csv, write_csv
from pokerrule.game import CardDistribution, GameSpec


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def clairvoyance_file(tmp_path, clairvoyance_spec):
    path = tmp_path / "clair.json"
    path.write_text(clairvoyance_spec.to_json())
    return path


@pytest.fixture(scope="module")
def pot_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "pot.csv"
    write_csv(generate_dataset(GenConfig(games_per_bet_size=40, bet_sizes=(1.0,))), path)
    return path


@pytest.fixture(scope="module")
def multi_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "multi.csv"
    write_csv(generate_dataset(GenConfig(games_per_bet_size=20)), path)
    return path


def test_solve_clairvoyance(clairvoyance_file, capsys, tmp_path):
    out_json = tmp_path / "report.json"
    code, out, err = run(["solve", clairvoyance_file, "--out", out_json], capsys)
    assert code == 0
    lines = out.splitlines()
    start = lines.index("Player 1, root:")
    block = lines[start + 1:start + 3]
    assert block[0].startswith("Card 1: Check pr. 0.4") or block[0].startswith("Card 1: Check pr. 0.5")
    m = re.match(r"Card 10: (.*)$", block[1])
    assert m and "Bet 1 pr. 1" in m.group(1)
    assert any(line.startswith("exploitability: ") for line in lines)
    assert any(line.startswith("game_value: 0.2") for line in lines)
    report = json.loads(out_json.read_text())
    assert report["strategies"]["P1/root/card10"]["bet 1"] >= 0.98
    assert report["converged"] is True


def test_solve_malformed_weights(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 2, "p": [0.5, 0.4], "q": [0.5, 0.5], "pot": 1, "stack": 1,
                                "p1_bets": [1], "p2_bets": [1]}))
    code, out, err = run(["solve", path], capsys)
    assert code == 2
    assert "p" in err and "sum" in err


def test_solve_bad_json_and_missing(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["solve", path], capsys)[0] == 2
    assert run(["solve", tmp_path / "missing.json"], capsys)[0] == 1


def test_gen_determinism_and_summary(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code, out, err = run(["gen", "--games", 100, "--bet-sizes", "1.0", "--seed", 7, "--out", a, "--workers", 1], capsys)
    assert code == 0
    assert re.fullmatch(r"rows=100 mean_exploitability=\S+ wall_time=\S+s\n", out)
    assert "solved 100/100" in err
    run(["gen", "--games", 100, "--bet-sizes", "1.0", "--seed", 7, "--out", b, "--workers", 2], capsys)
    assert a.read_bytes() == b.read_bytes()
    assert not (tmp_path / "a.csv.partial").exists()


def test_gen_counts(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _, _ = run(["gen", "--bet-sizes", "0.5,0.75,1.0", "--games", 10, "--out", out, "--workers", 1], capsys)
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 30
    assert sorted({r.bet_size for r in rows}) == [0.5, 0.75, 1.0]


@pytest.mark.parametrize("flags", [["--games", 0], ["--bet-sizes", "abc"], ["--bet-sizes", "2.0"],
                                   ["--workers", 0]])
def test_gen_invalid(tmp_path, capsys, flags):
    out = tmp_path / "d.csv"
    code, _, err = run(["gen", "--games", 5, "--out", out] + flags, capsys)
    assert code == 2
    assert not out.exists()
    assert err


def test_gen_missing_directory(tmp_path, capsys):
    code, _, _ = run(["gen", "--games", 2, "--out", tmp_path / "nope" / "d.csv"], capsys)
    assert code == 1


def test_fit_table1(pot_csv, capsys, tmp_path):
    out_csv = tmp_path / "fit.csv"
    code, out, _ = run(["fit", "--data", pot_csv, "--table", 1, "--out", out_csv], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# table=1 rows=40")
    assert len(lines) == 2 + 4
    assert lines[2].startswith("Fixed MDF")
    assert len(out_csv.read_text().splitlines()) == 5


def test_fit_table2(multi_csv, capsys):
    code, out, _ = run(["fit", "--data", multi_csv, "--table", 2], capsys)
    assert code == 0
    assert len(out.splitlines()) == 2 + 10
    assert "min(MDF, MDF - 0.5*RA + 0.25)" in out


def test_fit_table1_on_multi_size(multi_csv, capsys):
    code, _, err = run(["fit", "--data", multi_csv, "--table", 1], capsys)
    assert code == 2
    assert "single bet size" in err


def test_fit_missing_file(tmp_path, capsys):
    assert run(["fit", "--data", tmp_path / "missing.csv"], capsys)[0] == 1


@pytest.mark.parametrize("argv,expected", [
    (["--mdf", 0.5, "--ra", 0.8], "0.35"),
    (["--pot", 1, "--bet", 1, "--ra", 0.5], "0.5"),
    (["--mdf", 0.5, "--ra", 0.6, "--signed"], "0.35"),
])
def test_rule(capsys, argv, expected):
    code, out, _ = run(["rule"] + argv, capsys)
    assert code == 0
    assert out.strip() == expected


@pytest.mark.parametrize("argv", [["--mdf", 0.5, "--pot", 1, "--bet", 1, "--ra", 0.5],
                                  ["--pot", 1, "--ra", 0.5], ["--mdf", 0.5, "--ra", 1.5],
                                  ["--mdf", 1.5, "--ra", 0.5], ["--ra", 0.5]])
def test_rule_invalid(capsys, argv):
    assert run(["rule"] + argv, capsys)[0] == 2


def test_plot_svg(pot_csv, tmp_path, capsys):
    out = tmp_path / "s.svg"
    assert run(["plot", "--data", pot_csv, "--out", out], capsys)[0] == 0
    svg = out.read_text()
    assert svg.startswith("<svg")
    assert re.findall(r'class="mdf" data-mdf="([^"]+)"', svg) == ["0.5"]
    assert svg.count("<circle") == 40


def test_plot_csv(pot_csv, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run(["plot", "--data", pot_csv, "--out", out, "--format", "csv"], capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "ra,odf"
    assert len(lines) == 41


def test_plot_multi_size_lines(multi_csv, tmp_path, capsys):
    out = tmp_path / "s.svg"
    run(["plot", "--data", multi_csv, "--out", out], capsys)
    assert len(re.findall(r'class="mdf"', out.read_text())) == 3


def test_plot_empty_and_unknown_format(tmp_path, capsys, pot_csv):
    empty = tmp_path / "empty.csv"
    empty.write_text(pot_csv.read_text().splitlines()[0] + "\n")
    code, _, err = run(["plot", "--data", empty, "--out", tmp_path / "x.svg"], capsys)
    assert code == 2 and "no rows" in err
    with pytest.raises(SystemExit) as exc:
        cli.main(["plot", "--data", str(pot_csv), "--out", str(tmp_path / "x"), "--format", "png"])
    assert exc.value.code == 2


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "pokerrule.cli", "rule", "--mdf", "0.5", "--ra", "0.8"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "0.35"
    assert res.stderr == ""
