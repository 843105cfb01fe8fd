import csv
import io
import shutil

import pytest

from ringdec.channels import write_received
from ringdec.cli import main


def copy_data(data_dir, tmp_path):
    for p in data_dir.iterdir():
        shutil.copy(p, tmp_path / p.name)
    return tmp_path


def test_battery_exit_codes(data_dir, capsys):
    assert main(["battery", "--config", str(data_dir / "battery_lp.cfg")]) == 0
    assert "battery PASS" in capsys.readouterr().out
    assert main(["battery", "--config", str(data_dir / "battery_negative.cfg")]) == 1
    assert "witness" in capsys.readouterr().out


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("code = nowhere.pcm\nchannel = qsc(1/2)\ndecoder = lp\n")
    assert main(["battery", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err
    bad.write_text("code = x\n")
    assert main(["simulate", "--config", str(bad)]) == 2


def test_enumerate_writes_csv(data_dir, tmp_path):
    d = copy_data(data_dir, tmp_path)
    (d / "enumerate_z3.cfg").write_text((d / "enumerate_z3.cfg").read_text() + "output = out.csv\n")
    assert main(["enumerate", "--config", str(d / "enumerate_z3.cfg")]) == 0
    lines = (d / "out.csv").read_text().splitlines()
    assert lines[0] == "codeword,exact_num,exact_den,fer"
    assert len(lines) == 10
    assert len({ln.split(",", 1)[1] for ln in lines[1:]}) == 1


def test_simulate(data_dir, tmp_path, capsys):
    d = copy_data(data_dir, tmp_path)
    cfg = d / "simulate_psk.cfg"
    cfg.write_text(cfg.read_text().replace("trials = 2000", "trials = 200"))
    assert main(["simulate", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "codeword,trials,errors,fer,ci_lo,ci_hi"
    assert len(out) == 4
    exh = d / "exh.cfg"
    exh.write_text("code = z3_n4.pcm\nchannel = qsc(1/4)\ndecoder = sp(3)\nexhaustive = true\n")
    assert main(["simulate", "--config", str(exh)]) == 0
    assert "exact_num" in capsys.readouterr().out


def test_decode(data_dir, tmp_path, capsys):
    d = copy_data(data_dir, tmp_path)
    write_received(d / "y.csv", (1, 0, 2, 2, 1, 0))
    cfg = d / "dec.cfg"
    cfg.write_text("code = z3_cycle.pcm\nchannel = qsc(1/2)\ndecoder = lp; sp(5)\nreceived = y.csv\n")
    assert main(["decode", "--config", str(cfg)]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["decoder", "status", "word", "detail"]
    assert rows[1][0] == "lp" and rows[2][0] == "sp(5, early)"
    assert rows[1][1] in ("codeword", "failure-fractional", "failure-tie")
    write_received(d / "y.csv", (1, 0))
    assert main(["decode", "--config", str(cfg)]) == 2


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["frobnicate", "--config", "x"])
