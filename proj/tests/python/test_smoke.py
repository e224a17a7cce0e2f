import csv
import io
import os
import subprocess

import pytest

import wprobe

CALDERON = """\
term = 1 ; 1 + 0.5*sin(x) ; -1 ; 1
term = 0 ; 0.5*cos(x) ; 1 ; 1
term = -1 ; 0.3 ; 1 ; 1
x0 = 0, 0.2
N = 16
K = 32
"""


def test_packet_norm_is_one():
    fam = wprobe.WavePacketFamily(0.0, 1.0, 2.0)
    assert fam.lam == 2.0
    for t in (2.0, 8.0, 32.0):
        assert abs(wprobe.packet_norm(fam, t, 0.0) - 1.0) < 1e-6


def test_inner_product_is_hermitian():
    fam = wprobe.WavePacketFamily(0.1, 1.0, 2.0)
    a = wprobe.inner_product(fam, 4.0, 4.1, 0.0)
    b = wprobe.inner_product(fam, 4.1, 4.0, 0.0)
    assert abs(a - b.conjugate()) < 1e-12


def test_noise_kernel_and_samples():
    fam = wprobe.WavePacketFamily(0.0, 1.0, 2.0)
    k = wprobe.noise_kernel(fam, [4.0, 4.1, 30.0], 0.0)
    assert abs(k[0][0] - 1.0) < 1e-6
    assert k[0][2] == 0.0
    assert k[0][1] == pytest.approx(k[1][0])
    a = wprobe.sample_noise(fam, [4.0, 4.1], 0.0, 7)
    b = wprobe.sample_noise(fam, [4.0, 4.1], 0.0, 7)
    assert a == b


def test_plan_orders():
    plan = wprobe.plan_orders([1.0, 0.0, -1.0], 0.0)
    assert (plan.j_beta, plan.k_beta) == (1, 2)
    assert list(plan.mode) == ["plain", "averaged"]
    assert plan.lam[0] == pytest.approx(2.5)


def test_config_round_trip_and_errors():
    text = wprobe.parse_config(CALDERON)
    assert wprobe.parse_config(text) == text
    assert wprobe.config_hash(text) == wprobe.config_hash(CALDERON)
    with pytest.raises(wprobe.ConfigError):
        wprobe.parse_config("colour = red\n")
    with pytest.raises(ValueError):
        wprobe.plan_orders([0.0, 1.0], 0.0)


def test_run_recover():
    csv_text, summary = wprobe.run("recover", CALDERON, seed=3)
    rows = list(csv.DictReader(io.StringIO(csv_text)))
    assert len(rows) == 4
    assert summary["command"] == "recover"
    assert summary["seed"] == 3
    for r in rows:
        assert float(r["error"]) < 0.3
    again, _ = wprobe.run("recover", CALDERON, seed=3, workers=1)
    assert again == csv_text


def test_numerical_error_maps_to_runtime_error():
    bad = "term = 1 ; 1/x ; 1 ; 1\nterm = -1 ; 1 ; 1 ; 1\nx0 = 0\n"
    with pytest.raises(RuntimeError):
        wprobe.run("recover", bad)


@pytest.mark.skipif("WPROBE_CLI" not in os.environ, reason="CLI path not given")
def test_cli_outputs_are_byte_identical(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(CALDERON)
    outs = []
    for name, workers in (("a", 1), ("b", 1), ("c", 4)):
        out = tmp_path / name
        subprocess.run(
            [os.environ["WPROBE_CLI"], "variance-scaling", "--config", str(cfg), "--out", str(out),
             "--workers", str(workers), "--quiet"],
            check=True,
        )
        outs.append((out / "variance-scaling.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]
    bad = tmp_path / "bad.cfg"
    bad.write_text("term = 0 ; 1 ; 1 ; 1\nterm = 1 ; 1 ; 1 ; 1\n")
    r = subprocess.run([os.environ["WPROBE_CLI"], "recover", "--config", str(bad)],
                       capture_output=True, text=True)
    assert r.returncode == 2
    assert "strictly decrease" in r.stderr
