import math

import numpy as np
import pytest

from usbc.channel import NakagamiParams
from usbc.errors import ConfigError
from usbc.harness import (
    SNR_CSV_HEADER,
    SimConfig,
    config_from_mapping,
    derive_substream,
    parse_config_text,
    parse_grid,
    run_ber_vs_k,
    run_ber_vs_snr,
)


def test_substream_repeatable():
    a = derive_substream(5, 2, 9).standard_normal(16)
    b = derive_substream(5, 2, 9).standard_normal(16)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        derive_substream(-1, 0, 0)


def test_substreams_distinct():
    # 5e4 streams -> ~1.25e9 pairs, none sharing their first 64 draws
    seen = set()
    for t in range(50_000):
        seen.add(derive_substream(1, 0, t).bit_generator.random_raw(64).tobytes())
    for p in range(1, 50):
        seen.add(derive_substream(1, p, 0).bit_generator.random_raw(64).tobytes())
    assert len(seen) == 50_000 + 49


@pytest.mark.parametrize(
    "text,expected",
    [("0:12:2", (0, 2, 4, 6, 8, 10, 12)), ("6,9", (6, 9)), ("3", (3,)), ("0:1:0.25", (0, 0.25, 0.5, 0.75, 1)),
     ("12:0:-6", (12, 6, 0))],
)
def test_parse_grid(text, expected):
    assert parse_grid(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["0:12:0", "0:12:-1", "a:b:c", "1:2"])
def test_parse_grid_errors(text):
    with pytest.raises(ConfigError):
        parse_grid(text)


def test_config_text():
    values = parse_config_text(
        """
        # comment
        k = 2
        snr_db = 0:6:3   # trailing comment
        normalize = false
        multipath = 10,1.0,0.01,1.0; 20,1.0,0.005,1.0
        """
    )
    cfg = config_from_mapping(values)
    assert cfg.k == 2 and cfg.snr_db == (0.0, 3.0, 6.0) and cfg.normalize is False
    assert cfg.multipath == ((10, 1.0, 0.01, 1.0), (20, 1.0, 0.005, 1.0))
    assert cfg.fading.profile.taps[1][1] == 10


@pytest.mark.parametrize("text", ["bogus = 1", "k 2", "k = two", "normalize = maybe", "multipath = 1,2"])
def test_config_text_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_config_invariants():
    with pytest.raises(ConfigError):
        SimConfig(trials=0)
    with pytest.raises(ConfigError):
        SimConfig(snr_db=())
    with pytest.raises(ConfigError):
        SimConfig(k=3, n_f=8)
    with pytest.raises(ConfigError):
        SimConfig(tfwrx=10)
    with pytest.raises(ConfigError):
        SimConfig(multipath=((60, 1, 1, 1),))
    with pytest.raises(ConfigError):
        config_from_mapping({"z": -1.0})
    with pytest.raises(ConfigError):
        config_from_mapping({"nope": 1})


def test_scatter_defaults_follow_tag():
    cfg = config_from_mapping({"z": 2.0, "omega": 1.0, "s": 1.0})
    assert cfg.scatter == NakagamiParams(2.0, 1.0, 1.0)
    cfg = config_from_mapping({"z": 2.0, "omega": 1.0, "s": 1.0, "scatter_z": 0.7})
    assert cfg.scatter == NakagamiParams(0.7, 1.0, 1.0)
    assert config_from_mapping({"seed": 9}).master_seed == 9


def test_frames_and_chunks():
    assert SimConfig(k=1).frames == 4
    assert SimConfig(k=4).frames == 32
    assert 256 <= SimConfig(k=4).chunk_trials <= 16384


def test_csv_format(tmp_path):
    out = tmp_path / "ber.csv"
    curve = run_ber_vs_snr(SimConfig(trials=500, snr_db=(0.0, 6.0), out=str(out)))
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == ",".join(SNR_CSV_HEADER)
    assert len(lines) == 3
    fields = lines[1].split(",")
    assert int(fields[4]) == 500
    assert float(fields[1]) == pytest.approx(int(fields[5]) / 500)
    assert curve.to_csv() == raw.decode()


@pytest.mark.parametrize("k", [1, 2])
def test_single_trial(k):
    curve = run_ber_vs_snr(SimConfig(k=k, trials=1, snr_db=(0.0,)))
    row = curve.rows[0]
    assert row.ber_sim in {i / k for i in range(k + 1)}
    assert row.trials == 1


def test_ber_and_std_error_consistent():
    row = run_ber_vs_snr(SimConfig(k=2, trials=4000, snr_db=(3.0,))).rows[0]
    assert row.ber_sim == row.errors / (row.trials * row.k)
    assert row.std_error == pytest.approx(math.sqrt(row.ber_sim * (1 - row.ber_sim) / (row.trials * 2)))


def test_std_error_scaling():
    small = run_ber_vs_snr(SimConfig(trials=20_000, snr_db=(6.0,), master_seed=1)).rows[0]
    large = run_ber_vs_snr(SimConfig(trials=80_000, snr_db=(6.0,), master_seed=2)).rows[0]
    assert small.std_error / large.std_error == pytest.approx(2.0, rel=0.2)


def test_run_deterministic_and_worker_independent():
    cfg = SimConfig(k=2, trials=3000, snr_db=(0.0, 6.0), master_seed=4)
    a = run_ber_vs_snr(cfg).to_csv()
    assert run_ber_vs_snr(cfg).to_csv() == a
    assert run_ber_vs_snr(SimConfig(**{**cfg.__dict__, "workers": 2})).to_csv() == a


def test_scatter_count_shares_random_numbers():
    # bits, tag fading and noise come from streams the scatter count does not touch
    base = SimConfig(trials=20_000, snr_db=(3.0, 9.0), master_seed=8)
    s1 = run_ber_vs_snr(base)
    s3 = run_ber_vs_snr(SimConfig(**{**base.__dict__, "scatters": 3}))
    s0 = run_ber_vs_snr(SimConfig(**{**base.__dict__, "scatters": 0}))
    assert [r.errors for r in s1] == [r.errors for r in s3] == [r.errors for r in s0]


def test_multipath_run():
    cfg = SimConfig(trials=2000, snr_db=(6.0,), multipath=((20, 1.0, 0.02, 1.0),))
    row = run_ber_vs_snr(cfg).rows[0]
    assert 0.0 <= row.ber_sim <= 1.0


def test_ber_vs_k_layout():
    curve = run_ber_vs_k(SimConfig(trials=1000), [1, 2, 3], snr_db=(6.0, 9.0))
    assert [(r.snr_db, r.k) for r in curve] == [(6, 1), (6, 2), (6, 3), (9, 1), (9, 2), (9, 3)]
    assert curve.to_csv().splitlines()[0].startswith("k,snr_db,ber_sim")
    with pytest.raises(ConfigError):
        run_ber_vs_k(SimConfig(trials=10, n_f=8), [3])
    with pytest.raises(ConfigError):
        run_ber_vs_k(SimConfig(trials=10), [])


def test_theory_columns_present():
    row = run_ber_vs_snr(SimConfig(trials=100, snr_db=(6.0,))).rows[0]
    assert row.ber_theory_cond == pytest.approx(1 - 0.6994819068477938, abs=1e-8)
    assert row.ber_theory_faded > row.ber_theory_cond
    mc = run_ber_vs_snr(SimConfig(trials=100, snr_db=(6.0,), theory_method="montecarlo")).rows[0]
    assert mc.ber_theory_faded == pytest.approx(row.ber_theory_faded, abs=0.005)
