import pytest

from faultloc.config import (PipelineConfig, WaveletConfig, apply_overrides, dump_config,
                             load_config, parse_config_text)
from faultloc.wavelet import Filter


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.stride == 16 and cfg.target_per_class == 126 and cfg.repeats == 10
    assert cfg.wavelet == WaveletConfig()
    cfg.validate()


def test_parse_nested_keys_and_comments():
    cfg = parse_config_text("""
        # a comment
        seed = 3
        wavelet.filter = haar   # trailing comment
        wavelet.fixed_lambda = 0.25
        lle.k_neighbors = 12
        boost.weak.epochs = 4
        grid.w_hard = 0.5, 0.7
        grid.fixed_lambda = none, 0.1
    """)
    assert cfg.seed == 3
    assert cfg.wavelet.filter is Filter.HAAR
    assert cfg.wavelet.fixed_lambda == 0.25
    assert cfg.lle.k_neighbors == 12
    assert cfg.boost.weak.epochs == 4
    assert cfg.grid.w_hard == (0.5, 0.7)
    assert cfg.grid.fixed_lambda == (None, 0.1)


def test_none_lambda():
    assert parse_config_text("wavelet.fixed_lambda = none").wavelet.fixed_lambda is None


def test_dump_round_trip():
    cfg = parse_config_text("seed = 5\ngrid.w_hard = 0.2, 0.9\nwavelet.fixed_lambda = 0.3\n")
    assert parse_config_text(dump_config(cfg)) == cfg
    assert parse_config_text(dump_config(PipelineConfig())) == PipelineConfig()


def test_load_from_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("repeats = 2\n")
    assert load_config(path).repeats == 2


@pytest.mark.parametrize("text", ["nonsense = 1", "wavelet.bogus = 1", "wavelet = 1",
                                  "seed = abc", "no equals sign", "wavelet.filter = db9",
                                  "wavelet.w_hard = 0.9", "train_fraction = 1.5", "k_folds = 1"])
def test_invalid_text_rejected(text):
    with pytest.raises(ValueError):
        parse_config_text(text)


def test_override_error_names_key():
    with pytest.raises(ValueError, match="'lle.nope'"):
        apply_overrides(PipelineConfig(), [("lle.nope ", "1")])
