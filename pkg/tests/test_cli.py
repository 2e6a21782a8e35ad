"""Command-line entry points: synth and run subcommands, config parsing, exit codes."""

import subprocess
import sys

import numpy as np
import pytest

from lunar_track import load_image, save_image
from lunar_track.cli import ConfigError, build_config, main, read_config_file


def run_synth(tmp_path, seed=8, frames=4, dx=3.0, dy=2.0):
    out = tmp_path / "seq"
    code = main([
        "synth", "--seed", str(seed), "--frames", str(frames),
        "--dx", str(dx), "--dy", str(dy), "--out", str(out),
    ])
    assert code == 0
    return out


class TestSynthCommand:
    def test_writes_frames_and_truth(self, tmp_path):
        out = run_synth(tmp_path, frames=3)
        names = sorted(p.name for p in out.iterdir())
        assert names == ["frame_00000.pgm", "frame_00001.pgm", "frame_00002.pgm", "truth.csv"]
        assert load_image(out / "frame_00000.pgm").shape == (512, 512)
        header = (out / "truth.csv").read_text().splitlines()[0]
        assert header == "frame,dx,dy"

    def test_bad_frame_count(self, tmp_path, capsys):
        code = main(["synth", "--seed", "1", "--frames", "0",
                     "--dx", "1", "--dy", "1", "--out", str(tmp_path / "x")])
        assert code == 1

    def test_missing_required_flag(self, tmp_path, capsys):
        code = main(["synth", "--seed", "1", "--frames", "2", "--out", str(tmp_path / "x")])
        assert code == 1


class TestRunCommand:
    def test_full_run(self, tmp_path, capsys):
        seq = run_synth(tmp_path)
        out = tmp_path / "result"
        code = main(["run", "--frames", str(seq), "--out", str(out)])
        assert code == 0
        tracks = (out / "tracks.csv").read_text().splitlines()
        assert tracks[0] == "frame,feature_id,parent_template,x,y,status"
        assert len(tracks) > 1
        frames_csv = (out / "frames.csv").read_text().splitlines()
        assert frames_csv[0] == "frame,active_templates,live_tracks,new_tracks,lost_tracks"
        assert len(frames_csv) == 5
        assert not list(out.glob("overlay_*.pgm"))

    def test_overlay_flag(self, tmp_path):
        seq = run_synth(tmp_path, frames=2)
        out = tmp_path / "result"
        code = main(["run", "--frames", str(seq), "--out", str(out), "--overlay"])
        assert code == 0
        assert sorted(p.name for p in out.glob("overlay_*.pgm")) == [
            "overlay_00000.pgm", "overlay_00001.pgm",
        ]

    def test_glob_pattern_frames(self, tmp_path):
        seq = run_synth(tmp_path, frames=2)
        out = tmp_path / "result"
        code = main(["run", "--frames", str(seq / "frame_*.pgm"), "--out", str(out)])
        assert code == 0

    def test_too_few_frames_exit_2(self, tmp_path, capsys):
        seq = run_synth(tmp_path, frames=2)
        (seq / "frame_00001.pgm").unlink()
        code = main(["run", "--frames", str(seq), "--out", str(tmp_path / "r")])
        assert code == 2

    def test_missing_dir_exit_2(self, tmp_path, capsys):
        code = main(["run", "--frames", str(tmp_path / "nope"), "--out", str(tmp_path / "r")])
        assert code == 2

    def test_corrupt_frame_exit_2(self, tmp_path, capsys):
        seq = run_synth(tmp_path, frames=2)
        (seq / "frame_00001.pgm").write_bytes(b"P5\n10 10\n255\nshort")
        code = main(["run", "--frames", str(seq), "--out", str(tmp_path / "r")])
        assert code == 2

    def test_featureless_input_exit_3(self, tmp_path, capsys):
        seq = tmp_path / "flat"
        seq.mkdir()
        for k in range(2):
            save_image(np.full((55, 55), 128.0), seq / f"frame_{k:05d}.pgm")
        code = main(["run", "--frames", str(seq), "--out", str(tmp_path / "r")])
        assert code == 3

    def test_no_subcommand_exit_1(self, capsys):
        assert main([]) == 1

    def test_unknown_subcommand_exit_1(self, capsys):
        assert main(["frobnicate"]) == 1


class TestConfigFile:
    def test_parse_and_comments(self, tmp_path):
        cfg = tmp_path / "pipe.cfg"
        cfg.write_text(
            "# pipeline settings\n"
            "sx = 4\n"
            "sy = 4  # square cells\n"
            "\n"
            "template_count = 3\n"
            "overlay = true\n"
        )
        values = read_config_file(cfg)
        assert values == {"sx": 4, "sy": 4, "template_count": 3, "overlay": True}

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "pipe.cfg"
        cfg.write_text("warp_speed = 9\n")
        with pytest.raises(ConfigError):
            read_config_file(cfg)

    def test_bad_value(self, tmp_path):
        cfg = tmp_path / "pipe.cfg"
        cfg.write_text("sx = fast\n")
        with pytest.raises(ConfigError):
            read_config_file(cfg)

    def test_missing_equals(self, tmp_path):
        cfg = tmp_path / "pipe.cfg"
        cfg.write_text("sx 4\n")
        with pytest.raises(ConfigError):
            read_config_file(cfg)

    def test_build_config_applies_values(self):
        cfg = build_config({"sx": 4, "sy": 4, "lambda_t": 900.0, "template_count": 3}, {})
        assert cfg.sx == 4 and cfg.sy == 4
        assert cfg.detector.lambda_t == 900.0
        assert cfg.template.count == 3

    def test_cli_override_beats_file(self, tmp_path):
        values = {"sx": 4, "sy": 4}
        cfg = build_config(values, {"sx": 5, "sy": 5})
        assert cfg.sx == 5 and cfg.sy == 5

    def test_invalid_combination_raises(self):
        with pytest.raises(ConfigError):
            build_config({"template_w": 21}, {})  # 21 not divisible by sx=5

    def test_config_error_exit_1(self, tmp_path, capsys):
        seq = run_synth(tmp_path, frames=2)
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("warp_speed = 9\n")
        code = main(["run", "--frames", str(seq), "--out", str(tmp_path / "r"),
                     "--config", str(cfg)])
        assert code == 1

    def test_config_file_drives_run(self, tmp_path):
        seq = run_synth(tmp_path, frames=2)
        cfg = tmp_path / "pipe.cfg"
        cfg.write_text("sx = 4\nsy = 4\ntemplate_w = 16\ntemplate_h = 16\n")
        out = tmp_path / "r"
        code = main(["run", "--frames", str(seq), "--out", str(out),
                     "--config", str(cfg)])
        assert code == 0
        assert (out / "tracks.csv").exists()


class TestModuleEntry:
    def test_python_dash_m(self, tmp_path):
        out = tmp_path / "seq"
        proc = subprocess.run(
            [sys.executable, "-m", "lunar_track", "synth", "--seed", "3",
             "--frames", "2", "--dx", "1", "--dy", "1", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert (out / "truth.csv").exists()
