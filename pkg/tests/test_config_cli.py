"""Config parsing and the command-line entry points."""

import os

import numpy as np
import pytest

from sinterp.cli import main
from sinterp.config import ConfigError, RunConfig, load_config, resolve_threads
from sinterp.fileio import load_label_map, write_pgm16, write_ppm
from sinterp.interpolation import check_connectivity


def write_scene(path, seed, height=20, width=30):
    """Two flat halves with distinct colors, quantized to 8 bits."""
    rng = np.random.default_rng(seed)
    image = np.zeros((height, width, 3))
    image[:] = rng.uniform(0.1, 0.45, 3)
    image[:, width // 2:] = rng.uniform(0.55, 0.9, 3)
    image = np.round(image * 255) / 255
    write_ppm(path, image)
    return image


def quadrant_gt(height=20, width=30):
    gt = np.zeros((height, width), dtype=np.int32)
    gt[:, width // 2:] = 1
    gt[height // 2:, :] += 2
    return gt


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.method == "sin" and config.scorer == "color"
        assert config.seed_step == 16 and config.tau == 0.05

    @pytest.mark.parametrize("kwargs", [
        {"method": "watershed"},
        {"scorer": "oracle"},
        {"seed_step": 3},
        {"seed_step": 1},
        {"tau": 0.0},
        {"tau": -1.0},
        {"color_space": "hsv"},
        {"threads": 0},
        {"weights_h": (1.0, -2.0)},
        {"weights_v": ()},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs)


class TestLoadConfig:
    def test_full_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# run settings\n"
            "\n"
            "method = sin\n"
            "scorer=color\n"
            "seed_step = 8\n"
            "tau = 0.2\n"
            "color_space = lab\n"
            "target_superpixels = 30x20\n"
            "weights_h = 8,4,2\n"
            "threads = 2\n")
        config = load_config(path)
        assert config.seed_step == 8 and config.tau == 0.2
        assert config.color_space == "lab"
        assert config.target_superpixels == (30, 20)
        assert config.weights_h == (8.0, 4.0, 2.0)
        assert config.threads == 2

    def test_plain_count(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("target_superpixels = 400\n")
        assert load_config(path).target_superpixels == 400

    def test_unknown_key_names_line(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("method = sin\nbogus = 1\n")
        with pytest.raises(ConfigError, match=r":2:.*bogus"):
            load_config(path)

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("tau = 0.1\ntau = 0.2\n")
        with pytest.raises(ConfigError, match="duplicate"):
            load_config(path)

    def test_bad_value(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("seed_step = four\n")
        with pytest.raises(ConfigError, match=r":1:"):
            load_config(path)

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("just some words\n")
        with pytest.raises(ConfigError, match="key=value"):
            load_config(path)


class TestResolveThreads:
    def test_env_overrides_config(self, monkeypatch):
        monkeypatch.setenv("SINTERP_THREADS", "7")
        assert resolve_threads(3) == 7

    def test_config_when_no_env(self, monkeypatch):
        monkeypatch.delenv("SINTERP_THREADS", raising=False)
        assert resolve_threads(3) == 3

    def test_default_is_cpu_count(self, monkeypatch):
        monkeypatch.delenv("SINTERP_THREADS", raising=False)
        assert resolve_threads(None) == (os.cpu_count() or 1)

    @pytest.mark.parametrize("value", ["abc", "0", "-2"])
    def test_bad_env(self, monkeypatch, value):
        monkeypatch.setenv("SINTERP_THREADS", value)
        with pytest.raises(ConfigError):
            resolve_threads(None)


class TestSegmentCommand:
    def test_happy_path(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=0)
        out_path = tmp_path / "labels.sinl"
        code = main(["segment", "--input", str(image_path),
                     "--superpixels", "6", "--seed-step", "4",
                     "--out", str(out_path)])
        assert code == 0
        captured = capsys.readouterr()
        lines = captured.out.strip().splitlines()
        assert lines[0] == "n_superpixels=6"
        assert lines[1].startswith("runtime_ms=")
        float(lines[1].split("=")[1])
        labels = load_label_map(out_path)
        assert labels.shape == (20, 30)
        assert len(np.unique(labels)) == 6
        assert check_connectivity(labels).connected

    def test_csv_output(self, tmp_path):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=1)
        out_path = tmp_path / "labels.csv"
        assert main(["segment", "--input", str(image_path),
                     "--superpixels", "2x3", "--seed-step", "4",
                     "--out", str(out_path)]) == 0
        text = out_path.read_text()
        assert text.count("\n") == 20 and "," in text
        assert load_label_map(out_path).shape == (20, 30)

    def test_slic_method(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=2)
        out_path = tmp_path / "labels.sinl"
        assert main(["segment", "--input", str(image_path), "--method", "slic",
                     "--superpixels", "6", "--out", str(out_path)]) == 0
        labels = load_label_map(out_path)
        assert check_connectivity(labels).connected
        n = int(capsys.readouterr().out.splitlines()[0].split("=")[1])
        assert n == len(np.unique(labels))

    def test_gt_scorer(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=3)
        gt_path = tmp_path / "scene.pgm"
        write_pgm16(gt_path, quadrant_gt())
        out_path = tmp_path / "labels.sinl"
        assert main(["segment", "--input", str(image_path), "--scorer", "gt",
                     "--gt", str(gt_path), "--superpixels", "6",
                     "--seed-step", "4", "--out", str(out_path)]) == 0
        assert check_connectivity(load_label_map(out_path)).connected

    def test_trained_scorer(self, tmp_path):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=4)
        out_path = tmp_path / "labels.sinl"
        assert main(["segment", "--input", str(image_path), "--scorer", "trained",
                     "--superpixels", "4", "--seed-step", "4",
                     "--out", str(out_path)]) == 0
        assert check_connectivity(load_label_map(out_path)).connected

    def test_overlay_written(self, tmp_path):
        from PIL import Image
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=5)
        out_path = tmp_path / "labels.sinl"
        overlay_path = tmp_path / "view.png"
        assert main(["segment", "--input", str(image_path),
                     "--superpixels", "6", "--seed-step", "4",
                     "--out", str(out_path), "--overlay", str(overlay_path)]) == 0
        assert np.asarray(Image.open(overlay_path)).shape == (20, 30, 3)

    def test_config_file_supplies_target(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=6)
        config_path = tmp_path / "run.cfg"
        config_path.write_text("target_superpixels = 6\nseed_step = 4\n")
        out_path = tmp_path / "labels.sinl"
        assert main(["segment", "--input", str(image_path),
                     "--config", str(config_path), "--out", str(out_path)]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "n_superpixels=6"

    def test_flag_overrides_config(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=6)
        config_path = tmp_path / "run.cfg"
        config_path.write_text("target_superpixels = 6\nseed_step = 4\n")
        out_path = tmp_path / "labels.sinl"
        assert main(["segment", "--input", str(image_path),
                     "--config", str(config_path), "--superpixels", "4",
                     "--out", str(out_path)]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "n_superpixels=4"

    def test_missing_input_is_io_error(self, tmp_path, capsys):
        code = main(["segment", "--input", str(tmp_path / "absent.ppm"),
                     "--superpixels", "4", "--out", str(tmp_path / "o.sinl")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_corrupt_image_is_io_error(self, tmp_path, capsys):
        image_path = tmp_path / "bad.ppm"
        image_path.write_bytes(b"P6\n5 5\n255\n\x00\x00")
        code = main(["segment", "--input", str(image_path),
                     "--superpixels", "4", "--out", str(tmp_path / "o.sinl")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_superpixels_is_usage_error(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=0)
        code = main(["segment", "--input", str(image_path),
                     "--superpixels", "lots", "--out", str(tmp_path / "o.sinl")])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_superpixels_is_usage_error(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=0)
        assert main(["segment", "--input", str(image_path),
                     "--out", str(tmp_path / "o.sinl")]) == 2
        capsys.readouterr()

    def test_gt_scorer_without_gt_is_usage_error(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=0)
        assert main(["segment", "--input", str(image_path), "--scorer", "gt",
                     "--superpixels", "4", "--out", str(tmp_path / "o.sinl")]) == 2
        assert "--gt" in capsys.readouterr().err

    def test_bad_config_is_usage_error(self, tmp_path, capsys):
        image_path = tmp_path / "scene.ppm"
        write_scene(image_path, seed=0)
        config_path = tmp_path / "run.cfg"
        config_path.write_text("mystery = 1\n")
        assert main(["segment", "--input", str(image_path),
                     "--superpixels", "4", "--config", str(config_path),
                     "--out", str(tmp_path / "o.sinl")]) == 2
        capsys.readouterr()

    def test_unknown_flag(self, capsys):
        assert main(["segment", "--frobnicate"]) == 2
        capsys.readouterr()

    def test_no_command(self, capsys):
        assert main([]) == 2
        capsys.readouterr()


@pytest.fixture()
def dataset(tmp_path):
    root = tmp_path / "data"
    root.mkdir()
    for seed, stem in enumerate(["alpha", "beta"]):
        write_scene(root / f"{stem}.ppm", seed=seed)
        write_pgm16(root / f"{stem}.pgm", quadrant_gt())
    return root


class TestBenchmarkCommand:
    def run(self, root, out_path, extra=()):
        return main(["benchmark", "--dataset", str(root), "--counts", "4",
                     "--seed-step", "4", "--out", str(out_path), *extra])

    def test_csv_shape(self, dataset, tmp_path, capsys):
        out_path = tmp_path / "bench.csv"
        assert self.run(dataset, out_path) == 0
        capsys.readouterr()
        lines = out_path.read_text().strip().splitlines()
        assert lines[0] == "image,method,n_superpixels,asa,br,bp,co,runtime_ms"
        # Two method labels (sin-color, slic), one count, two images + a mean.
        assert len(lines) == 1 + 2 * 3
        for line in lines[1:]:
            cells = line.split(",")
            assert len(cells) == 8
            assert cells[1] in ("sin-color", "slic")
            for cell in cells[2:]:
                float(cell)
        names = [line.split(",")[0] for line in lines[1:]]
        assert names == ["alpha", "beta", "mean"] * 2

    def test_scores_are_sane(self, dataset, tmp_path, capsys):
        out_path = tmp_path / "bench.csv"
        assert self.run(dataset, out_path) == 0
        capsys.readouterr()
        for line in out_path.read_text().strip().splitlines()[1:]:
            cells = line.split(",")
            for value in map(float, cells[3:7]):
                assert 0.0 <= value <= 1.0

    def test_stdout_when_no_out(self, dataset, capsys):
        assert main(["benchmark", "--dataset", str(dataset), "--counts", "4",
                     "--seed-step", "4"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("image,method,")

    def test_metric_columns_thread_invariant(self, dataset, tmp_path,
                                             monkeypatch, capsys):
        tables = []
        for threads in ("1", "4"):
            monkeypatch.setenv("SINTERP_THREADS", threads)
            out_path = tmp_path / f"bench{threads}.csv"
            assert self.run(dataset, out_path) == 0
            capsys.readouterr()
            rows = [line.split(",")[:7]  # all but runtime_ms
                    for line in out_path.read_text().strip().splitlines()]
            tables.append(rows)
        assert tables[0] == tables[1]

    def test_multi_count_and_scorers(self, dataset, tmp_path, capsys):
        out_path = tmp_path / "bench.csv"
        assert self.run(dataset, out_path,
                        extra=["--counts", "4,6", "--methods", "sin",
                               "--scorers", "color,gt"]) == 0
        capsys.readouterr()
        lines = out_path.read_text().strip().splitlines()
        # 2 scorers x 2 counts x (2 images + mean).
        assert len(lines) == 1 + 4 * 3
        labels = {line.split(",")[1] for line in lines[1:]}
        assert labels == {"sin-color", "sin-gt"}

    def test_missing_gt_warns_and_skips(self, dataset, tmp_path, capsys):
        write_scene(dataset / "orphan.ppm", seed=9)
        out_path = tmp_path / "bench.csv"
        assert self.run(dataset, out_path) == 0
        err = capsys.readouterr().err
        assert "orphan" in err and "skipped" in err
        names = {line.split(",")[0]
                 for line in out_path.read_text().strip().splitlines()[1:]}
        assert names == {"alpha", "beta", "mean"}

    def test_no_pairs_is_io_error(self, tmp_path, capsys):
        root = tmp_path / "empty"
        root.mkdir()
        assert self.run(root, tmp_path / "bench.csv") == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_dir_is_io_error(self, tmp_path, capsys):
        assert self.run(tmp_path / "nowhere", tmp_path / "bench.csv") == 1
        capsys.readouterr()

    @pytest.mark.parametrize("extra", [
        ["--counts", "0"],
        ["--counts", "abc"],
        ["--methods", "magic"],
        ["--scorers", "psychic"],
    ])
    def test_bad_lists_are_usage_errors(self, dataset, tmp_path, capsys, extra):
        base = ["benchmark", "--dataset", str(dataset), "--counts", "4",
                "--out", str(tmp_path / "bench.csv")]
        assert main(base + extra) == 2
        capsys.readouterr()
