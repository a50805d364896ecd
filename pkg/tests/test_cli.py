import subprocess
import sys

import numpy as np
import pytest

from gsmrestore.cli import main
from gsmrestore.experiments import PRESETS, add_noise, make_test_image
from gsmrestore.image_io import load_image, save_image


@pytest.fixture
def noisy_png(tmp_path):
    clean = make_test_image(24)
    noisy = add_noise(clean, 0.1, seed=1)
    path = tmp_path / "noisy.png"
    save_image(np.clip(noisy, 0, 1), path)
    return path


class TestPresetConstants:
    def test_fig2_denoise(self):
        p = PRESETS["fig2-denoise"]
        assert (p.prior, p.lam, p.C, p.sigma) == ("gamma", 1e3, 1e3, 0.1)
        assert p.command == "denoise"

    def test_fig3_deblur(self):
        p = PRESETS["fig3-deblur"]
        assert (p.prior, p.lam, p.C, p.sigma) == ("gamma", 4e3, 4e3, 0.02)
        assert (p.blur_radius, p.blur_sigma) == (1, 1.0)

    def test_fig4_msprior(self):
        p = PRESETS["fig4-msprior"]
        assert (p.prior, p.lam, p.mu, p.sigma) == ("two-point", 800.0, 3.8, 0.1)
        assert p.iters == 100
        assert p.command == "sample"


class TestDenoiseCommand:
    def test_preset_end_to_end(self, tmp_path, noisy_png):
        out = tmp_path / "out.png"
        edges = tmp_path / "edges.png"
        code = main([
            "denoise", "--preset", "fig2-denoise", "--iters", "10",
            "--input", str(noisy_png), "--output", str(out), "--edges", str(edges),
        ])
        assert code == 0
        assert out.exists() and edges.exists() and (tmp_path / "edges.png.txt").exists()
        assert load_image(out).shape == (1, 24, 24)

    def test_deterministic_outputs(self, tmp_path, noisy_png):
        outs = []
        for name in ("a.png", "b.png"):
            out = tmp_path / name
            code = main([
                "denoise", "--prior", "gamma", "--lambda", "1000", "--sigma", "0.1",
                "--iters", "8", "--seed", "5", "--add-noise", "0.02",
                "--input", str(noisy_png), "--output", str(out),
            ])
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_metrics_trace_nonincreasing(self, tmp_path, noisy_png):
        metrics = tmp_path / "metrics.txt"
        code = main([
            "denoise", "--preset", "fig2-denoise", "--iters", "12",
            "--input", str(noisy_png), "--output", str(tmp_path / "out.png"),
            "--metrics", str(metrics),
        ])
        assert code == 0
        trace = [float(line) for line in metrics.read_text().splitlines()]
        assert len(trace) >= 2
        assert all(b - a <= 1e-10 for a, b in zip(trace, trace[1:]))

    def test_metrics_with_reference_prepends_psnr(self, tmp_path, noisy_png):
        clean_path = tmp_path / "clean.png"
        save_image(make_test_image(24), clean_path)
        metrics = tmp_path / "metrics.txt"
        code = main([
            "denoise", "--preset", "fig2-denoise", "--iters", "12",
            "--input", str(noisy_png), "--output", str(tmp_path / "out.png"),
            "--metrics", str(metrics), "--reference", str(clean_path),
        ])
        assert code == 0
        lines = metrics.read_text().splitlines()
        psnr_value = float(lines[0])
        assert 10.0 < psnr_value < 60.0
        assert len(lines) >= 3

    def test_methods_all_run(self, tmp_path, noisy_png):
        for method in ("em", "meanfield", "gd"):
            out = tmp_path / f"{method}.png"
            code = main([
                "denoise", "--method", method, "--sigma", "0.1", "--iters", "3",
                "--input", str(noisy_png), "--output", str(out),
            ])
            assert code == 0, method
            assert out.exists()


class TestDeblurCommand:
    def test_preset_runs(self, tmp_path):
        from gsmrestore.operators import ConvolutionOperator, gaussian_kernel

        clean = make_test_image(24)
        blurry = add_noise(ConvolutionOperator(gaussian_kernel(1, 1.0)).apply(clean),
                           0.02, seed=2)
        inp = tmp_path / "blurry.png"
        save_image(np.clip(blurry, 0, 1), inp)
        out = tmp_path / "sharp.png"
        code = main([
            "deblur", "--preset", "fig3-deblur", "--iters", "10",
            "--input", str(inp), "--output", str(out),
        ])
        assert code == 0
        assert out.exists()


class TestSampleCommand:
    def test_two_point_chain(self, tmp_path, noisy_png):
        out = tmp_path / "mean.png"
        edges = tmp_path / "edges.png"
        code = main([
            "sample", "--preset", "fig4-msprior", "--iters", "20", "--burn-in", "4",
            "--input", str(noisy_png), "--output", str(out), "--edges", str(edges),
        ])
        assert code == 0
        assert out.exists() and edges.exists()

    def test_exponential_prior_rejected(self, tmp_path, noisy_png, capsys):
        code = main([
            "sample", "--prior", "exp", "--iters", "5",
            "--input", str(noisy_png), "--output", str(tmp_path / "x.png"),
        ])
        assert code == 1
        assert "sampler" in capsys.readouterr().err


class TestSynthCommand:
    def test_writes_image(self, tmp_path):
        out = tmp_path / "clean.png"
        assert main(["synth", "--size", "32", "--output", str(out)]) == 0
        assert load_image(out).shape == (1, 32, 32)

    def test_noisy_variant_seeded(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for path in (a, b):
            main(["synth", "--size", "16", "--add-noise", "0.1", "--seed", "3",
                  "--output", str(path)])
        assert a.read_bytes() == b.read_bytes()


class TestUsageErrors:
    def test_negative_sigma(self, tmp_path, noisy_png, capsys):
        code = main([
            "denoise", "--sigma", "-1",
            "--input", str(noisy_png), "--output", str(tmp_path / "o.png"),
        ])
        assert code == 1
        assert "sigma" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["denoise", "--frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_input(self, tmp_path, capsys):
        assert main(["denoise", "--output", str(tmp_path / "o.png")]) == 1
        assert "--input" in capsys.readouterr().err

    def test_invalid_burn_in(self, tmp_path, noisy_png, capsys):
        code = main([
            "sample", "--prior", "two-point", "--iters", "5", "--burn-in", "5",
            "--input", str(noisy_png), "--output", str(tmp_path / "o.png"),
        ])
        assert code == 1
        assert "burn_in" in capsys.readouterr().err

    def test_unknown_preset_via_config(self, tmp_path, noisy_png, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("preset = fig9-wat\n")
        code = main([
            "denoise", "--config", str(cfg),
            "--input", str(noisy_png), "--output", str(tmp_path / "o.png"),
        ])
        assert code == 1
        assert "preset" in capsys.readouterr().err

    def test_runtime_error_is_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"not an image")
        code = main([
            "denoise", "--input", str(bad), "--output", str(tmp_path / "o.png"),
        ])
        assert code == 2
        assert capsys.readouterr().err


class TestConfigFile:
    def test_flags_override_config(self, tmp_path, noisy_png):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# experiment configuration\n"
            "prior = gamma\n"
            "lambda = 1000\n"
            "sigma = 0.25\n"
            "iters = 3\n"
        )
        out_cfg = tmp_path / "config_sigma.png"
        out_flag = tmp_path / "flag_sigma.png"
        assert main(["denoise", "--config", str(cfg), "--input", str(noisy_png),
                     "--output", str(out_cfg)]) == 0
        assert main(["denoise", "--config", str(cfg), "--sigma", "0.1",
                     "--input", str(noisy_png), "--output", str(out_flag)]) == 0
        assert out_cfg.read_bytes() != out_flag.read_bytes()

    def test_bad_config_line(self, tmp_path, noisy_png, capsys):
        cfg = tmp_path / "broken.cfg"
        cfg.write_text("sigma 0.1\n")
        assert main(["denoise", "--config", str(cfg), "--input", str(noisy_png),
                     "--output", str(tmp_path / "o.png")]) == 1
        assert "key = value" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, noisy_png, capsys):
        cfg = tmp_path / "broken.cfg"
        cfg.write_text("smoothing = 12\n")
        assert main(["denoise", "--config", str(cfg), "--input", str(noisy_png),
                     "--output", str(tmp_path / "o.png")]) == 1
        assert "smoothing" in capsys.readouterr().err


class TestConsoleEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "clean.png"
        proc = subprocess.run(
            [sys.executable, "-c",
             "import sys; from gsmrestore.cli import main; sys.exit(main(sys.argv[1:]))",
             "synth", "--size", "8", "--output", str(out)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert out.exists()

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-c",
             "import sys; from gsmrestore.cli import main; sys.exit(main(sys.argv[1:]))",
             "denoise", "--nope"],
            capture_output=True,
        )
        assert proc.returncode == 1
        assert b"usage" in proc.stderr
