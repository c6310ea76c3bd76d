import csv
import hashlib
import json

import numpy as np
import pytest

from conftest import make_truth
from turbrestore.cli import main
from turbrestore.frameio import load_frame, save_frame, save_stack
from turbrestore.simulator import TurbulenceConfig, simulate_sequence


def write_truth(tmp_path, size=24, seed=0, name="truth.png"):
    path = tmp_path / name
    save_frame(path, make_truth(size, seed))
    return path


def hash_tree(directory):
    digest = hashlib.sha256()
    for path in sorted(directory.rglob("*")):
        if path.is_file():
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def simulate_args(truth, out, **overrides):
    args = ["simulate", str(truth), "--out", str(out)]
    for key, value in overrides.items():
        args += [f"--{key.replace('_', '-')}", str(value)]
    return args


class TestSimulateCommand:
    def test_degenerate_single_frame_matches_input(self, tmp_path):
        truth = write_truth(tmp_path)
        out = tmp_path / "sim"
        code = main(
            simulate_args(
                truth, out, n_frames=1, severe_lo=0.0, severe_hi=0.0,
                mild_lo=0.0, mild_hi=0.0, blur_sigma=0.0,
            )
        )
        assert code == 0
        frame = load_frame(out / "frame_0001.png")
        np.testing.assert_array_equal(frame, load_frame(truth))

    def test_fixed_seed_is_reproducible(self, tmp_path):
        truth = write_truth(tmp_path, seed=1)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(simulate_args(truth, out, n_frames=3, seed=5)) == 0
        manifest_keys = ("config", "severe_indices", "strengths")
        ma = json.loads((out_a / "manifest.json").read_text())
        mb = json.loads((out_b / "manifest.json").read_text())
        for key in manifest_keys:
            assert ma[key] == mb[key]
        frames_a = sorted(p.name for p in out_a.glob("*.png"))
        for name in frames_a:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_manifest_counts_severe_indices(self, tmp_path):
        truth = write_truth(tmp_path, size=16, seed=2)
        out = tmp_path / "sim"
        code = main(
            simulate_args(
                truth, out, n_frames=100, severe_fraction=0.7, patch_size=9,
            )
        )
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["severe_indices"]) == 70

    def test_save_fields(self, tmp_path):
        truth = write_truth(tmp_path, size=16, seed=3)
        out = tmp_path / "sim"
        code = main(
            simulate_args(truth, out, n_frames=2, patch_size=9) + ["--save-fields"]
        )
        assert code == 0
        fields = np.load(out / "motion_fields.npz")
        assert fields["u"].shape == (2, 16, 16)


class TestRestoreCommand:
    def _simulated_dir(self, tmp_path, n_frames=8, size=24, seed=0, **kwargs):
        truth = make_truth(size, 50 + seed)
        config = TurbulenceConfig(
            n_frames=n_frames, patch_size=9, blur_sigma=0.5,
            rng_seed=seed, **kwargs,
        )
        sim = simulate_sequence(truth, config)
        frames_dir = tmp_path / "frames"
        save_stack(frames_dir, sim.stack.data)
        return frames_dir

    def test_single_frame_directory(self, tmp_path):
        frames_dir = tmp_path / "frames"
        frames_dir.mkdir()
        frame = make_truth(24, 4)
        save_frame(frames_dir / "only.png", frame)
        out = tmp_path / "out"
        code = main(["restore", str(frames_dir), "--out", str(out)])
        assert code == 0
        np.testing.assert_array_equal(
            load_frame(out / "restored.png"), load_frame(frames_dir / "only.png")
        )
        assert json.loads((out / "subsample.json").read_text()) == [1]

    def test_trace_totals_non_increasing(self, tmp_path):
        frames_dir = self._simulated_dir(tmp_path)
        out = tmp_path / "out"
        code = main(["restore", str(frames_dir), "--out", str(out)])
        assert code == 0
        with open(out / "trace.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        totals = [float(r["total_energy"]) for r in rows]
        assert all(b <= a + 1e-12 for a, b in zip(totals, totals[1:]))
        assert rows[0]["iteration"] == "1"

    def test_liris_on_identical_stack(self, tmp_path):
        frames_dir = tmp_path / "frames"
        frame = make_truth(16, 5)
        save_stack(frames_dir, np.repeat(frame[None], 5, axis=0))
        out = tmp_path / "out"
        code = main(
            ["restore", str(frames_dir), "--out", str(out), "--model", "liris"]
        )
        assert code == 0
        restored = load_frame(out / "restored.png")
        reference = load_frame(frames_dir / "frame_0001.png")
        assert np.abs(restored - reference).max() <= 1.0 / 255.0 + 1e-12

    def test_nonconvergence_exit_code(self, tmp_path):
        frames_dir = self._simulated_dir(tmp_path, seed=1)
        out = tmp_path / "out"
        args = [
            "restore", str(frames_dir), "--out", str(out),
            "--epsilon", "1e-16", "--max-outer", "1",
        ]
        assert main(args) == 2
        assert main(args + ["--allow-nonconverged"]) == 0


class TestEvaluateCommand:
    def test_identical_files(self, tmp_path, capsys):
        truth = write_truth(tmp_path, seed=6)
        out = tmp_path / "metrics.json"
        code = main(["evaluate", str(truth), str(truth), "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report == {"psnr_db": "inf", "ssim": 1.0}
        assert json.loads(capsys.readouterr().out) == report

    def test_black_vs_mid_gray(self, tmp_path):
        black, gray = tmp_path / "black.png", tmp_path / "gray.png"
        save_frame(black, np.zeros((16, 16)))
        # 8-bit files cannot hold 0.5 exactly; a 127/128 checkerboard has
        # mean square 0.2500038, i.e. PSNR 6.0205 dB to 4 decimals
        checker = np.indices((16, 16)).sum(axis=0) % 2
        save_frame(gray, (127.0 + checker) / 255.0)
        out = tmp_path / "metrics.json"
        assert main(["evaluate", str(black), str(gray), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["psnr_db"] == pytest.approx(6.0206, abs=1e-3)

    def test_end_to_end_pipeline_stable(self, tmp_path):
        truth = write_truth(tmp_path, size=24, seed=7)
        reports = []
        for tag in ("x", "y"):
            sim_dir = tmp_path / f"sim_{tag}"
            out_dir = tmp_path / f"out_{tag}"
            metrics = tmp_path / f"metrics_{tag}.json"
            assert main(
                simulate_args(truth, sim_dir, n_frames=6, patch_size=9, seed=9)
            ) == 0
            assert main(["restore", str(sim_dir), "--out", str(out_dir)]) == 0
            assert main(
                ["evaluate", str(out_dir / "restored.png"), str(truth),
                 "--out", str(metrics)]
            ) == 0
            reports.append(json.loads(metrics.read_text()))
        assert reports[0] == reports[1]


class TestOracleCommand:
    def test_single_frame_gap_zero(self, tmp_path, capsys):
        frames_dir = tmp_path / "frames"
        frames_dir.mkdir()
        save_frame(frames_dir / "f.png", make_truth(16, 8))
        assert main(["oracle", str(frames_dir)]) == 0
        out = capsys.readouterr().out
        assert "energy gap: 0.000e+00" in out

    def test_random_stack_gap_tiny(self, tmp_path, capsys):
        rng = np.random.default_rng(10)
        frames_dir = tmp_path / "frames"
        save_stack(frames_dir, rng.random((10, 16, 16)))
        assert main(["oracle", str(frames_dir)]) == 0
        out = capsys.readouterr().out
        gap = float(out.split("energy gap: ")[1].split("\n")[0])
        assert gap <= 1e-12

    def test_duplicate_energies_flagged(self, tmp_path, capsys):
        frames_dir = tmp_path / "frames"
        frame = make_truth(16, 11)
        save_stack(frames_dir, np.repeat(frame[None], 4, axis=0))
        assert main(["oracle", str(frames_dir)]) == 0
        out = capsys.readouterr().out
        assert "unverifiable" in out

    def test_too_many_frames(self, tmp_path):
        frames_dir = tmp_path / "frames"
        save_stack(frames_dir, np.random.default_rng(12).random((21, 12, 12)))
        assert main(["oracle", str(frames_dir)]) == 2


class TestExitCodes:
    def test_missing_input_is_runtime_error(self, tmp_path):
        assert main(["restore", str(tmp_path / "nope"), "--out", str(tmp_path)]) == 2

    def test_bad_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["restore"])  # missing required arguments
        assert exc.value.code == 1

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["transmogrify"])
        assert exc.value.code == 1
