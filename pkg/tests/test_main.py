# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests functions in main"""

# pylint: disable=missing-function-docstring

import json
from pathlib import Path

import numpy as np
import pytest

from mwcnn_restore.corpus import synthetic_corpus
from mwcnn_restore.main import main
from mwcnn_restore.pnm import ImageU8, read_pnm, write_pnm
from mwcnn_restore.tensor import new_rng

TINY_CONFIG = """\
# one-level network for quick runs
levels=1
widths=4
block_depth=2
sigma=25
patch=16
batch=2
epochs=2
steps_per_epoch=2
val_count=1
"""


def _run(argv: list[str]) -> int:
    with pytest.raises(SystemExit) as exc_info:
        main(argv)
    code = exc_info.value.code
    return 0 if code is None else int(code)


def _write_images(directory: Path, count: int) -> list[Path]:
    directory.mkdir(exist_ok=True)
    paths = []
    for i, img in enumerate(synthetic_corpus(count, 32, new_rng(11))):
        path = directory / f"clean{i}.pgm"
        write_pnm(ImageU8(img.astype(np.uint8)), str(path))
        paths.append(path)
    return paths


def test_no_command_prints_help(capsys: pytest.CaptureFixture[str]) -> None:
    assert _run([]) == 0
    assert "usage: mwcnn" in capsys.readouterr().out


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    assert _run(["-V"]) == 0
    assert capsys.readouterr().out.strip()


def test_unknown_flag_is_usage_error() -> None:
    assert _run(["selfcheck", "--no-such-flag"]) == 2


def test_selfcheck_subset(capsys: pytest.CaptureFixture[str]) -> None:
    assert _run(["selfcheck", "--cases", "3", "--only", "sum_pool", "haar_oracle"]) == 0
    out = capsys.readouterr().out
    assert "All checks passed: True" in out


def test_selfcheck_json_file(tmp_path: Path) -> None:
    out = tmp_path / "report.json"
    argv = ["selfcheck", "--cases", "2", "--only", "reconstruction"]
    assert _run(argv + ["-r", "json", "--output-file", str(out)]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["allPassed"] is True


def test_rfmask_dilated_chain(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    mask_path = tmp_path / "mask.pgm"
    assert _run(["rfmask", "--dilated-chain", "3", "-o", str(mask_path)]) == 0
    out = capsys.readouterr().out.strip()
    assert out == (
        "pixel 16 16: bbox (10, 10)-(22, 22), extent 13x13, support 49, holes 120"
    )
    mask = read_pnm(str(mask_path)).samples
    assert mask.shape == (32, 32)
    assert int(np.count_nonzero(mask)) == 49


def test_rfmask_from_config(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = tmp_path / "tiny.cfg"
    config.write_text(TINY_CONFIG, encoding="utf-8")
    assert _run(["rfmask", "--config", str(config), "--pixel", "5", "9"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("pixel 5 9:")
    assert out.rstrip().endswith("holes 0")


def test_wavelet_roundtrip(tmp_path: Path) -> None:
    (src,) = _write_images(tmp_path / "img", 1)
    bands = tmp_path / "bands"
    out = tmp_path / "back.pgm"
    argv = ["wavelet", "decompose", str(src), "--bank", "db2", "--levels", "2"]
    assert _run(argv + ["-o", str(bands)]) == 0
    assert len(list(bands.glob("band_*.lo.pgm"))) == 16
    assert _run(["wavelet", "reconstruct", str(bands), "-o", str(out)]) == 0
    original = read_pnm(str(src)).samples.astype(int)
    back = read_pnm(str(out)).samples.astype(int)
    assert np.abs(original - back).max() <= 1


def test_train_denoise_eval(tmp_path: Path) -> None:
    config = tmp_path / "tiny.cfg"
    config.write_text(TINY_CONFIG, encoding="utf-8")
    ckpt = tmp_path / "model.ckpt"
    log = tmp_path / "train.log"
    argv = ["train", "--config", str(config), "--synthetic", "3", "--synthetic-size", "32"]
    assert _run(argv + ["-o", str(ckpt), "--log", str(log)]) == 0
    assert ckpt.read_bytes()[:4] == b"MWC1"
    lines = log.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# epoch step lr loss val_psnr"
    assert [line.split()[0] for line in lines[1:]] == ["0", "1"]

    clean = _write_images(tmp_path / "clean", 2)
    restored = tmp_path / "restored.pgm"
    assert _run(["denoise", "--checkpoint", str(ckpt), str(clean[0]), "-o", str(restored)]) == 0
    assert read_pnm(str(restored)).samples.shape == (32, 32)

    table = tmp_path / "eval.txt"
    argv = ["eval", "--checkpoint", str(ckpt), "--clean-dir", str(tmp_path / "clean")]
    assert _run(argv + ["--seed", "3", "-o", str(table)]) == 0
    rows = table.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "# border crop 2 px; columns: file psnr_db ssim"
    assert [r.split("\t")[0] for r in rows[1:]] == ["clean0.pgm", "clean1.pgm", "# mean"]


def test_resume_requires_checkpoint(tmp_path: Path) -> None:
    argv = ["train", "--synthetic", "2", "--resume", str(tmp_path / "none.ckpt")]
    assert _run(argv + ["-o", str(tmp_path / "out.ckpt")]) == 1


def test_train_needs_images(tmp_path: Path) -> None:
    assert _run(["train", "-o", str(tmp_path / "out.ckpt")]) == 1


def test_bad_config_reports_error(tmp_path: Path) -> None:
    config = tmp_path / "bad.cfg"
    config.write_text("levels=9\n", encoding="utf-8")
    assert _run(["rfmask", "--config", str(config)]) == 1


def test_help_documents_output_formats(capsys: pytest.CaptureFixture[str]) -> None:
    assert _run(["eval", "-h"]) == 0
    out = capsys.readouterr().out
    assert '"# mean" footer' in out
    assert _run(["wavelet", "decompose", "-h"]) == 0
    out = capsys.readouterr().out
    assert "band_<path>.lo.pgm" in out
    assert "only a preview" in out
    assert _run(["-h"]) == 0
    assert "desk" in capsys.readouterr().out


def test_config_and_preset_are_exclusive(tmp_path: Path) -> None:
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_CONFIG, encoding="utf-8")
    argv = ["train", "--config", str(cfg), "--preset", "desk", "--synthetic", "3"]
    assert _run(argv + ["-o", str(tmp_path / "m.ckpt")]) == 2
    assert _run(["ablate", "--preset", "paper", "--synthetic", "3"]) == 2
