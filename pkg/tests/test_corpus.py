# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Tests training corpora"""

# pylint: disable=missing-function-docstring

from pathlib import Path

import numpy as np
import pytest

from mwcnn_restore.corpus import load_corpus, split_corpus, synthetic_corpus
from mwcnn_restore.pnm import ImageU8, write_pnm
from mwcnn_restore.tensor import new_rng


def test_synthetic_corpus_is_deterministic() -> None:
    a = synthetic_corpus(3, 32, new_rng(4))
    b = synthetic_corpus(3, 32, new_rng(4))
    assert len(a) == 3
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_synthetic_images_are_8bit_scale() -> None:
    for img in synthetic_corpus(4, 48, new_rng(0)):
        assert img.shape == (48, 48)
        assert img.dtype == np.float32
        assert 0.0 <= float(img.min()) and float(img.max()) <= 255.0
        np.testing.assert_array_equal(img, np.rint(img))
        assert float(img.std()) > 2.0


def test_synthetic_rejects_empty() -> None:
    with pytest.raises(ValueError):
        synthetic_corpus(0, 16, new_rng(0))


def test_load_corpus(tmp_path: Path) -> None:
    write_pnm(ImageU8(np.full((6, 4), 7, dtype=np.uint8)), str(tmp_path / "b.pgm"))
    write_pnm(ImageU8(np.full((3, 5, 3), 9, dtype=np.uint8)), str(tmp_path / "a.ppm"))
    (tmp_path / "readme.txt").write_text("skip me", encoding="utf-8")
    corpus = load_corpus(str(tmp_path))
    assert [img.shape for img in corpus] == [(3, 5), (6, 4)]
    assert corpus[0].dtype == np.float32
    assert float(corpus[1][0, 0]) == 7.0


def test_load_empty_directory(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        load_corpus(str(tmp_path))


def test_split_corpus() -> None:
    corpus = synthetic_corpus(5, 8, new_rng(1))
    train, val = split_corpus(corpus, 2)
    assert len(train) == 3 and len(val) == 2
    assert val[-1] is corpus[-1]
    assert split_corpus(corpus, 0)[1] == []
    with pytest.raises(ValueError):
        split_corpus(corpus, 5)
