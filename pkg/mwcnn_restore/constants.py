# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Constants."""

SUPPORTED_BANKS_DESC = {
    "haar": "Unnormalized 2x2 Haar filters (entries +-1, synthesis gain 1/4)",
    "db2": "Orthonormal 4x4 Daubechies-2 filters with periodic extension",
}
DEFAULT_BANK = "haar"
SUPPORTED_BANKS = set(SUPPORTED_BANKS_DESC.keys())

SUPPORTED_DOWNSAMPLERS_DESC = {
    "dwt": "Wavelet transform down/up-sampling (MWCNN)",
    "sum_pool": "2x2 sum-pooling with LL-only inverse (U-Net with sum skips)",
    "dilated_chain": "Plain FCN of dilation-2 convolutions (no resampling)",
}
DEFAULT_DOWNSAMPLER = "dwt"
SUPPORTED_DOWNSAMPLERS = set(SUPPORTED_DOWNSAMPLERS_DESC.keys())

SUPPORTED_ABLATION_VARIANTS_DESC = {
    "haar": "MWCNN with Haar in both subnetworks",
    "db2": "MWCNN with Daubechies-2 in both subnetworks",
    "hd": "MWCNN with Haar contracting and Daubechies-2 expanding (non-invertible)",
    "sum_pool": "U-Net with sum-pooling and sum skips",
    "dilated_chain": "Dilated-2 chain of the same depth",
}
DEFAULT_ABLATION_VARIANTS = ("haar", "sum_pool", "dilated_chain")
SUPPORTED_ABLATION_VARIANTS = set(SUPPORTED_ABLATION_VARIANTS_DESC.keys())

SUPPORTED_PRESETS_DESC = {
    "full": "Default network, 40x25 steps decaying the rate from 1e-3 to 1e-4",
    "desk": "Two levels of 8 and 16 channels, 5x100 steps at a constant rate of 0.01",
}
DEFAULT_PRESET = "full"
DEFAULT_ABLATION_PRESET = "desk"
SUPPORTED_PRESETS = set(SUPPORTED_PRESETS_DESC.keys())

OUTPUT_CHOICES_DESC = {
    "print": "Print report to console",
    "json": "Report in JSON format",
    "quiet": "No output unless there are errors",
}

MAX_LEVELS = 4
DEFAULT_LEVELS = 3
DEFAULT_BLOCK_DEPTH = 4
DEFAULT_WIDTHS = (16, 32, 64)

# Batch normalization
BN_MOMENTUM = 0.1
BN_EPS = 1e-5

# ADAM
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

DEFAULT_LR_START = 1e-3
DEFAULT_LR_END = 1e-4
DESK_LR = 0.01
NOISE_LEVELS = (15, 25, 50)

PIXEL_PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Gradient checks: elements where both |analytic| and |numeric| fall below
# this threshold are exempt from the relative-error test.
GRAD_CHECK_EXEMPT = 1e-6
GRAD_CHECK_RTOL = 1e-3

CHECKPOINT_MAGIC = b"MWC1"
CHECKPOINT_VERSION = 1

THREADS_ENV_VAR = "MWCNN_THREADS"
SUBBAND_SIDECAR = "subbands.txt"

SELFCHECK_CASES = 100
