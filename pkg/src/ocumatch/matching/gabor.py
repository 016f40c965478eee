"""Gabor iris codes and their Hamming comparison.

A filterbank is a pair of complex (quadrature) Gabor filters oriented along
the angular axis of the normalized texture. Filtering wraps circularly in
angle and reflects radially; the phase of each response is quantized to two
bits (sign of real, sign of imaginary part). Bits whose response magnitude
is negligible are masked out as uninformative.

Filtering is a direct windowed correlation (no FFT) so that circularly
shifting the input texture shifts the response — and therefore the code —
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# (rows m, cols n) of the coefficient matrices per parameter set; each set
# has two filters with wavelengths n/2 and n/4.
PARAMETER_SETS = {
    "A": (9, 15),
    "B": (9, 27),
    "C": (9, 51),
}

DEFAULT_SHIFT_RANGE = 8
# A bit is masked out when its response magnitude falls below
# rel * (that filter's max magnitude), or below the absolute epsilon that
# catches the all-zero response of a constant texture.
MAGNITUDE_FLOOR_REL = 1e-6
MAGNITUDE_FLOOR_ABS = 1e-6


class EncodeError(Exception):
    pass


class MatchError(Exception):
    pass


@dataclass(frozen=True)
class GaborFilterbank:
    parameter_set_name: str
    filters: tuple[np.ndarray, ...]  # complex128, odd dimensions, DC-free


@dataclass
class IrisCode:
    """Binary phase code with validity mask.

    Rows are blocks of radial bands: for filter f, rows
    [f*2H, f*2H+H) hold the real-part bits and [f*2H+H, f*2H+2H) the
    imaginary-part bits, H being the number of radial bands. Columns are
    angular samples.
    """

    bits: np.ndarray  # bool
    mask: np.ndarray  # bool, same shape

    def __post_init__(self) -> None:
        if self.bits.shape != self.mask.shape:
            raise EncodeError("bits and mask must have identical shapes")

    @property
    def degenerate(self) -> bool:
        return not bool(self.mask.any())


def build_filterbank(parameter_set: str) -> GaborFilterbank:
    """Two quadrature Gabor filters of the named size (sets A, B, C)."""
    try:
        m, n = PARAMETER_SETS[parameter_set]
    except KeyError:
        raise ValueError(f"unknown parameter set: {parameter_set!r} "
                         f"(expected one of {sorted(PARAMETER_SETS)})") from None
    sigma_y = m / 5.0  # radial spread
    sigma_x = n / 5.0  # angular spread
    ys = np.arange(m) - m // 2
    xs = np.arange(n) - n // 2
    envelope = np.exp(-(xs[None, :] ** 2) / (2 * sigma_x ** 2)
                      - (ys[:, None] ** 2) / (2 * sigma_y ** 2))
    filters = []
    for wavelength in (n / 2.0, n / 4.0):
        carrier = np.exp(2j * np.pi * xs[None, :] / wavelength)
        g = envelope * carrier
        # Remove any DC so a constant texture produces exactly zero response.
        g = (g.real - g.real.mean()) + 1j * (g.imag - g.imag.mean())
        filters.append(g)
    return GaborFilterbank(parameter_set_name=parameter_set, filters=tuple(filters))


def _correlate_ring(texture: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Correlate with circular wrap in angle (cols), reflection in radius.

    Direct windowed products, summed in a fixed order, so a column-rolled
    texture yields the identically rolled response (bit-exact).
    """
    m, n = kernel.shape
    padded = np.pad(texture, ((m // 2, m // 2), (0, 0)), mode="reflect")
    padded = np.pad(padded, ((0, 0), (n // 2, n // 2)), mode="wrap")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (m, n))
    return np.einsum("ijkl,kl->ij", windows, kernel)


def encode(texture: np.ndarray, bank: GaborFilterbank) -> IrisCode:
    """Quantize filter responses over a normalized texture into an IrisCode.

    A texture with no structure (constant) produces an all-clear mask; the
    resulting code reports ``degenerate`` and cannot be matched.
    """
    texture = np.asarray(texture, dtype=np.float64)
    if texture.ndim != 2:
        raise EncodeError("texture must be 2-D")
    heights = [f.shape[0] for f in bank.filters]
    widths = [f.shape[1] for f in bank.filters]
    if texture.shape[0] < max(heights) or texture.shape[1] < max(widths):
        raise EncodeError("texture smaller than filter")

    bit_blocks = []
    mask_blocks = []
    for kernel in bank.filters:
        real = _correlate_ring(texture, kernel.real)
        imag = _correlate_ring(texture, kernel.imag)
        magnitude = np.hypot(real, imag)
        floor = max(MAGNITUDE_FLOOR_REL * float(magnitude.max()), MAGNITUDE_FLOOR_ABS)
        valid = magnitude >= floor
        bit_blocks.extend([real >= 0.0, imag >= 0.0])
        mask_blocks.extend([valid, valid])
    return IrisCode(bits=np.concatenate(bit_blocks, axis=0),
                    mask=np.concatenate(mask_blocks, axis=0))


def hamming_match(code_a: IrisCode, code_b: IrisCode,
                  shift_range: int = DEFAULT_SHIFT_RANGE) -> float:
    """Minimum normalized Hamming distance over angular shifts.

    Shifting one code across [-shift_range, +shift_range] columns absorbs
    in-plane rotation between the two captures; the shift set is symmetric
    so the distance is too.
    """
    if code_a.bits.shape != code_b.bits.shape:
        raise MatchError("codes have different shapes")
    best = None
    for shift in range(-shift_range, shift_range + 1):
        mask = code_a.mask & np.roll(code_b.mask, shift, axis=1)
        comparable = int(mask.sum())
        if comparable == 0:
            continue
        disagree = int(((code_a.bits ^ np.roll(code_b.bits, shift, axis=1)) & mask).sum())
        distance = disagree / comparable
        if best is None or distance < best:
            best = distance
    if best is None:
        raise MatchError("no comparable bits")
    return best
