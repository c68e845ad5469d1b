"""Square QAM constellations, Gray mapping, complex<->real stacking, slicing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Constellation:
    """Gray-coded square QAM alphabet with unit average symbol power.

    Symbol index encodes the Gray-labelled bit pattern: the first b/2 bits
    select the real PAM level, the last b/2 bits the imaginary level
    (reflected-binary Gray code per axis).
    """

    points_complex: np.ndarray  # (2**b,) complex, indexed by bit pattern
    pam_levels: np.ndarray      # (2**(b/2),) real, strictly increasing
    bits_per_symbol: int
    # bits (as packed ints 0..2**b-1) <-> symbol index are identical here;
    # kept explicit so tests can assert the bijection.
    gray_index: np.ndarray = field(default=None)  # type: ignore[assignment]

    @property
    def n_levels(self) -> int:
        return len(self.pam_levels)


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def make_qam(bits_per_symbol: int) -> Constellation:
    """Build a unit-power square QAM constellation (b even, b >= 2)."""
    b = bits_per_symbol
    if b < 2 or b % 2 != 0:
        raise ValueError("square QAM requires an even number of bits per symbol")
    k = 2 ** (b // 2)
    # levels (2i - k + 1) scaled so that E|c|^2 = 2 E[p^2] = 1
    scale = 1.0 / np.sqrt(2.0 * (k * k - 1) / 3.0)
    levels = scale * (2.0 * np.arange(k) - k + 1)

    # bit pattern (per axis) -> level index: invert the Gray code
    gray_to_level = np.empty(k, dtype=np.int64)
    for lvl in range(k):
        gray_to_level[_gray(lvl)] = lvl

    points = np.empty(2 ** b, dtype=np.complex128)
    half = b // 2
    for code in range(2 ** b):
        re_bits = code >> half
        im_bits = code & (k - 1)
        points[code] = levels[gray_to_level[re_bits]] + 1j * levels[gray_to_level[im_bits]]

    level_to_gray = np.array([_gray(i) for i in range(k)], dtype=np.int64)
    return Constellation(
        points_complex=points,
        pam_levels=levels,
        bits_per_symbol=b,
        gray_index=level_to_gray,
    )


def make_qpsk() -> Constellation:
    """Gray-coded QPSK: points (+-1 +-1j)/sqrt(2)."""
    return make_qam(2)


@dataclass
class RealLinearModel:
    """Real-stacked observation y = H s + n.

    sigma2 is the complex-domain per-entry noise variance; each stacked
    real component carries sigma2/2.
    """

    y: np.ndarray       # (2Nr,)
    h: np.ndarray       # (2Nr, 2Nt)
    sigma2: float

    @property
    def nt2(self) -> int:
        return self.h.shape[1]


def stack_vector(x: np.ndarray) -> np.ndarray:
    """[Re{x}; Im{x}] for a complex vector."""
    x = np.asarray(x)
    return np.concatenate([x.real, x.imag])


def unstack_vector(xr: np.ndarray) -> np.ndarray:
    """Inverse of stack_vector."""
    n = len(xr) // 2
    return xr[:n] + 1j * xr[n:]


def stack_matrix(a: np.ndarray) -> np.ndarray:
    """[[Re{A}, -Im{A}]; [Im{A}, Re{A}]]; a ring homomorphism."""
    a = np.asarray(a)
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def stack_real(y_complex, h_complex, s_complex=None):
    """Map the complex linear model to its real-stacked equivalent.

    Returns (y, H) or (y, H, s); satisfies
    stack(Hc @ sc) == stack_matrix(Hc) @ stack_vector(sc) exactly.
    """
    y_complex = np.asarray(y_complex)
    h_complex = np.asarray(h_complex)
    if h_complex.ndim != 2 or y_complex.shape != (h_complex.shape[0],):
        raise ValueError("inconsistent complex dimensions: H must be Nr x Nt, y length Nr")
    y = stack_vector(y_complex)
    h = stack_matrix(h_complex)
    if s_complex is None:
        return y, h
    s_complex = np.asarray(s_complex)
    if s_complex.shape != (h_complex.shape[1],):
        raise ValueError("s length must equal Nt")
    return y, h, stack_vector(s_complex)


def slice_to_levels(s_real: np.ndarray, con: Constellation) -> np.ndarray:
    """Level index of the nearest PAM level per coordinate (ties -> smaller)."""
    levels = con.pam_levels
    mids = 0.5 * (levels[:-1] + levels[1:])
    # value exactly on a midpoint goes to the lower level
    return np.searchsorted(mids, s_real, side="left")


def slice_real(s_real: np.ndarray, con: Constellation):
    """Hard decision: real-stacked estimate -> (complex symbols, bits).

    Bits are returned as a flat 0/1 array, b bits per symbol, Gray-mapped.
    """
    s_real = np.asarray(s_real, dtype=float)
    if len(s_real) % 2 != 0:
        raise ValueError("real-stacked vector must have even length")
    nt = len(s_real) // 2
    idx = slice_to_levels(s_real, con)
    re_idx, im_idx = idx[:nt], idx[nt:]
    symbols = con.pam_levels[re_idx] + 1j * con.pam_levels[im_idx]
    half = con.bits_per_symbol // 2
    re_codes = con.gray_index[re_idx]
    im_codes = con.gray_index[im_idx]
    bits = np.empty((nt, con.bits_per_symbol), dtype=np.int8)
    for j in range(half):
        bits[:, half - 1 - j] = (re_codes >> j) & 1
        bits[:, con.bits_per_symbol - 1 - j] = (im_codes >> j) & 1
    return symbols, bits.ravel()


def bits_to_symbols(bits: np.ndarray, con: Constellation) -> np.ndarray:
    """Map a flat 0/1 array (b bits per symbol) to complex symbols."""
    b = con.bits_per_symbol
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, b)
    weights = 1 << np.arange(b)[::-1]
    codes = bits @ weights
    return con.points_complex[codes]


def random_symbols(nt: int, con: Constellation, rng: np.random.Generator):
    """Draw nt uniform symbols; returns (symbols, bits)."""
    bits = rng.integers(0, 2, size=nt * con.bits_per_symbol, dtype=np.int64)
    return bits_to_symbols(bits, con), bits.astype(np.int8)
