import numpy as np
import pytest

from idlsim.constellation import (RealLinearModel, bits_to_symbols, make_qam,
                                  make_qpsk, random_symbols, slice_real,
                                  slice_to_levels, stack_matrix, stack_real,
                                  stack_vector, unstack_vector)


def test_qpsk_points_unit_power():
    con = make_qpsk()
    assert con.bits_per_symbol == 2
    expected = {(1 + 1j), (1 - 1j), (-1 + 1j), (-1 - 1j)}
    got = {complex(round(p.real * np.sqrt(2)), round(p.imag * np.sqrt(2)))
           for p in con.points_complex}
    assert got == expected
    assert np.isclose(np.mean(np.abs(con.points_complex) ** 2), 1.0)


@pytest.mark.parametrize("b", [2, 4, 6])
def test_qam_unit_average_power(b):
    con = make_qam(b)
    assert len(con.points_complex) == 2 ** b
    assert np.isclose(np.mean(np.abs(con.points_complex) ** 2), 1.0)
    assert np.all(np.diff(con.pam_levels) > 0)


@pytest.mark.parametrize("b", [1, 3, 0])
def test_qam_rejects_odd_bits(b):
    with pytest.raises(ValueError):
        make_qam(b)


@pytest.mark.parametrize("b", [2, 4])
def test_gray_mapping_adjacent_levels_differ_by_one_bit(b):
    con = make_qam(b)
    codes = con.gray_index
    for i in range(len(codes) - 1):
        assert bin(codes[i] ^ codes[i + 1]).count("1") == 1


@pytest.mark.parametrize("b", [2, 4])
def test_bits_symbol_roundtrip(b):
    con = make_qam(b)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=16 * b)
    syms = bits_to_symbols(bits, con)
    # slicing exact constellation points recovers the bits
    s_real = np.concatenate([syms.real, syms.imag])
    syms2, bits2 = slice_real(s_real, con)
    assert np.allclose(syms2, syms)
    assert np.array_equal(bits2, bits.astype(np.int8))


def test_slice_nearest_neighbor_oracle():
    con = make_qam(4)
    rng = np.random.default_rng(1)
    x = rng.uniform(-1.5, 1.5, size=500)
    idx = slice_to_levels(x, con)
    brute = np.argmin(np.abs(x[:, None] - con.pam_levels[None, :]), axis=1)
    assert np.array_equal(idx, brute)


def test_slice_midpoint_tie_goes_to_lower_level():
    con = make_qpsk()
    mid = 0.0  # midpoint of the two QPSK levels
    idx = slice_to_levels(np.array([mid]), con)
    assert idx[0] == 0


def test_stacking_is_ring_homomorphism():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    b = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.allclose(stack_matrix(a @ b), stack_matrix(a) @ stack_matrix(b))
    assert np.allclose(stack_vector(b @ x), stack_matrix(b) @ stack_vector(x))
    assert np.allclose(unstack_vector(stack_vector(x)), x)


def test_stack_real_shape_validation():
    rng = np.random.default_rng(3)
    h = rng.standard_normal((4, 3)) + 0j
    with pytest.raises(ValueError):
        stack_real(np.zeros(5, dtype=complex), h)
    with pytest.raises(ValueError):
        stack_real(np.zeros(4, dtype=complex), h, np.zeros(2, dtype=complex))


def test_stack_real_norm_preserved():
    rng = np.random.default_rng(4)
    y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    h = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    yr, hr = stack_real(y, h)
    assert np.isclose(np.linalg.norm(yr), np.linalg.norm(y))
    assert hr.shape == (12, 10)


def test_random_symbols_deterministic_and_uniform():
    con = make_qpsk()
    s1, b1 = random_symbols(64, con, np.random.default_rng(7))
    s2, b2 = random_symbols(64, con, np.random.default_rng(7))
    assert np.array_equal(b1, b2) and np.allclose(s1, s2)
    # all four points appear in a long draw
    s, _ = random_symbols(4000, con, np.random.default_rng(8))
    assert len(np.unique(np.round(s, 6))) == 4


def test_real_linear_model_dims():
    m = RealLinearModel(y=np.zeros(8), h=np.zeros((8, 6)), sigma2=0.1)
    assert m.nt2 == 6
