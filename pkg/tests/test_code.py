import itertools

import numpy as np
import pytest

from polarbp.code import (
    PolarCode,
    bhattacharyya,
    check_codeword,
    construct_frozen_set,
    embed,
    encode,
    generator_matrix,
    mask_to_str,
    parity_check_matrix,
    parse_mask,
    polar_transform,
    recover_message,
    syndrome_ok,
)


def code_from(frozen_1based, n):
    mask = np.zeros(n, dtype=bool)
    mask[[i - 1 for i in frozen_1based]] = True
    return PolarCode(mask)


class TestConstruction:
    def test_bhattacharyya_n2(self):
        np.testing.assert_allclose(bhattacharyya(2, 0.3), [0.51, 0.09])

    def test_bhattacharyya_n4(self):
        np.testing.assert_allclose(bhattacharyya(4, 0.3), [0.7599, 0.2601, 0.1719, 0.0081])

    def test_n2_k1(self):
        code = construct_frozen_set(2, 1, 0.3)
        assert code.frozen_positions.tolist() == [0]

    def test_n4_k2(self):
        code = construct_frozen_set(4, 2, 0.3)
        assert code.frozen_positions.tolist() == [0, 1]

    def test_fields(self):
        code = construct_frozen_set(1024, 512)
        assert (code.n, code.m, code.k) == (1024, 10, 512)
        assert code.frozen_mask.sum() == 512
        assert code.design_erasure == 0.3

    def test_ties_freeze_lower_index(self, monkeypatch):
        import polarbp.code as pc

        monkeypatch.setattr(pc, "bhattacharyya", lambda n, e: np.array([0.1, 0.5, 0.5, 0.5, 0.9, 0.1, 0.5, 0.2]))
        code = construct_frozen_set(8, 5)
        assert code.frozen_positions.tolist() == [1, 2, 4]

    @pytest.mark.parametrize("n", [128, 1024])
    def test_monotone_freezing(self, n):
        for k in range(1, n, max(1, n // 32)):
            small = construct_frozen_set(n, k).frozen_mask
            big = construct_frozen_set(n, k + 1).frozen_mask
            assert not (big & ~small).any()

    @pytest.mark.parametrize(
        "n,k,e",
        [(3, 1, 0.3), (0, 0, 0.3), (1, 0, 0.3), (8, 0, 0.3), (8, 8, 0.3), (8, 4, 0.0), (8, 4, 1.0)],
    )
    def test_rejects_bad_parameters(self, n, k, e):
        with pytest.raises(ValueError):
            construct_frozen_set(n, k, e)

    def test_polarcode_rejects_degenerate_masks(self):
        with pytest.raises(ValueError):
            PolarCode(np.ones(8, dtype=bool))
        with pytest.raises(ValueError):
            PolarCode(np.zeros(8, dtype=bool))
        with pytest.raises(ValueError):
            PolarCode(np.array([True, False, False]))

    def test_mask_text_round_trip(self):
        code = construct_frozen_set(64, 32)
        text = mask_to_str(code)
        assert len(text) == 64 and set(text) <= {"0", "1"}
        assert parse_mask(text + "\n") == code
        with pytest.raises(ValueError):
            parse_mask("01x1")


class TestEncode:
    def test_all_zero(self):
        code = construct_frozen_set(16, 8)
        assert not encode(code, np.zeros(16)).any()

    def test_n2(self):
        code = code_from([1], 2)
        assert encode(code, [0, 1]).tolist() == [1, 1]

    def test_n4_last_row(self):
        code = code_from([1, 2], 4)
        assert encode(code, [0, 0, 0, 1]).tolist() == [1, 1, 1, 1]

    @pytest.mark.parametrize("n", [2, 4, 8, 32])
    def test_matches_dense_generator(self, n):
        rng = np.random.default_rng(n)
        G = generator_matrix(n).astype(np.int64)
        u = rng.integers(0, 2, (20, n))
        np.testing.assert_array_equal(polar_transform(u), (u @ G) % 2)

    def test_generator_is_kronecker_power(self):
        F = np.array([[1, 0], [1, 1]])
        np.testing.assert_array_equal(generator_matrix(8), np.kron(F, np.kron(F, F)))

    @pytest.mark.parametrize("n", [2, 8, 64, 1024])
    def test_involution(self, n):
        rng = np.random.default_rng(0)
        u = rng.integers(0, 2, (10, n))
        np.testing.assert_array_equal(polar_transform(polar_transform(u)), u)

    def test_rejects_frozen_ones_and_bad_length(self):
        code = code_from([1, 2], 4)
        with pytest.raises(ValueError):
            encode(code, [1, 0, 0, 1])
        with pytest.raises(ValueError):
            encode(code, [0, 0, 1])
        with pytest.raises(ValueError):
            encode(code, [0, 0, 2, 1])


class TestRecover:
    def test_n2(self):
        assert recover_message(code_from([1], 2), [1, 1]).tolist() == [1]

    def test_n4(self):
        assert recover_message(code_from([1, 2], 4), [1, 1, 1, 1]).tolist() == [0, 1]

    def test_round_trip_random(self):
        code = construct_frozen_set(256, 100)
        rng = np.random.default_rng(3)
        info = rng.integers(0, 2, (50, code.k))
        x = encode(code, embed(code, info))
        np.testing.assert_array_equal(recover_message(code, x), info)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            recover_message(code_from([1, 2], 4), [1, 1])


class TestParityCheck:
    def test_shape(self):
        code = construct_frozen_set(32, 12)
        assert parity_check_matrix(code).shape == (32, 20)

    def test_null_space(self):
        code = construct_frozen_set(64, 40)
        H = parity_check_matrix(code)
        rng = np.random.default_rng(11)
        for _ in range(100):
            x = encode(code, embed(code, rng.integers(0, 2, code.k)))
            assert check_codeword(x, H)

    def test_n4_examples(self):
        code = code_from([1, 2], 4)
        H = parity_check_matrix(code)
        assert check_codeword([1, 1, 1, 1], H)
        assert not check_codeword([1, 0, 0, 0], H)

    def test_all_zero_is_codeword(self):
        code = construct_frozen_set(16, 7)
        assert check_codeword(np.zeros(16, dtype=int), parity_check_matrix(code))

    def test_length_mismatch(self):
        H = parity_check_matrix(code_from([1, 2], 4))
        with pytest.raises(ValueError):
            check_codeword([1, 1], H)

    @pytest.mark.parametrize("k", [1, 2, 4, 6, 7])
    def test_exhaustive_soundness_n8(self, k):
        code = construct_frozen_set(8, k)
        H = parity_check_matrix(code)
        image = {tuple(encode(code, embed(code, np.array(b)))) for b in itertools.product((0, 1), repeat=k)}
        assert len(image) == 2**k
        words = np.array(list(itertools.product((0, 1), repeat=8)), dtype=np.uint8)
        fast = syndrome_ok(code, words)
        for w, ok in zip(words, fast):
            expected = tuple(w) in image
            assert check_codeword(w, H) == expected
            assert ok == expected

    def test_single_flip_detected_n8(self):
        code = construct_frozen_set(8, 4)
        H = parity_check_matrix(code)
        for b in itertools.product((0, 1), repeat=4):
            x = encode(code, embed(code, np.array(b)))
            for i in range(8):
                y = x.copy()
                y[i] ^= 1
                assert not check_codeword(y, H)
