import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokensieve.errors import FormatError, ShapeError, SizeError, ValidationError
from tokensieve.tensor_io import (
    ImageFrame,
    TokenTensor,
    dumps_report,
    load_frame,
    load_token_tensor,
    save_report,
    save_token_tensor,
)


def _np_save_bytes(arr):
    buf = io.BytesIO()
    np.save(buf, arr)
    return buf.getvalue()


def _pgm(width, height, maxval, values, comment=None):
    header = b"P5\n"
    if comment:
        header += b"# " + comment + b"\n"
    header += f"{width} {height}\n{maxval}\n".encode()
    if maxval > 255:
        payload = np.asarray(values, dtype=">u2").tobytes()
    else:
        payload = bytes(values)
    return header + payload


# --- NPY token tensors


def test_load_float32_header(tmp_path):
    arr = np.arange(64, dtype=np.float32).reshape(2, 4, 8)
    path = tmp_path / "t.npy"
    path.write_bytes(_np_save_bytes(arr))
    tensor = load_token_tensor(path)
    assert (tensor.frames, tensor.tokens_per_frame, tensor.dim) == (2, 4, 8)
    assert tensor.data.dtype == np.float64
    np.testing.assert_array_equal(tensor.data, arr.astype(np.float64))


def test_fortran_order_rejected(tmp_path):
    arr = np.asfortranarray(np.zeros((2, 3, 4), dtype=np.float64))
    path = tmp_path / "f.npy"
    path.write_bytes(_np_save_bytes(arr))
    with pytest.raises(FormatError, match="fortran_order"):
        load_token_tensor(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "junk.npy"
    path.write_bytes(bytes(range(10)))
    with pytest.raises(FormatError, match="magic at byte 0"):
        load_token_tensor(path)


def test_v2_header_rejected(tmp_path):
    data = _np_save_bytes(np.zeros((2, 2, 2)))
    v2 = data[:6] + bytes((2, 0)) + data[8:]
    path = tmp_path / "v2.npy"
    path.write_bytes(v2)
    with pytest.raises(FormatError, match="version 2.0"):
        load_token_tensor(path)


def test_non_3d_rejected(tmp_path):
    path = tmp_path / "m.npy"
    path.write_bytes(_np_save_bytes(np.zeros((4, 4))))
    with pytest.raises(ShapeError):
        load_token_tensor(path)


def test_nan_rejected(tmp_path):
    arr = np.zeros((1, 2, 2))
    arr[0, 0, 0] = np.nan
    path = tmp_path / "nan.npy"
    path.write_bytes(_np_save_bytes(arr))
    with pytest.raises(ValidationError, match="NaN"):
        load_token_tensor(path)


def test_truncated_payload(tmp_path):
    data = _np_save_bytes(np.zeros((2, 2, 2)))
    path = tmp_path / "short.npy"
    path.write_bytes(data[:-8])
    with pytest.raises(FormatError, match="payload"):
        load_token_tensor(path)


def test_int_dtype_rejected(tmp_path):
    path = tmp_path / "i.npy"
    path.write_bytes(_np_save_bytes(np.zeros((2, 2, 2), dtype=np.int64)))
    with pytest.raises(FormatError, match="descr"):
        load_token_tensor(path)


@settings(max_examples=25, deadline=None)
@given(
    shape=st.tuples(st.integers(1, 3), st.integers(1, 5), st.integers(1, 6)),
    seed=st.integers(0, 2**32 - 1),
)
def test_round_trip_bit_exact(shape, seed):
    import tempfile
    from pathlib import Path

    rng = np.random.default_rng(seed)
    data = rng.standard_normal(shape)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "t.npy"
        save_token_tensor(path, TokenTensor(data=data))
        loaded = load_token_tensor(path)
    assert loaded.data.tobytes() == data.tobytes()


def test_written_file_loads_with_numpy(tmp_path):
    data = np.linspace(0, 1, 24).reshape(2, 3, 4)
    path = tmp_path / "t.npy"
    save_token_tensor(path, TokenTensor(data=data))
    np.testing.assert_array_equal(np.load(path), data)


# --- frames


def test_pgm_maxval_scaling(tmp_path):
    values = [0, 255, 128, 255, 0, 128, 64, 32, 16]
    path = tmp_path / "f.pgm"
    path.write_bytes(_pgm(3, 3, 255, values))
    frame = load_frame(path)
    assert frame.pixels[0, 0] == 0.0
    assert frame.pixels[0, 1] == 1.0
    assert frame.pixels[0, 2] == pytest.approx(128 / 255)


def test_pgm_16bit(tmp_path):
    values = [0, 65535, 1, 2, 3, 4, 5, 6, 7]
    path = tmp_path / "f16.pgm"
    path.write_bytes(_pgm(3, 3, 65535, values))
    frame = load_frame(path)
    assert frame.pixels[0, 1] == 1.0
    assert frame.pixels[0, 0] == 0.0


def test_pgm_comment_skipped(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(_pgm(3, 3, 255, [10] * 9, comment=b"made by hand"))
    frame = load_frame(path)
    assert frame.pixels.shape == (3, 3)


def test_ascii_pgm_rejected(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P2\n3 3\n255\n" + b"0 " * 9)
    with pytest.raises(FormatError, match="P2"):
        load_frame(path)


def test_small_frame_rejected(tmp_path):
    # the engine needs 3x3 for its filters, so 2x2 is refused outright
    path = tmp_path / "tiny.pgm"
    path.write_bytes(_pgm(2, 2, 255, [0, 255, 255, 0]))
    with pytest.raises(SizeError):
        load_frame(path)


def test_npy_frame_passthrough(tmp_path):
    path = tmp_path / "f.npy"
    path.write_bytes(_np_save_bytes(np.full((3, 3), 0.5)))
    frame = load_frame(path)
    assert np.all(frame.pixels == 0.5)


def test_npy_frame_clamped(tmp_path):
    path = tmp_path / "f.npy"
    path.write_bytes(_np_save_bytes(np.array([[2.0, -1.0, 0.5]] * 3)))
    frame = load_frame(path)
    assert frame.pixels.min() == 0.0 and frame.pixels.max() == 1.0


def test_npy_frame_rank_enforced(tmp_path):
    path = tmp_path / "f.npy"
    path.write_bytes(_np_save_bytes(np.zeros((3, 3, 3))))
    with pytest.raises(ShapeError):
        load_frame(path)


# --- reports


def test_save_report_deterministic(tmp_path):
    report = {"b": [1.0, 2.5], "a": {"x": 0.1, "y": True}, "c": None}
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    save_report(p1, report)
    save_report(p2, report)
    assert p1.read_bytes() == p2.read_bytes()


def test_empty_list_serialized_as_array():
    assert dumps_report({"kept": []}) == '{"kept": []}\n'


def test_seventeen_digit_reals():
    text = dumps_report({"score": 0.1})
    assert text == '{"score": 0.10000000000000001}\n'


def test_integral_real_keeps_decimal_point():
    assert dumps_report({"x": 1.0}) == '{"x": 1.0}\n'
    assert dumps_report({"x": 1}) == '{"x": 1}\n'


def test_keys_sorted():
    text = dumps_report({"zeta": 1, "alpha": 2, "mid": 3})
    assert text.index('"alpha"') < text.index('"mid"') < text.index('"zeta"')


def test_report_floats_round_trip():
    import json

    rng = np.random.default_rng(5)
    values = rng.standard_normal(200).tolist() + [0.1, 1e-8, 1e300, -0.0]
    parsed = json.loads(dumps_report({"v": values}))
    assert parsed["v"] == values


def test_non_finite_rejected():
    with pytest.raises(ValidationError):
        dumps_report({"x": float("nan")})


def test_non_string_keys_rejected():
    with pytest.raises(ValidationError):
        dumps_report({1: "x"})


@pytest.mark.parametrize("rank", [0, 1, 2, 4])
def test_every_non_3d_rank_rejected_for_tokens(tmp_path, rank):
    shape = tuple([2] * rank)
    path = tmp_path / "r.npy"
    path.write_bytes(_np_save_bytes(np.zeros(shape)))
    with pytest.raises(ShapeError):
        load_token_tensor(path)


@pytest.mark.parametrize("rank", [0, 1, 3, 4])
def test_every_non_2d_rank_rejected_for_frames(tmp_path, rank):
    shape = tuple([3] * rank)
    path = tmp_path / "r.npy"
    path.write_bytes(_np_save_bytes(np.zeros(shape)))
    with pytest.raises(ShapeError):
        load_frame(path)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_npy_fuzz_fails_with_typed_errors(data):
    # a hand-rolled parser must reject corrupt bytes with FormatError and
    # friends, never stray IndexError/ValueError/SystemError
    import tempfile
    from pathlib import Path

    from tokensieve.errors import TokenSieveError

    base = bytearray(_np_save_bytes(np.ones((2, 2, 2))))
    mode = data.draw(st.sampled_from(["truncate", "mutate", "garbage"]))
    if mode == "truncate":
        cut = data.draw(st.integers(0, len(base)))
        blob = bytes(base[:cut])
    elif mode == "mutate":
        for _ in range(data.draw(st.integers(1, 8))):
            pos = data.draw(st.integers(0, len(base) - 1))
            base[pos] = data.draw(st.integers(0, 255))
        blob = bytes(base)
    else:
        blob = data.draw(st.binary(max_size=200))
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "fuzz.npy"
        path.write_bytes(blob)
        try:
            load_token_tensor(path)
        except TokenSieveError:
            pass


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_pgm_fuzz_fails_with_typed_errors(data):
    import tempfile
    from pathlib import Path

    from tokensieve.errors import TokenSieveError

    base = bytearray(_pgm(3, 3, 255, list(range(9))))
    mode = data.draw(st.sampled_from(["truncate", "mutate", "garbage"]))
    if mode == "truncate":
        blob = bytes(base[: data.draw(st.integers(0, len(base)))])
    elif mode == "mutate":
        for _ in range(data.draw(st.integers(1, 6))):
            pos = data.draw(st.integers(0, len(base) - 1))
            base[pos] = data.draw(st.integers(0, 255))
        blob = bytes(base)
    else:
        blob = data.draw(st.binary(max_size=120))
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "fuzz.pgm"
        path.write_bytes(blob)
        try:
            load_frame(path)
        except TokenSieveError:
            pass


def test_frame_properties():
    frame = ImageFrame(pixels=np.zeros((4, 7)))
    assert (frame.height, frame.width) == (4, 7)
