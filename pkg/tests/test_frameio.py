import io
import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from PIL import Image

import helpers
from personcut import (
    DimensionMismatchError,
    DirectorySink,
    FrameDirectoryError,
    FrameDirectorySource,
    ImageFormatError,
    MemorySource,
    RasterImage,
    RawFileSource,
    RawStreamSink,
    RawStreamSource,
    SingleImageSink,
    StillImageSource,
    StreamTruncationError,
    enumerate_frames,
    read_image,
    write_image,
)
from personcut.frameio import (
    INCOMPLETE_SENTINEL,
    iter_raw_frames,
    read_raw_frame,
    write_raw_frame,
)

small_images = st.builds(
    lambda arr: RasterImage.from_array(arr),
    st.integers(0, 2**32 - 1).map(
        lambda seed: helpers.random_image(
            np.random.default_rng(seed),
            1 + seed % 13,
            1 + (seed // 13) % 17,
        )
    ),
)


class TestStillImages:
    def test_ppm_hand_vector(self, tmp_path):
        # 2x2 P6: red, green / blue, white.
        payload = b"P6\n2 2\n255\n" + bytes(
            [255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255]
        )
        path = tmp_path / "v.ppm"
        path.write_bytes(payload)
        img = read_image(path)
        assert img.pixels.tolist() == [
            [[255, 0, 0], [0, 255, 0]],
            [[0, 0, 255], [255, 255, 255]],
        ]

    def test_ppm_header_comments_and_whitespace(self, tmp_path):
        payload = b"P6 # comment\n# another\n 1\t1 \n255\n\x07\x08\x09"
        path = tmp_path / "c.ppm"
        path.write_bytes(payload)
        assert read_image(path).pixels.tolist() == [[[7, 8, 9]]]

    @given(small_images)
    def test_png_round_trip(self, tmp_path_factory, img):
        path = tmp_path_factory.mktemp("png") / "x.png"
        write_image(img, path)
        assert read_image(path) == img

    @given(small_images)
    def test_ppm_round_trip(self, tmp_path_factory, img):
        path = tmp_path_factory.mktemp("ppm") / "x.ppm"
        write_image(img, path)
        assert read_image(path) == img

    def test_rgba_alpha_discarded_with_warning(self, tmp_path, caplog):
        rgba = np.zeros((2, 2, 4), dtype=np.uint8)
        rgba[..., :3] = 55
        rgba[..., 3] = 7
        path = tmp_path / "a.png"
        Image.fromarray(rgba, mode="RGBA").save(path)
        with caplog.at_level(logging.WARNING):
            img = read_image(path)
        assert (img.pixels == 55).all()
        assert any("alpha" in r.message for r in caplog.records)

    def test_16bit_png_rejected(self, tmp_path):
        path = tmp_path / "deep.png"
        Image.fromarray(np.zeros((2, 2), dtype=np.uint16)).save(path)
        with pytest.raises(ImageFormatError, match="mode"):
            read_image(path)

    def test_palette_png_rejected(self, tmp_path):
        path = tmp_path / "p.png"
        Image.fromarray(np.zeros((2, 2), dtype=np.uint8), mode="L").convert("P").save(path)
        with pytest.raises(ImageFormatError):
            read_image(path)

    def test_unrecognized_magic(self, tmp_path):
        path = tmp_path / "x.png"
        path.write_bytes(b"GIF89a.....")
        with pytest.raises(ImageFormatError, match="magic"):
            read_image(path)

    def test_ppm_wrong_maxval(self, tmp_path):
        path = tmp_path / "x.ppm"
        path.write_bytes(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")
        with pytest.raises(ImageFormatError, match="maxval"):
            read_image(path)

    def test_ppm_truncated_pixels(self, tmp_path):
        path = tmp_path / "x.ppm"
        path.write_bytes(b"P6\n2 2\n255\n\x00\x00")
        with pytest.raises(ImageFormatError, match="truncated"):
            read_image(path)

    def test_write_unknown_extension_lists_supported(self, tmp_path):
        img = RasterImage.from_array(np.zeros((1, 1, 3), np.uint8))
        with pytest.raises(ImageFormatError, match=r"\.png"):
            write_image(img, tmp_path / "x.jpg")

    def test_1x1_round_trip(self, tmp_path):
        img = RasterImage.from_array(np.full((1, 1, 3), 3, np.uint8))
        write_image(img, tmp_path / "one.png")
        assert read_image(tmp_path / "one.png") == img


def touch_frames(directory, indices, suffix=".png"):
    directory.mkdir(parents=True, exist_ok=True)
    img = RasterImage.from_array(np.zeros((2, 2, 3), np.uint8))
    for i in indices:
        write_image(img, directory / f"frame_{i:06d}{suffix}")


class TestEnumerateFrames:
    def test_lists_in_index_order(self, tmp_path):
        touch_frames(tmp_path / "d", [2, 0, 1])
        paths = enumerate_frames(tmp_path / "d")
        assert [p.name for p in paths] == [
            "frame_000000.png",
            "frame_000001.png",
            "frame_000002.png",
        ]

    def test_gap_names_first_missing_index(self, tmp_path):
        touch_frames(tmp_path / "d", [0, 1, 3])
        with pytest.raises(FrameDirectoryError, match="missing frame index 2"):
            enumerate_frames(tmp_path / "d")

    def test_empty_directory(self, tmp_path):
        (tmp_path / "d").mkdir()
        with pytest.raises(FrameDirectoryError, match="no frames found"):
            enumerate_frames(tmp_path / "d")

    def test_mixed_extensions_rejected(self, tmp_path):
        touch_frames(tmp_path / "d", [0])
        touch_frames(tmp_path / "d", [1], suffix=".ppm")
        with pytest.raises(FrameDirectoryError, match="mixed"):
            enumerate_frames(tmp_path / "d")

    def test_unrelated_files_ignored(self, tmp_path):
        touch_frames(tmp_path / "d", [0, 1])
        (tmp_path / "d" / "notes.txt").write_text("x")
        (tmp_path / "d" / "frame_abc.png").write_bytes(b"")
        assert len(enumerate_frames(tmp_path / "d")) == 2

    def test_must_start_at_zero(self, tmp_path):
        touch_frames(tmp_path / "d", [1, 2])
        with pytest.raises(FrameDirectoryError, match="missing frame index 0"):
            enumerate_frames(tmp_path / "d")


class TestRawStreams:
    def test_two_2x2_frames_are_24_bytes(self):
        rng = np.random.default_rng(0)
        buf = io.BytesIO()
        frames = [
            RasterImage.from_array(helpers.random_image(rng, 2, 2)) for _ in range(2)
        ]
        for f in frames:
            write_raw_frame(buf, f)
        assert len(buf.getvalue()) == 24

    def test_loopback_round_trip(self):
        rng = np.random.default_rng(1)
        frames = [
            RasterImage.from_array(helpers.random_image(rng, 3, 5)) for _ in range(7)
        ]
        buf = io.BytesIO()
        for f in frames:
            write_raw_frame(buf, f)
        buf.seek(0)
        assert list(iter_raw_frames(buf, 5, 3)) == frames

    def test_truncation_reports_frames_completed(self):
        buf = io.BytesIO(b"\x00" * 23)
        with pytest.raises(StreamTruncationError) as err:
            list(iter_raw_frames(buf, 2, 2))
        assert err.value.frames_completed == 1
        assert "1" in str(err.value)

    def test_clean_eof_returns_none(self):
        assert read_raw_frame(io.BytesIO(b""), 2, 2) is None

    def test_row_major_byte_order(self):
        arr = np.arange(12, dtype=np.uint8).reshape((2, 2, 3))
        buf = io.BytesIO()
        write_raw_frame(buf, RasterImage.from_array(arr))
        assert buf.getvalue() == bytes(range(12))


class TestFrameSources:
    def test_still_image_is_one_frame(self, tmp_path):
        img = RasterImage.from_array(np.full((3, 4, 3), 9, np.uint8))
        write_image(img, tmp_path / "s.png")
        source = StillImageSource(tmp_path / "s.png")
        assert (source.width, source.height, source.frame_count) == (4, 3, 1)
        assert source.get_frame(0) == img
        with pytest.raises(IndexError):
            source.get_frame(1)

    def test_directory_source_reads_in_order(self, tmp_path):
        rng = np.random.default_rng(2)
        frames = [
            RasterImage.from_array(helpers.random_image(rng, 4, 6)) for _ in range(3)
        ]
        d = tmp_path / "d"
        d.mkdir()
        for i, f in enumerate(frames):
            write_image(f, d / f"frame_{i:06d}.png")
        source = FrameDirectorySource(d)
        assert source.frame_count == 3
        assert [source.get_frame(i) for i in range(3)] == frames

    def test_directory_source_rejects_dimension_drift(self, tmp_path):
        d = tmp_path / "d"
        touch_frames(d, [0])
        write_image(
            RasterImage.from_array(np.zeros((3, 3, 3), np.uint8)), d / "frame_000001.png"
        )
        source = FrameDirectorySource(d)
        with pytest.raises(DimensionMismatchError, match="3x3"):
            source.get_frame(1)

    def test_memory_source_uniform_dims(self):
        a = RasterImage.from_array(np.zeros((2, 2, 3), np.uint8))
        b = RasterImage.from_array(np.zeros((3, 2, 3), np.uint8))
        with pytest.raises(DimensionMismatchError):
            MemorySource([a, b])
        empty = MemorySource([], width=5, height=4)
        assert (empty.width, empty.height, empty.frame_count) == (5, 4, 0)
        with pytest.raises(ValueError):
            MemorySource([])

    def test_raw_file_source_random_access(self, tmp_path):
        rng = np.random.default_rng(3)
        frames = [
            RasterImage.from_array(helpers.random_image(rng, 2, 3)) for _ in range(4)
        ]
        path = tmp_path / "v.rgb24"
        with open(path, "wb") as fh:
            for f in frames:
                write_raw_frame(fh, f)
        source = RawFileSource(path, 3, 2)
        assert source.frame_count == 4
        assert source.get_frame(3) == frames[3]
        assert source.get_frame(0) == frames[0]

    def test_raw_file_source_rejects_partial_frame(self, tmp_path):
        path = tmp_path / "v.rgb24"
        path.write_bytes(b"\x00" * 23)
        with pytest.raises(StreamTruncationError) as err:
            RawFileSource(path, 2, 2)
        assert err.value.frames_completed == 1

    def test_raw_stream_source_enforces_order(self):
        rng = np.random.default_rng(4)
        frames = [
            RasterImage.from_array(helpers.random_image(rng, 2, 2)) for _ in range(3)
        ]
        buf = io.BytesIO()
        for f in frames:
            write_raw_frame(buf, f)
        buf.seek(0)
        source = RawStreamSource(buf, 2, 2, 3)
        assert not source.random_access
        assert source.get_frame(0) == frames[0]
        with pytest.raises(RuntimeError, match="order"):
            source.get_frame(2)
        assert source.get_frame(1) == frames[1]


class TestFrameSinks:
    def test_directory_sink_writes_convention_names(self, tmp_path):
        sink = DirectorySink(tmp_path / "out")
        img = RasterImage.from_array(np.zeros((2, 2, 3), np.uint8))
        sink.write_frame(0, img)
        sink.write_frame(1, img)
        sink.close()
        assert sorted(p.name for p in (tmp_path / "out").iterdir()) == [
            "frame_000000.png",
            "frame_000001.png",
        ]

    def test_directory_sink_clears_stale_sentinel(self, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        (out / INCOMPLETE_SENTINEL).write_text("old failure")
        DirectorySink(out)
        assert not (out / INCOMPLETE_SENTINEL).exists()

    def test_mark_incomplete_writes_sentinel(self, tmp_path):
        sink = DirectorySink(tmp_path / "out")
        sink.mark_incomplete("boom at frame 2")
        sentinel = tmp_path / "out" / INCOMPLETE_SENTINEL
        assert "boom at frame 2" in sentinel.read_text()

    def test_single_image_sink_allows_exactly_one(self, tmp_path):
        sink = SingleImageSink(tmp_path / "o.png")
        img = RasterImage.from_array(np.zeros((2, 2, 3), np.uint8))
        sink.write_frame(0, img)
        with pytest.raises(ValueError):
            sink.write_frame(1, img)

    def test_raw_stream_sink_round_trip(self):
        rng = np.random.default_rng(5)
        frames = [
            RasterImage.from_array(helpers.random_image(rng, 3, 3)) for _ in range(3)
        ]
        buf = io.BytesIO()
        sink = RawStreamSink(buf)
        for i, f in enumerate(frames):
            sink.write_frame(i, f)
        sink.close()
        buf.seek(0)
        assert list(iter_raw_frames(buf, 3, 3)) == frames

    def test_raw_stream_sink_rejects_out_of_order(self):
        sink = RawStreamSink(io.BytesIO())
        img = RasterImage.from_array(np.zeros((2, 2, 3), np.uint8))
        with pytest.raises(ValueError, match="order"):
            sink.write_frame(1, img)
