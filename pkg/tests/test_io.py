import json
import struct

import numpy as np
import pytest

from bandsel.cube import GroundTruth, HyperCube
from bandsel.errors import (
    CorruptFileError,
    InvalidArgumentError,
    InvalidDataError,
    UnsupportedFormatError,
)
from bandsel.io import (
    inspect_cube,
    load_cube,
    load_ground_truth,
    save_cube,
    save_ground_truth_csv,
)


def small_cube(seed=0, bands=3, width=2, height=2):
    rng = np.random.default_rng(seed)
    return HyperCube(
        width=width,
        height=height,
        data=rng.normal(size=(bands, width * height)).astype(np.float32),
        wavelengths=np.linspace(400, 700, bands),
    )


class TestContainer:
    def test_round_trip_bit_exact(self, tmp_path):
        cube = small_cube()
        path = save_cube(cube, tmp_path / "cube.json")
        back = load_cube(path)
        assert back.width == cube.width and back.height == cube.height
        assert np.array_equal(back.samples, cube.samples)
        assert back.samples.dtype == np.float32
        assert np.allclose(back.wavelengths, cube.wavelengths)

    def test_save_load_save_identical_payload(self, tmp_path):
        cube = small_cube(seed=1)
        first = save_cube(cube, tmp_path / "a.json")
        again = save_cube(load_cube(first), tmp_path / "b.json")
        assert (tmp_path / "a.f32").read_bytes() == (tmp_path / "b.f32").read_bytes()

    def test_short_payload_is_corrupt(self, tmp_path):
        path = save_cube(small_cube(), tmp_path / "cube.json")
        header = json.loads(path.read_text())
        header["bands"] = 10  # declares 10 bands over a 3-band payload
        path.write_text(json.dumps(header))
        with pytest.raises(CorruptFileError):
            load_cube(path)

    def test_nan_payload_rejected_by_load(self, tmp_path):
        path = save_cube(small_cube(), tmp_path / "cube.json")
        payload = bytearray((tmp_path / "cube.f32").read_bytes())
        payload[0:4] = struct.pack("<f", float("nan"))
        (tmp_path / "cube.f32").write_bytes(bytes(payload))
        with pytest.raises(InvalidDataError):
            load_cube(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CorruptFileError):
            load_cube(tmp_path / "nope.json")

    def test_unsupported_layout(self, tmp_path):
        path = save_cube(small_cube(), tmp_path / "cube.json")
        header = json.loads(path.read_text())
        header["layout"] = "bip"
        path.write_text(json.dumps(header))
        with pytest.raises(UnsupportedFormatError):
            load_cube(path)


def write_envi(tmp_path, name, payload: bytes, **fields):
    lines = ["ENVI"]
    for key, value in fields.items():
        lines.append(f"{key.replace('_', ' ')} = {value}")
    hdr = tmp_path / f"{name}.hdr"
    hdr.write_text("\n".join(lines) + "\n")
    (tmp_path / f"{name}.dat").write_bytes(payload)
    return hdr


class TestEnvi:
    def test_bil_reordering_hand_laid_bytes(self, tmp_path):
        # 2x2x2 float32 BIL: line0[band0: p00 p01][band1: p00 p01], then line1.
        # Values encode (band, pixel) as band*10 + pixel for spot checks.
        values_bil = [
            0.0, 1.0,    # line 0, band 0: pixels 0,1
            10.0, 11.0,  # line 0, band 1: pixels 0,1
            2.0, 3.0,    # line 1, band 0: pixels 2,3
            12.0, 13.0,  # line 1, band 1: pixels 2,3
        ]
        payload = struct.pack("<8f", *values_bil)
        hdr = write_envi(
            tmp_path, "bil2", payload,
            samples=2, lines=2, bands=2, data_type=4, interleave="bil", byte_order=0,
        )
        cube = load_cube(hdr, fmt="envi")
        assert cube.width == 2 and cube.height == 2 and cube.bands == 2
        # Band-sequential, row-major pixels.
        assert cube.data[0].tolist() == [0.0, 1.0, 2.0, 3.0]
        assert cube.data[1].tolist() == [10.0, 11.0, 12.0, 13.0]

    def test_bsq_and_bip_agree_with_bil(self, tmp_path):
        rng = np.random.default_rng(3)
        arr = rng.normal(size=(2, 3, 4)).astype(np.float32)  # bands, lines, samples
        cubes = {}
        payloads = {
            "bsq": arr.tobytes(),
            "bil": arr.transpose(1, 0, 2).tobytes(),
            "bip": arr.transpose(1, 2, 0).tobytes(),
        }
        for ileave, payload in payloads.items():
            hdr = write_envi(
                tmp_path, f"c_{ileave}", payload,
                samples=4, lines=3, bands=2, data_type=4, interleave=ileave, byte_order=0,
            )
            cubes[ileave] = load_cube(hdr, fmt="envi")
        assert np.array_equal(cubes["bsq"].samples, cubes["bil"].samples)
        assert np.array_equal(cubes["bsq"].samples, cubes["bip"].samples)

    def test_uint16_converted_without_scaling(self, tmp_path):
        payload = struct.pack("<4H", 0, 7, 65535, 42)
        hdr = write_envi(
            tmp_path, "u16", payload,
            samples=2, lines=2, bands=1, data_type=12, interleave="bsq", byte_order=0,
        )
        cube = load_cube(hdr, fmt="envi")
        assert cube.data[0].tolist() == [0.0, 7.0, 65535.0, 42.0]

    def test_big_endian(self, tmp_path):
        payload = struct.pack(">2f", 1.5, -2.0)
        hdr = write_envi(
            tmp_path, "be", payload,
            samples=2, lines=1, bands=1, data_type=4, interleave="bsq", byte_order=1,
        )
        cube = load_cube(hdr, fmt="envi")
        assert cube.data[0].tolist() == [1.5, -2.0]

    def test_header_offset(self, tmp_path):
        payload = b"JUNK" + struct.pack("<2f", 3.0, 4.0)
        hdr = write_envi(
            tmp_path, "off", payload,
            samples=2, lines=1, bands=1, data_type=4, interleave="bsq",
            byte_order=0, header_offset=4,
        )
        assert load_cube(hdr, fmt="envi").data[0].tolist() == [3.0, 4.0]

    def test_unsupported_data_type(self, tmp_path):
        hdr = write_envi(
            tmp_path, "bad", b"\0" * 16,
            samples=2, lines=1, bands=1, data_type=5, interleave="bsq",
        )
        with pytest.raises(UnsupportedFormatError):
            load_cube(hdr, fmt="envi")

    def test_unsupported_interleave(self, tmp_path):
        hdr = write_envi(
            tmp_path, "bad2", b"\0" * 16,
            samples=2, lines=1, bands=1, data_type=4, interleave="weird",
        )
        with pytest.raises(UnsupportedFormatError):
            load_cube(hdr, fmt="envi")

    def test_short_payload(self, tmp_path):
        hdr = write_envi(
            tmp_path, "short", b"\0" * 8,
            samples=2, lines=2, bands=2, data_type=4, interleave="bsq",
        )
        with pytest.raises(CorruptFileError):
            load_cube(hdr, fmt="envi")

    def test_wavelength_list_parsed(self, tmp_path):
        payload = struct.pack("<2f", 1.0, 2.0)
        hdr = tmp_path / "wl.hdr"
        hdr.write_text(
            "ENVI\nsamples = 1\nlines = 1\nbands = 2\ndata type = 4\n"
            "interleave = bsq\nbyte order = 0\nwavelength = {400.0,\n 500.0}\n"
        )
        (tmp_path / "wl.dat").write_bytes(payload)
        cube = load_cube(hdr, fmt="envi")
        assert cube.wavelengths.tolist() == [400.0, 500.0]


class TestInspect:
    def test_known_means(self, tmp_path):
        data = np.array([[1, 2, 3, 4], [5, 5, 5, 5], [0, 0, 0, 8]], np.float32)
        path = save_cube(HyperCube(width=2, height=2, data=data), tmp_path / "c.json")
        summary = inspect_cube(path)
        assert summary["band_mean"] == [2.5, 5.0, 2.0]
        assert summary["nan_count"] == 0

    def test_nan_flagged_not_fatal(self, tmp_path):
        path = save_cube(small_cube(), tmp_path / "c.json")
        payload = bytearray((tmp_path / "c.f32").read_bytes())
        payload[0:4] = struct.pack("<f", float("nan"))
        (tmp_path / "c.f32").write_bytes(bytes(payload))
        summary = inspect_cube(path)
        assert summary["nan_count"] == 1

    def test_envi_and_container_agree(self, tmp_path):
        # Dual-format fixture: identical data through both readers.
        rng = np.random.default_rng(8)
        arr = rng.normal(size=(3, 2, 5)).astype(np.float32)
        hdr = write_envi(
            tmp_path, "dual", arr.tobytes(),
            samples=5, lines=2, bands=3, data_type=4, interleave="bsq", byte_order=0,
        )
        container = save_cube(load_cube(hdr, fmt="envi"), tmp_path / "dual.json")
        a = inspect_cube(hdr, fmt="envi")
        b = inspect_cube(container)
        for key in ("width", "height", "bands", "band_min", "band_max", "band_mean"):
            assert a[key] == b[key]


class TestGroundTruthIO:
    def test_csv_round_trip(self, tmp_path):
        gt = GroundTruth(width=3, height=2, labels=np.array([0, 1, 2, 0, 1, 3]))
        path = save_ground_truth_csv(gt, tmp_path / "gt.csv")
        back = load_ground_truth(path, width=3, height=2)
        assert np.array_equal(back.labels, gt.labels)

    def test_csv_header_required(self, tmp_path):
        path = tmp_path / "gt.csv"
        path.write_text("a,b\n0,1\n")
        with pytest.raises(CorruptFileError):
            load_ground_truth(path, 2, 2)

    def test_label_image_container(self, tmp_path):
        labels = np.array([0.0, 1.0, 2.0, 1.0], np.float32)
        img = HyperCube(width=2, height=2, data=labels[None, :])
        path = save_cube(img, tmp_path / "labels.json")
        gt = load_ground_truth(path, width=2, height=2)
        assert gt.labels.tolist() == [0, 1, 2, 1]

    def test_label_image_must_be_single_band(self, tmp_path):
        img = small_cube()
        path = save_cube(img, tmp_path / "multi.json")
        with pytest.raises(InvalidArgumentError):
            load_ground_truth(path, 2, 2)

    def test_out_of_range_pixel_index(self, tmp_path):
        path = tmp_path / "gt.csv"
        path.write_text("pixel_index,label\n99,1\n")
        with pytest.raises(CorruptFileError):
            load_ground_truth(path, 2, 2)
