import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlvc.errors import ContractViolation
from nlvc.tiling import PATCH_SIDE, extract_patches, layout_for, pad_plane, reassemble

from conftest import make_plane


def brute_force_reassemble(patches, layout):
    """Independent oracle: paste samples cell by cell."""
    canvas = np.zeros((layout.padded_height, layout.padded_width), dtype=np.uint8)
    for p in patches:
        for r in range(PATCH_SIDE):
            for c in range(PATCH_SIDE):
                canvas[p.origin_row + r, p.origin_col + c] = p.samples[r, c]
    return canvas[:layout.plane_height, :layout.plane_width]


def test_cif_plane_needs_no_padding():
    plane = make_plane(352, 288, np.random.default_rng(0))
    padded, layout = pad_plane(plane)
    assert (padded.width, padded.height) == (352, 288)
    assert np.array_equal(padded.samples, plane.samples)
    assert (layout.patches_per_row, layout.patches_per_col) == (11, 9)
    assert layout.patch_count == 99


def test_cif_chroma_pads_to_192x160():
    # ceil(176/32)=6 and ceil(144/32)=5 patches per axis
    plane = make_plane(176, 144, np.random.default_rng(1))
    padded, layout = pad_plane(plane)
    assert (layout.padded_width, layout.padded_height) == (192, 160)
    assert layout.patch_count == 30
    # padding replicates the rightmost column and bottom row
    assert np.all(padded.samples[:144, 176:] == plane.samples[:, 175:176])
    assert np.all(padded.samples[144:, :176] == plane.samples[143:144, :])
    assert np.all(padded.samples[144:, 176:] == plane.samples[143, 175])


def test_1x1_plane_fully_replicates():
    plane = make_plane(1, 1, value=7)
    padded, layout = pad_plane(plane)
    assert (padded.width, padded.height) == (32, 32)
    assert np.all(padded.samples == 7)
    assert layout.patch_count == 1


def test_extract_64x32_origins():
    plane = make_plane(64, 32, np.random.default_rng(2))
    padded, layout = pad_plane(plane)
    patches = extract_patches(padded, layout)
    assert [(p.origin_row, p.origin_col) for p in patches] == [(0, 0), (0, 32)]


def test_extract_32x32_is_identity():
    plane = make_plane(32, 32, np.random.default_rng(3))
    padded, layout = pad_plane(plane)
    (patch,) = extract_patches(padded, layout)
    assert np.array_equal(patch.samples, plane.samples)


def test_extract_96x96_raster_order():
    plane = make_plane(96, 96, np.random.default_rng(4))
    padded, layout = pad_plane(plane)
    patches = extract_patches(padded, layout)
    origins = [(p.origin_row, p.origin_col) for p in patches]
    assert origins == [(r * 32, c * 32) for r in range(3) for c in range(3)]


def test_partition_covers_every_cell_once():
    plane = make_plane(70, 40, np.random.default_rng(5))
    padded, layout = pad_plane(plane)
    patches = extract_patches(padded, layout)
    counts = np.zeros((layout.padded_height, layout.padded_width), dtype=int)
    for p in patches:
        counts[p.origin_row:p.origin_row + 32, p.origin_col:p.origin_col + 32] += 1
    assert np.all(counts == 1)


def test_reassemble_matches_brute_force_oracle():
    plane = make_plane(50, 40, np.random.default_rng(6))
    padded, layout = pad_plane(plane)
    patches = extract_patches(padded, layout)
    expected = brute_force_reassemble(patches, layout)
    got = reassemble(patches, layout)
    assert np.array_equal(got.samples, expected)
    assert np.array_equal(got.samples, plane.samples)


def test_reassemble_rejects_duplicates_and_missing():
    plane = make_plane(64, 32, np.random.default_rng(7))
    padded, layout = pad_plane(plane)
    patches = extract_patches(padded, layout)
    with pytest.raises(ContractViolation):
        reassemble([patches[0], patches[0]], layout)
    with pytest.raises(ContractViolation):
        reassemble(patches[:1], layout)


def test_extract_dimension_mismatch():
    plane = make_plane(32, 32, np.random.default_rng(8))
    with pytest.raises(ContractViolation):
        extract_patches(plane, layout_for(64, 64))


def test_chroma_round_trip_through_padding():
    plane = make_plane(176, 144, np.random.default_rng(9))
    padded, layout = pad_plane(plane)
    out = reassemble(extract_patches(padded, layout), layout)
    assert np.array_equal(out.samples, plane.samples)


@settings(max_examples=60, deadline=None)
@given(w=st.integers(1, 100), h=st.integers(1, 100), seed=st.integers(0, 2**31))
def test_round_trip_identity_all_sizes(w, h, seed):
    plane = make_plane(w, h, np.random.default_rng(seed))
    padded, layout = pad_plane(plane)
    out = reassemble(extract_patches(padded, layout), layout)
    assert np.array_equal(out.samples, plane.samples)
