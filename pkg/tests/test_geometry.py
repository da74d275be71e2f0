import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pixelplate.errors import ConfigError, EncodingError
from pixelplate.geometry import (
    GENOME_BITS,
    GeometryConfig,
    PlateGenome,
    PlateMatrix,
    Tile,
    assemble_plate,
    design_space_size,
    genome_from_bits,
    genome_from_hex,
    genome_to_bits,
    genome_to_hex,
    guided_wavelength,
    plate_to_csv,
    plate_to_pbm,
    random_genome,
    tile_space_size,
    validate_constraints,
)


def genome_of(value: int) -> PlateGenome:
    tile = Tile(np.full((7, 7), value, dtype=np.uint8))
    return PlateGenome(tile, tile, tile)


class TestAssemblePlate:
    def test_all_ones_fills_every_cell(self):
        assert assemble_plate(genome_of(1)).ones() == 1849

    def test_all_zeros_leaves_only_the_cross(self):
        plate = assemble_plate(genome_of(0))
        assert plate.ones() == 85  # 43 + 43 - 1
        assert plate.cells[21, :].all() and plate.cells[:, 21].all()

    def test_random_genomes_satisfy_plate_invariants(self):
        for seed in range(1000):
            cells = assemble_plate(random_genome(seed)).cells
            assert cells[21, :].all() and cells[:, 21].all()
            assert np.array_equal(cells, cells[::-1, :])
            assert np.array_equal(cells, cells[:, ::-1])

    def test_pure_function_equal_genomes_equal_plates(self):
        g1, g2 = random_genome(42), random_genome(42)
        assert g1 == g2
        assert assemble_plate(g1) == assemble_plate(g2)

    def test_quadrant_layout_places_t1_t2_t1(self):
        t_marked = np.zeros((7, 7), dtype=np.uint8)
        t_marked[0, 0] = 1
        g = PlateGenome(Tile(t_marked), Tile(np.zeros((7, 7), np.uint8)), Tile(np.zeros((7, 7), np.uint8)))
        cells = assemble_plate(g).cells
        # T1 occupies quadrant slots (0,0), (0,2), (2,0), (2,2): corners at 7-cell pitch
        for i, j in [(0, 0), (0, 14), (14, 0), (14, 14)]:
            assert cells[i, j] == 1

    def test_ones_count_identity(self):
        # plate ones = 85 + 4 * quadrant-non-cross ones; quadrant = 4*T1 + 4*T2 + T3
        for seed in range(50):
            g = random_genome(seed)
            quadrant_ones = 4 * g.t1.ones() + 4 * g.t2.ones() + g.t3.ones()
            assert assemble_plate(g).ones() == 85 + 4 * quadrant_ones


class TestBitCodec:
    def test_zeros_and_ones(self):
        assert genome_from_bits([0] * 147) == genome_of(0)
        assert genome_from_bits([1] * 147) == genome_of(1)
        assert genome_to_bits(genome_of(0)).tolist() == [0] * 147
        assert genome_to_bits(genome_of(1)).tolist() == [1] * 147

    def test_tile_order_is_t1_t2_t3_row_major(self):
        bits = np.zeros(147, dtype=np.uint8)
        bits[0] = 1  # t1[0,0]
        bits[49 + 8] = 1  # t2[1,1]
        bits[98 + 48] = 1  # t3[6,6]
        g = genome_from_bits(bits)
        assert g.t1.cells[0, 0] == 1 and g.t1.ones() == 1
        assert g.t2.cells[1, 1] == 1 and g.t2.ones() == 1
        assert g.t3.cells[6, 6] == 1 and g.t3.ones() == 1

    def test_round_trip_on_1000_random_genomes(self):
        for seed in range(1000):
            g = random_genome(seed)
            assert genome_from_bits(genome_to_bits(g)) == g

    @pytest.mark.parametrize("n", [0, 146, 148, 1849])
    def test_wrong_length_rejected(self, n):
        with pytest.raises(EncodingError):
            genome_from_bits([0] * n)

    def test_non_binary_rejected(self):
        with pytest.raises(EncodingError):
            genome_from_bits([0] * 146 + [2])


class TestHexCodec:
    def test_38_lowercase_hex_chars(self):
        h = genome_to_hex(random_genome(1))
        assert len(h) == 38
        assert h == h.lower()
        int(h, 16)

    def test_all_zero_and_all_one_payloads(self):
        assert genome_to_hex(genome_of(0)) == "0" * 38
        # 147 ones then 5 zero padding bits: last byte is 0b11100000 = e0
        assert genome_to_hex(genome_of(1)) == "f" * 36 + "e0"

    def test_round_trip(self):
        for seed in range(200):
            g = random_genome(seed)
            assert genome_from_hex(genome_to_hex(g)) == g

    def test_nonzero_padding_rejected(self):
        with pytest.raises(EncodingError):
            genome_from_hex("f" * 38)  # would set the 5 reserved padding bits

    @pytest.mark.parametrize("bad", ["", "ff", "g" * 38, "0" * 37, "0" * 39])
    def test_malformed_hex_rejected(self, bad):
        with pytest.raises(EncodingError):
            genome_from_hex(bad)


class TestRandomGenome:
    def test_same_seed_same_genome(self):
        assert random_genome(123) == random_genome(123)

    def test_distinct_seeds_differ(self):
        assert random_genome(1) != random_genome(2)

    def test_per_bit_mean_near_half(self):
        bits = np.stack([genome_to_bits(random_genome(s)) for s in range(10000)])
        means = bits.mean(axis=0)
        assert means.min() >= 0.45 and means.max() <= 0.55


class TestDesignSpace:
    def test_total_size_rounds_to_published_value(self):
        assert f"{float(int(design_space_size())):.4e}" == "1.7841e+44"

    def test_total_size_has_45_digits(self):
        assert len(design_space_size()) == 45
        assert int(design_space_size()) == 2**147

    def test_per_tile_count(self):
        assert tile_space_size() == 2**49 == 562949953421312


class TestGuidedWavelength:
    def test_five_ghz_on_fr4_matches_quoted_28mm(self):
        assert guided_wavelength(5.0, 4.3) == pytest.approx(28.0, rel=0.04)

    def test_one_ghz_on_fr4_matches_quoted_142mm(self):
        assert guided_wavelength(1.0, 4.3) == pytest.approx(142.0, rel=0.02)

    def test_unity_permittivity_gives_free_space_wavelength(self):
        assert guided_wavelength(2.0, 1.0) == pytest.approx(299.792458 / 2.0, rel=1e-12)

    @pytest.mark.parametrize("f", [0.0, -1.0])
    def test_nonpositive_frequency_rejected(self, f):
        with pytest.raises(ValueError):
            guided_wavelength(f, 4.3)


class TestConstraints:
    def test_default_config_pixel_check_passes(self):
        report = validate_constraints(GeometryConfig())
        assert report.check("pixel_electrically_small").passed  # 1.4 < 28.9/20
        assert report.all_pass

    def test_oversized_pixel_fails(self):
        report = validate_constraints(GeometryConfig(pixel_side_mm=2.0))
        assert not report.check("pixel_electrically_small").passed

    def test_too_small_plate_fails_grid_fit(self):
        report = validate_constraints(GeometryConfig(plate_side_mm=60.0))
        assert not report.check("grid_fits_plate").passed  # 60 < 43 * 1.4 = 60.2

    def test_invalid_config_rejected(self):
        with pytest.raises(ConfigError):
            GeometryConfig(pixel_side_mm=-1.0)
        with pytest.raises(ConfigError):
            GeometryConfig(band_min_ghz=5.0, band_max_ghz=1.0)


class TestExports:
    def test_csv_shape_and_content(self):
        text = plate_to_csv(assemble_plate(genome_of(0)))
        rows = text.strip().split("\n")
        assert len(rows) == 43
        assert all(len(r.split(",")) == 43 for r in rows)
        assert rows[21] == ",".join(["1"] * 43)

    def test_pbm_header_and_payload(self):
        text = plate_to_pbm(assemble_plate(genome_of(1)))
        lines = text.strip().split("\n")
        assert lines[0] == "P1"
        assert lines[1] == "43 43"
        assert len(lines) == 2 + 43
        assert lines[2] == " ".join(["1"] * 43)


class TestPlateMatrixValidation:
    def test_broken_cross_rejected(self):
        cells = assemble_plate(genome_of(1)).cells.copy()
        cells[21, 0] = 0
        cells[21, 42] = 0
        with pytest.raises(EncodingError):
            PlateMatrix(cells)

    def test_broken_symmetry_rejected(self):
        cells = assemble_plate(genome_of(0)).cells.copy()
        cells[0, 0] = 1
        with pytest.raises(EncodingError):
            PlateMatrix(cells)


@settings(max_examples=50, deadline=None, derandomize=True)
@given(st.lists(st.integers(0, 1), min_size=GENOME_BITS, max_size=GENOME_BITS))
def test_bits_round_trip_property(bits):
    g = genome_from_bits(bits)
    assert genome_to_bits(g).tolist() == bits
    assert genome_from_hex(genome_to_hex(g)) == g
