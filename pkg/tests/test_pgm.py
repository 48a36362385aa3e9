import random

import pytest

from skyrover import ParseError, UnsupportedFormatError, parse_pgm

from oracles import pgm_p2_bytes, pgm_p5_bytes


def test_2x2_threshold_and_flip():
    # picture rows top-down: [255, 0] over [0, 255]
    ground = parse_pgm(pgm_p2_bytes([[255, 0], [0, 255]]))
    # top picture row lands on the maximum-y map row
    assert ground.occupied(0, 1) is False and ground.occupied(1, 1) is True
    assert ground.occupied(0, 0) is True and ground.occupied(1, 0) is False


def test_1x1_binary_zero_is_occupied():
    ground = parse_pgm(pgm_p5_bytes([[0]]))
    assert ground.width == ground.height == 1
    assert ground.occupied(0, 0) is True


def test_p2_p5_equivalent_on_same_pattern():
    rng = random.Random(7)
    rows = [[rng.randrange(256) for _ in range(8)] for _ in range(8)]
    assert parse_pgm(pgm_p2_bytes(rows)) == parse_pgm(pgm_p5_bytes(rows))


def test_threshold_boundary_is_exclusive():
    ground = parse_pgm(pgm_p2_bytes([[127, 128]]))
    assert ground.occupied(0, 0) is True  # below threshold: obstacle
    assert ground.occupied(1, 0) is False  # at threshold: free


def test_threshold_parameter():
    ground = parse_pgm(pgm_p2_bytes([[10, 200]]), occupied_threshold=250)
    assert ground.occupied(0, 0) and ground.occupied(1, 0)


def test_comments_allowed_between_header_tokens():
    data = b"P2\n# c1\n2 # inline\n# c2\n1\n255\n7 200\n"
    ground = parse_pgm(data)
    assert ground.width == 2 and ground.height == 1
    assert ground.occupied(0, 0) and not ground.occupied(1, 0)


def test_bad_magic():
    with pytest.raises(UnsupportedFormatError, match="P2 or P5"):
        parse_pgm(b"P6\n1 1\n255\n\x00")


def test_maxval_above_255_rejected():
    with pytest.raises(ParseError, match="maxval"):
        parse_pgm(pgm_p2_bytes([[0]], maxval=65535))


def test_non_integer_dimensions():
    with pytest.raises(ParseError, match="integers"):
        parse_pgm(b"P2\nw h\n255\n0\n")


def test_short_p5_raster():
    data = pgm_p5_bytes([[0, 0], [0, 0]])[:-1]
    with pytest.raises(ParseError, match="expected 4"):
        parse_pgm(data)


def test_short_p2_raster():
    with pytest.raises(ParseError, match="expected 4"):
        parse_pgm(b"P2\n2 2\n255\n0 0 0\n")


def test_sample_above_maxval_rejected():
    with pytest.raises(ParseError, match="exceeds maxval"):
        parse_pgm(pgm_p2_bytes([[200]], maxval=100))


def test_resolution_attached():
    assert parse_pgm(pgm_p5_bytes([[0]]), resolution=0.25).resolution == 0.25
