import numpy as np

from perpetua.rng import GOLDEN_GAMMA, chunk_sizes, map_chunks, stream, stream_seed


def test_stream_seed_formula():
    assert stream_seed(0, 0) == 0
    assert stream_seed(5, 1) == 5 ^ GOLDEN_GAMMA
    assert stream_seed(5, 3) == 5 ^ ((3 * GOLDEN_GAMMA) % 2**64)


def test_streams_are_distinct_and_reproducible():
    a = stream(1, 0).random(4)
    assert np.array_equal(a, stream(1, 0).random(4))
    assert not np.array_equal(a, stream(1, 1).random(4))


def test_chunks():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]
    fn = lambda m, g: g.random(m).sum()
    one = map_chunks(fn, 1000, 3, workers=1, chunk=128)
    many = map_chunks(fn, 1000, 3, workers=4, chunk=128)
    assert one == many and len(one) == 8
