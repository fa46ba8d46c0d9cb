from kpbench.corruption.seeding import derive_seed, derive_stream_seed, fnv1a_64, splitmix64

# (global_seed, image_id, kind, severity) -> u64, frozen from an independent
# transliteration of the published FNV-1a / splitmix64 algorithms
GOLDEN = [
    (0, 0, "motion_blur", 1, 9361364000387248163),
    (0, 0, "motion_blur", 2, 92420147461523178),
    (0, 0, "gaussian_noise", 1, 5875836093388249067),
    (42, 1000, "contrast", 5, 15309432403940827983),
    (42, 1000, "mask", 3, 2835844118006560740),
    (18446744073709551615, 123456789, "jpeg_compression", 4, 5731068927283814886),
]


def test_golden_values():
    for global_seed, image_id, kind, severity, expected in GOLDEN:
        assert derive_seed(global_seed, image_id, kind, severity) == expected


def test_deterministic():
    assert derive_seed(7, 3, "pixelate", 2) == derive_seed(7, 3, "pixelate", 2)


def test_fnv1a_reference_vectors():
    # published FNV-1a 64-bit test vectors
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C


def test_outputs_in_u64_range():
    for global_seed, image_id, kind, severity, _ in GOLDEN:
        value = derive_seed(global_seed, image_id, kind, severity)
        assert 0 <= value < 2**64
        assert 0 <= splitmix64(value) < 2**64


def test_severity_changes_seed():
    kinds = ["motion_blur", "gaussian_noise", "impulse_noise", "mask"]
    for kind in kinds:
        for image_id in range(20):
            seeds = [derive_seed(0, image_id, kind, s) for s in range(1, 6)]
            assert len(set(seeds)) == 5, (kind, image_id)


def test_kind_changes_seed():
    kinds = [
        "motion_blur", "gaussian_noise", "impulse_noise", "pixelate",
        "jpeg_compression", "color_quant", "brightness", "darkness",
        "contrast", "mask",
    ]
    for image_id in range(20):
        seeds = [derive_seed(0, image_id, kind, 3) for kind in kinds]
        assert len(set(seeds)) == len(kinds), image_id


def test_stream_seed_varies_by_position_and_label():
    a = derive_stream_seed(99, 0, "box_blur")
    b = derive_stream_seed(99, 1, "box_blur")
    c = derive_stream_seed(99, 0, "median_blur")
    assert len({a, b, c}) == 3
