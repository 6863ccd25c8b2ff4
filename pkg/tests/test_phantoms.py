import dataclasses

import numpy as np
import pytest

from hiatusseg.metrics import score
from hiatusseg.phantoms import (
    PhantomSpec,
    clean_image,
    gap_sector,
    generate,
    shape_mask,
    spec_from_config,
    spec_to_config,
)


def test_clean_two_level_threshold():
    sharp, mask = generate(PhantomSpec(speckle_sigma=0.0, edge_blur=0.0))
    assert np.all(sharp[mask] == 0.6) and np.all(sharp[~mask] == 0.3)
    image, _ = generate(PhantomSpec(speckle_sigma=0.0))
    assert score(image > 0.45, mask).js >= 0.98


def test_deterministic():
    spec = PhantomSpec(gap_arcs=((100, 30),), bias=(0.2, 0.1), distractors=((30, 30, 10),))
    a, ma = generate(spec)
    b, mb = generate(dataclasses.replace(spec))
    assert np.array_equal(a, b) and np.array_equal(ma, mb)
    c, _ = generate(dataclasses.replace(spec, rng_seed=1))
    assert not np.array_equal(a, c)


def test_gap_removes_step():
    spec = PhantomSpec(speckle_sigma=0.0, gap_arcs=((165, 30),), gap_ramp=20)
    img = clean_image(spec)
    cy, cx, r = 128, 128, 60
    # across the normal at the middle of the gap (pointing left) and on the opposite side
    gap_step = img[cy, cx - r + 3] - img[cy, cx - r - 3]
    rim_step = img[cy, cx + r - 3] - img[cy, cx + r + 3]
    assert abs(gap_step) < 0.1
    assert rim_step > 0.2


def test_gap_sector_angles():
    spec = PhantomSpec(gap_arcs=((80, 20),))
    sector = gap_sector(spec)
    assert sector[20, 128] and not sector[236, 128] and not sector[128, 236]


def test_mask_independent_of_artefacts():
    base = PhantomSpec(shape="polygon", polygon=((60, 60), (200, 70), (180, 200), (70, 190)))
    noisy = dataclasses.replace(base, gap_arcs=((0, 45),), bias=(0.3, 0, 0.1),
                                distractors=((20, 20, 8),), speckle_sigma=0.3, rng_seed=9)
    assert np.array_equal(generate(base)[1], generate(noisy)[1])


def test_polygon_mask_square():
    spec = PhantomSpec(width=20, height=20, shape="polygon",
                       polygon=((4.5, 4.5), (14.5, 4.5), (14.5, 14.5), (4.5, 14.5)))
    mask = shape_mask(spec)
    assert mask.sum() == 100 and mask[5:15, 5:15].all()


@pytest.mark.parametrize("sigma", [0.0, 0.1, 0.3])
def test_interior_brighter_by_contrast(sigma):
    spec = PhantomSpec(speckle_sigma=sigma, edge_blur=0.0)
    image, mask = generate(spec)
    assert image[mask].mean() - image[~mask].mean() >= spec.contrast - 0.01


def test_speckle_statistics():
    spec = PhantomSpec(speckle_sigma=0.2, edge_blur=0.0, interior_level=0.4, background_level=0.2)
    image, mask = generate(spec)
    ratio = image[~mask] / 0.2
    assert ratio.mean() == pytest.approx(1.0, abs=0.01)
    assert ratio.std() == pytest.approx(0.2, abs=0.01)


def test_shape_outside_dims():
    with pytest.raises(ValueError):
        generate(PhantomSpec(width=16, height=16, center_x=100, center_y=100, semi_a=5, semi_b=5))
    with pytest.raises(ValueError):
        PhantomSpec(semi_a=0)
    with pytest.raises(ValueError):
        PhantomSpec(shape="polygon", polygon=((0, 0), (1, 1)))


def test_config_round_trip():
    spec = PhantomSpec(gap_arcs=((10, 30), (200, 15)), bias=(0.3, -0.1, 0.05),
                       distractors=((20, 30, 5),), rng_seed=4)
    values = {k: str(v) for k, v in spec_to_config(spec).items() if k != "rng_algorithm"}
    assert spec_from_config(values) == spec
    with pytest.raises(ValueError):
        spec_from_config({"radius": "3"})
    with pytest.raises(ValueError):
        spec_from_config({"gap_arcs": "10,20,30"})
