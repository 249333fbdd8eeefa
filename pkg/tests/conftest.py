"""Shared synthetic fixtures.

The canonical crossing fixture (two 3-px bars 40 degrees apart, intensities
0.3 and 0.6 on a 0.9 background) and its variants are built analytically so
ground-truth bar membership is known per pixel.
"""

import numpy as np
import pytest

from vesselgroup.imageio import Image2D
from vesselgroup.pipeline import EngineParams, PatchSpec


def make_bar_mask(size, angle_deg, width, margin, center=None):
    """Pixels within width/2 of a line segment through the patch center."""
    c = (size - 1) / 2.0 if center is None else center
    yy, xx = np.mgrid[0:size, 0:size]
    t = np.deg2rad(angle_deg)
    perp = np.abs(-np.sin(t) * (xx - c) + np.cos(t) * (yy - c))
    along = np.abs(np.cos(t) * (xx - c) + np.sin(t) * (yy - c))
    return (perp <= width / 2.0) & (along <= (size - 1) / 2.0 - margin)


def crossing_pair(
    size=41,
    half_angle=20.0,
    rotation=0.0,
    margin=3,
    width=3.0,
    intensities=(0.3, 0.6),
    background=0.9,
):
    """Image, soft segmentation and the two generating bar masks.

    The darker bar is drawn on top (it keeps its intensity through the
    crossing, as the occluding vessel would).
    """
    bar1 = make_bar_mask(size, rotation + half_angle, width, margin)
    bar2 = make_bar_mask(size, rotation - half_angle, width, margin)
    img = np.full((size, size), background)
    img[bar2] = intensities[1]
    img[bar1] = intensities[0]
    seg = np.zeros((size, size))
    seg[bar2] = 0.8
    seg[bar1] = 1.0
    return Image2D(img), Image2D(seg), bar1, bar2


def broken_bar_pair(size=41, gap=3, width=3.0, margin=4, intensity=0.3):
    """Horizontal bar with a centered gap; returns (image, segmentation)."""
    c = size // 2
    yy, xx = np.mgrid[0:size, 0:size]
    on = (
        (np.abs(yy - c) <= width / 2.0)
        & (xx >= margin)
        & (xx < size - margin)
        & (np.abs(xx - c) > gap / 2.0)
    )
    img = np.full((size, size), 0.9)
    img[on] = intensity
    seg = np.zeros((size, size))
    seg[on] = 1.0
    return Image2D(img), Image2D(seg)


def parallel_bars_pair(size=41, sep=6, width=3.0, margin=4, intensities=(0.3, 0.7)):
    """Two horizontal bars of different intensity; returns (image, seg, b1, b2)."""
    c = size // 2
    yy, xx = np.mgrid[0:size, 0:size]
    span = (xx >= margin) & (xx < size - margin)
    b1 = (np.abs(yy - (c - sep / 2.0)) <= width / 2.0) & span
    b2 = (np.abs(yy - (c + sep / 2.0)) <= width / 2.0) & span
    img = np.full((size, size), 0.9)
    img[b1] = intensities[0]
    img[b2] = intensities[1]
    seg = np.zeros((size, size))
    seg[b1] = 1.0
    seg[b2] = 0.8
    return Image2D(img), Image2D(seg), b1, b2


def whole_patch(size=41) -> PatchSpec:
    c = (size - 1) / 2.0
    return PatchSpec(center=(c, c), size=float(size))


# parameters of the canonical crossing fixture: coarse angular sampling keeps
# the two bars one clean component each at a 40-degree separation
XFIX_PARAMS = dict(
    H=7, sigma=0.05, sigma2=0.1, epsilon=0.1, tau=150,
    n_paths=100000, n_theta=8, seed=7,
)


@pytest.fixture(scope="session")
def x_fixture():
    img, seg, bar1, bar2 = crossing_pair()
    return img, seg, bar1, bar2


@pytest.fixture(scope="session")
def x_params():
    return EngineParams(**XFIX_PARAMS)


@pytest.fixture(scope="session")
def kernel_cache(tmp_path_factory):
    """Session-wide kernel cache so repeated tests reuse estimates."""
    return tmp_path_factory.mktemp("kernel-cache")
