"""
Animation Service
Raster GIF of a simulated sit-to-stand sequence.
"""

from pathlib import Path

import imageio.v2 as imageio
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from PIL import Image

from shared.config import ANIMATION_FPS
from shared.errors import IoError
from shared.models import FrameSeries

from .svg_render_service import FrameRenderer

RASTER_DPI = 36
GIF_SIZE_PX = 400
MAX_GIF_FRAMES = 120


def _rasterize(fig) -> np.ndarray:
    canvas = FigureCanvasAgg(fig)
    canvas.draw()
    return np.asarray(canvas.buffer_rgba())[..., :3].copy()


def render_animation(
    frames: FrameSeries,
    path,
    fps: int = ANIMATION_FPS,
    max_frames: int = MAX_GIF_FRAMES,
    renderer: FrameRenderer = None,
) -> Path:
    """
    Write an animated GIF of the feasible frames.

    Long sequences are subsampled evenly to at most max_frames, always
    keeping the first and last pose.
    """
    renderer = renderer or FrameRenderer()
    feasible = frames.feasible_frames()
    if not feasible:
        raise ValueError("no feasible frames to animate")
    view = renderer.view_box(frames)
    picks = np.unique(np.linspace(0, len(feasible) - 1, min(max_frames, len(feasible))).round().astype(int))

    images = []
    for i in picks:
        fig = renderer.figure(feasible[i], view)
        fig.set_dpi(RASTER_DPI)
        image = Image.fromarray(_rasterize(fig))
        image.thumbnail((GIF_SIZE_PX, GIF_SIZE_PX))
        images.append(np.asarray(image))

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        imageio.mimsave(path, images, duration=1000 / fps, loop=0)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")
    return path
