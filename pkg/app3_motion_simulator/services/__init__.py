# Motion Simulator Services
from .svg_render_service import FrameRenderer, render_frames
from .animation_service import render_animation
from .figure_service import plot_rom_curve, plot_sensitivity_scans, plot_gait_comparison
