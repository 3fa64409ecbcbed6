"""Spectral decay-rate maps for 2-D lidar."""

from ._core import (
    GridDecayMap,
    InitFailure,
    InvalidInput,
    LidarRay,
    ParseError,
    Ray2,
    RayOutcome,
    ScanSet,
    SensorLimits,
    SpectralMap,
    build_grid,
    fd_check,
    fit,
    grid_scan_log_likelihood,
    line_integral,
    p_ref,
    rasterize,
    ray_log_likelihood,
    render_pgm,
    scan_gradient,
    scan_log_likelihood,
    simulate,
    survival,
)

__all__ = [name for name in dir() if not name.startswith("_")]
