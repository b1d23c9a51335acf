"""Near-range 3-D SAR imaging for handheld scans.

Simulation of frequency-stepped measurements over jittered planar
apertures, direct backprojection (the quality reference), a fast
factorized backprojection that bounds each subimage's local spectrum
analytically, plus image metrics and bit-exact file formats.
"""

from .bpa import ImageVolume, backproject, bpa_reconstruct, region_grid
from .errors import (ConfigError, HhsarError, IoFormatError,
                     NumericDomainError)
from .ffbp import (FfbpParams, OpCountReport, Subimage, SubimageGrid,
                   build_subimage_grid, default_levels, hhffbpa_reconstruct,
                   level1_reconstruct, merge_pair, predict_op_count)
from .io import (export_projection, read_cube, read_projection, read_volume,
                 write_cube, write_report, write_volume)
from .metrics import (PsfReport, max_intensity_projection, profile_cut,
                      psf_metrics, psnr)
from .model import (C_LIGHT, FrequencyGrid, ImagingRegion, JitterSpec, Scene,
                    Subarray, SubarrayTree, SyntheticAperture,
                    generate_handheld_aperture, partition_subarrays,
                    validate_geometry)
from .rangecomp import RangeProfileSet, range_compress, sample_delay
from .simulator import (DataCube, scene_from_spec, scene_grid, scene_star,
                        simulate_measurement)
from .spectrum import (KeyPointSet, SubarrayExtents, default_grid_dims,
                       keypoints, llt_forward, llt_invert, llt_jacobian,
                       local_wavenumber, nyquist_rates, nyquist_sample_count,
                       resolution_limit_rates, sdc_phase)

__version__ = "0.1.0"

__all__ = [
    "C_LIGHT", "ConfigError", "DataCube", "FfbpParams", "FrequencyGrid",
    "HhsarError", "ImageVolume", "ImagingRegion", "IoFormatError",
    "JitterSpec", "KeyPointSet", "NumericDomainError", "OpCountReport",
    "PsfReport", "RangeProfileSet", "Scene", "Subarray", "SubarrayExtents",
    "SubarrayTree", "Subimage", "SubimageGrid", "SyntheticAperture",
    "backproject", "bpa_reconstruct", "build_subimage_grid",
    "default_grid_dims", "default_levels", "export_projection",
    "generate_handheld_aperture", "hhffbpa_reconstruct", "keypoints",
    "level1_reconstruct", "llt_forward", "llt_invert", "llt_jacobian",
    "local_wavenumber", "max_intensity_projection", "merge_pair",
    "nyquist_rates", "nyquist_sample_count", "partition_subarrays",
    "predict_op_count", "profile_cut", "psf_metrics", "psnr", "range_compress",
    "read_cube", "read_projection", "read_volume", "region_grid",
    "resolution_limit_rates", "sample_delay", "scene_from_spec", "scene_grid",
    "scene_star", "sdc_phase", "simulate_measurement", "validate_geometry",
    "write_cube", "write_report", "write_volume",
]
