"""Image patches as points on a sphere.

A patch maps to a triple (regularity rho, dominant orientation psi,
normalized mean intensity, the latter expressed as an elevation) and from
there to Cartesian sphere coordinates. On top of that sit spherical
codes, random-bar dictionaries sampled from them, and OMP reconstruction
of images over those dictionaries.
"""
from .patches import (Patch, ZeroMeanPatch, Histogram, as_patch, zero_mean,
                      normalized_mean_intensity, histogram, entropy, psnr,
                      patch_positions, extract_patches)
from .orientation import (ProjectorSet, OrientationEstimate, projector,
                          brute_force_projector, normalize_projectors,
                          projector_set, dominant_orientation,
                          orientations_batch, DEGENERACY_EPS)
from .regularity import (RegularityConfig, OrientationHistogram, rho_entropy,
                         rho_ldc, ldc_regularity, block_orientations,
                         regularity)
from .encoder import (EncodedPoint, Constellation, elevation_from_intensity,
                      to_stokes, from_stokes, rescale_for_encoding,
                      encode_patch, encode_collection)
from .spherecodes import (SphericalCode, generate_spherical_code,
                          load_spherical_code, save_spherical_code,
                          bundled_code_path)
from .bardict import (Atom, Dictionary, generate_atom, generate_dictionary,
                      randomize, union, save_dictionary, load_dictionary,
                      save_dictionary_matrix, load_dictionary_matrix,
                      atom_sheet)
from .sparse import (SparseCode, ReconstructionReport, omp, omp_signals,
                     reconstruct, backend_name)
from .imageio import read_pgm, write_pgm, read_png, read_image

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
