"""Numerical laboratory for three-point quadratic patterns in fractal subsets of [0, 1]."""
from .dyadic import DyadicInterval, DyadicSet, content_upper, find_dense_cube, rescale
from .errors import (AccuracyError, DivergenceError, FracpatError, NotFoundError,
                     ParameterError, PreconditionError, ResolutionError, StageError)
from .fourier import SpectralProfile, gap_integral, s_energy, sobolev_norm, spectrum, transform
from .integral import (DecompositionReport, QuadraticPattern, config_integral,
                       config_integral_frequency, decompose, positivity_certificate,
                       trilinear_estimate)
from .kernels import BACKEND
from .measure import GridMeasure, frostman, mollify, regular_core, spectral_gap_measure
from .patterns import PatternWitness, configuration_set, search_pattern, translation_defect
from .pipeline import RunConfig, run_pipeline, sweep
from .sampled import SampledFunction
from .setgen import CantorSpec, cantor, percolation, quarter_cantor

__version__ = "0.1.0"
