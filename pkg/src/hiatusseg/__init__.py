"""Multi-scale local-region level-set segmentation with a boundary-shape constraint."""
__version__ = "0.1.0"

from .energies import ModelParams
from .evolution import CvParams, DrlseParams, EvolutionReport, StopReason
from .evolution import evolve_cv, evolve_drlse, evolve_proposed
from .metrics import SegScores, score, summarize
from .phantoms import PhantomSpec, generate
from .pipeline import Ellipse, PipelineConfig, PipelineResult, run_pipeline

__all__ = [
    "CvParams",
    "DrlseParams",
    "Ellipse",
    "EvolutionReport",
    "ModelParams",
    "PhantomSpec",
    "PipelineConfig",
    "PipelineResult",
    "SegScores",
    "StopReason",
    "evolve_cv",
    "evolve_drlse",
    "evolve_proposed",
    "generate",
    "run_pipeline",
    "score",
    "summarize",
]
