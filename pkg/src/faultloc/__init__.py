"""Sector-level fault localization from two-field signals.

Stages: synthetic data, SAE-GAN augmentation, merged soft/hard wavelet
denoising, LLE reduction and category-weighted AdaBoost over CNN + FCN
weak learners.
"""

from .boosting import BoostConfig, Ensemble, train_adaboost
from .config import PipelineConfig, dump_config, load_config, parse_config_text
from .dataset import Dataset, FieldId, FusedSample, RawSample
from .lle import LleConfig, lle_reduce, pca_reduce
from .metrics import RunReport, aggregate, evaluate
from .pipeline import PipelineError, Variant, ablate, run_pipeline
from .synthgen import SynthConfig, generate_dataset
from .wavelet import Filter, ThresholdPlan, denoise, dwt, idwt

__version__ = "0.1.0"

__all__ = [
    "BoostConfig", "Dataset", "Ensemble", "FieldId", "Filter", "FusedSample", "LleConfig",
    "PipelineConfig", "PipelineError", "RawSample", "RunReport", "SynthConfig",
    "ThresholdPlan", "Variant", "ablate", "aggregate", "denoise", "dump_config", "dwt",
    "evaluate", "generate_dataset", "idwt", "lle_reduce", "load_config",
    "parse_config_text", "pca_reduce", "run_pipeline", "train_adaboost",
]
