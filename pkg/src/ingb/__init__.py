"""Granular-ball informed oversampling for noisy imbalanced classification."""
from .baselines import Pipeline, ResampleConfig, enn_filter, run_pipeline, smote, tomek_filter
from .dataset import (Dataset, FoldPlan, NoiseSpec, inject_label_noise, load_csv,
                      scale_minmax, stratified_folds)
from .evaluation import compute_metrics, cross_validate, knn_predict, logreg_fit_predict
from .geometry import log_ball_volume, log_gamma, minkowski_distance
from .granular import GranularBall, SplitConfig, build_balls, can_split, make_ball, split_ball
from .informed import (SynthesisConfig, allocate, ball_entropy, ingb_oversample,
                       instance_stat, select_seeds, synthesize_in_ball)

__version__ = "0.1.0"
